"""Dense state-vector core for a qubit register plus an optional cavity mode.

Basis convention: qubit 1 is the most significant bit of the basis index;
the cavity mode, when present, occupies the least significant position.
The cavity Fock space is truncated to {0, 1}.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    CapacityError,
    ConfigurationError,
    DimensionError,
    NumericalInvariantError,
    ValidationError,
)

MAX_QUBITS = 24
NORM_TOL = 1e-10
UNITARY_TOL = 1e-12
GENERATOR_ID = "numpy-pcg64"


@dataclass
class QuantumState:
    """Amplitude vector over ``num_qubits`` qubits and an optional cavity mode."""

    num_qubits: int
    has_cavity: bool
    amplitudes: np.ndarray  # complex128, length 2**num_qubits * (2 if cavity)

    @property
    def num_factors(self) -> int:
        return self.num_qubits + (1 if self.has_cavity else 0)

    @property
    def dim(self) -> int:
        return 2 ** self.num_factors

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "QuantumState":
        return QuantumState(self.num_qubits, self.has_cavity, self.amplitudes.copy())


@dataclass
class MeasurementRecord:
    """Outcome of measuring every qubit of the register (cavity untouched)."""

    bits: tuple  # qubit 1 first
    collapsed: QuantumState
    seed_used: int
    generator: str = GENERATOR_ID


def new_state(m: int, with_cavity: bool = False) -> QuantumState:
    """All-zeros computational basis state on m qubits (cavity in vacuum)."""
    if not (1 <= m <= MAX_QUBITS):
        raise CapacityError(f"qubit count must be in [1, {MAX_QUBITS}], got {m}")
    dim = 2 ** (m + (1 if with_cavity else 0))
    amps = np.zeros(dim, dtype=np.complex128)
    amps[0] = 1.0
    return QuantumState(m, with_cavity, amps)


def _require_unitary(gate: np.ndarray, dim: int) -> np.ndarray:
    gate = np.asarray(gate, dtype=np.complex128)
    if gate.shape != (dim, dim):
        raise DimensionError(f"expected {dim}x{dim} gate, got shape {gate.shape}")
    dev = np.max(np.abs(gate.conj().T @ gate - np.eye(dim)))
    if dev > UNITARY_TOL:
        raise ValidationError(f"gate is not unitary (deviation {dev:.3e})")
    return gate


def _check_norm(state: QuantumState) -> QuantumState:
    if abs(state.norm() - 1.0) > NORM_TOL:
        raise NumericalInvariantError(
            f"state norm drifted to {state.norm():.15f}"
        )
    return state


def _qubit_axis(state: QuantumState, qubit_index: int) -> int:
    if not (1 <= qubit_index <= state.num_qubits):
        raise DimensionError(
            f"qubit index {qubit_index} out of range 1..{state.num_qubits}"
        )
    return qubit_index - 1


def apply_1q(state: QuantumState, qubit_index: int, gate: np.ndarray) -> QuantumState:
    """Apply a 2x2 unitary to the indexed qubit (1-based)."""
    gate = _require_unitary(gate, 2)
    axis = _qubit_axis(state, qubit_index)
    n = state.num_factors
    psi = state.amplitudes.reshape((2,) * n)
    psi = np.tensordot(gate, psi, axes=([1], [axis]))
    psi = np.moveaxis(psi, 0, axis)
    out = QuantumState(state.num_qubits, state.has_cavity, psi.reshape(-1).copy())
    return _check_norm(out)


def apply_2q(
    state: QuantumState, control_index: int, target_index: int, gate: np.ndarray
) -> QuantumState:
    """Apply a 4x4 unitary to the ordered (control, target) qubit pair."""
    if control_index == target_index:
        raise DimensionError("control and target must be distinct")
    gate = _require_unitary(gate, 4)
    ax_c = _qubit_axis(state, control_index)
    ax_t = _qubit_axis(state, target_index)
    n = state.num_factors
    psi = state.amplitudes.reshape((2,) * n)
    g = gate.reshape(2, 2, 2, 2)
    psi = np.tensordot(g, psi, axes=([2, 3], [ax_c, ax_t]))
    psi = np.moveaxis(psi, [0, 1], [ax_c, ax_t])
    out = QuantumState(state.num_qubits, state.has_cavity, psi.reshape(-1).copy())
    return _check_norm(out)


def apply_qubit_cavity(
    state: QuantumState, qubit_index: int, gate: np.ndarray
) -> QuantumState:
    """Apply a 4x4 unitary on (qubit, cavity), basis order {g0, g1, e0, e1}."""
    if not state.has_cavity:
        raise ConfigurationError("state has no cavity mode")
    gate = _require_unitary(gate, 4)
    ax_q = _qubit_axis(state, qubit_index)
    ax_c = state.num_factors - 1
    n = state.num_factors
    psi = state.amplitudes.reshape((2,) * n)
    g = gate.reshape(2, 2, 2, 2)
    psi = np.tensordot(g, psi, axes=([2, 3], [ax_q, ax_c]))
    psi = np.moveaxis(psi, [0, 1], [ax_q, ax_c])
    out = QuantumState(state.num_qubits, state.has_cavity, psi.reshape(-1).copy())
    return _check_norm(out)


def probabilities(state: QuantumState) -> np.ndarray:
    """Born-rule probability for every basis state (cavity dimension included)."""
    probs = np.abs(state.amplitudes) ** 2
    if abs(probs.sum() - 1.0) > NORM_TOL:
        raise NumericalInvariantError(f"probabilities sum to {probs.sum():.15f}")
    return probs


def measure_all(state: QuantumState, seed: int) -> MeasurementRecord:
    """Measure every qubit; the cavity factor is left untouched.

    The outcome is drawn from the register marginal with a seeded PCG64
    stream, so identical seeds give identical records.
    """
    m = state.num_qubits
    cav = 2 if state.has_cavity else 1
    pattern_probs = (
        np.abs(state.amplitudes.reshape(2 ** m, cav)) ** 2
    ).sum(axis=1)
    pattern_probs = pattern_probs / pattern_probs.sum()
    rng = np.random.default_rng(seed)
    outcome = int(rng.choice(2 ** m, p=pattern_probs))
    bits = tuple((outcome >> (m - 1 - i)) & 1 for i in range(m))

    collapsed_amps = np.zeros_like(state.amplitudes)
    block = slice(outcome * cav, (outcome + 1) * cav)
    collapsed_amps[block] = state.amplitudes[block]
    collapsed_amps /= np.linalg.norm(collapsed_amps)
    collapsed = QuantumState(m, state.has_cavity, collapsed_amps)
    return MeasurementRecord(bits=bits, collapsed=collapsed, seed_used=seed)


def overlap(a: QuantumState, b: QuantumState) -> complex:
    """Inner product <a|b>."""
    if a.dim != b.dim or a.num_qubits != b.num_qubits or a.has_cavity != b.has_cavity:
        raise DimensionError("states have different shapes")
    return complex(np.vdot(a.amplitudes, b.amplitudes))
