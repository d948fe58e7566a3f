"""Phase-estimation protocol: register preparation, phase kicks, the
five-gate controlled-phase decomposition, the inverse QFT schedule, and the
measurement statistics.

Molecule j holds readout bit phi_{m-j+1}; detectors return register order
(molecule 1 first), which is reversed before forming the binary fraction.
The readout integer is j = sum_i phi_i 2^{m-i}, so the estimate is
2*pi*j / 2^m.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import statevector as sv
from .errors import (
    BoundUndefinedError,
    DomainError,
    ValidationError,
)
from .pulses import (
    hadamard_pulse_params,
    phase_gate_pulse_params,
    single_pulse_unitary,
)

TWO_PI = 2.0 * math.pi
MAX_REGISTER = 20

IDEAL_HADAMARD = np.array([[1, 1], [1, -1]], dtype=np.complex128) / math.sqrt(2)
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]],
    dtype=np.complex128,
)


class GateMode(str, Enum):
    IDEAL = "ideal"
    PULSE_LITERAL = "pulse-literal"


@dataclass
class QpeConfig:
    """One phase-estimation experiment."""

    m: int
    true_phase_phi: float
    n: int | None = None
    gate_mode: GateMode = GateMode.IDEAL
    include_target_qubit: bool = False
    shots: int = 0
    seed: int = 0

    def __post_init__(self):
        if not (1 <= self.m <= MAX_REGISTER):
            raise ValidationError(f"m must be in [1, {MAX_REGISTER}], got {self.m}")
        if self.n is None:
            self.n = self.m
        if not (1 <= self.n <= self.m):
            raise ValidationError(f"n must be in [1, m], got {self.n}")
        if not (0.0 < self.true_phase_phi <= TWO_PI):
            raise ValidationError(
                f"true phase must lie in (0, 2*pi], got {self.true_phase_phi}"
            )
        if self.shots < 0:
            raise ValidationError("shots must be >= 0")
        self.gate_mode = GateMode(self.gate_mode)


@dataclass
class PhaseEstimate:
    bits: tuple  # phi_1 ... phi_m, already reversed from register order
    estimated_phase: float
    eta_percent: float


@dataclass
class OutcomeDistribution:
    m: int
    probs: np.ndarray  # indexed by readout integer j


@dataclass(frozen=True)
class SequenceStep:
    """One element of the five-gate controlled-phase decomposition."""

    kind: str            # "phase" or "cnot"
    slot: str | None = None   # "j" (control) or "k" (target) for phase gates
    angle: float | None = None


def _hadamard_gate(mode: GateMode) -> np.ndarray:
    if mode == GateMode.IDEAL:
        return IDEAL_HADAMARD
    return single_pulse_unitary(hadamard_pulse_params())


def _phase_gate(theta: float, mode: GateMode, power: int = 1) -> np.ndarray:
    """theta phase gate, optionally raised to an integer power (diagonal)."""
    if mode == GateMode.IDEAL:
        return np.diag([1.0, np.exp(1j * power * theta)]).astype(np.complex128)
    # pulse realization is diag(-e^{-i theta}, e^{i theta})
    base = single_pulse_unitary(phase_gate_pulse_params(theta))
    return np.diag([base[0, 0] ** power, base[1, 1] ** power]).astype(np.complex128)


def prepare_register(m: int, gate_mode: GateMode = GateMode.IDEAL) -> sv.QuantumState:
    """All-zeros register with a Hadamard-step pulse on every molecule."""
    state = sv.new_state(m)
    h = _hadamard_gate(gate_mode)
    for q in range(1, m + 1):
        state = sv.apply_1q(state, q, h)
    return state


def apply_phase_kicks(
    state: sv.QuantumState, phi: float, m: int, gate_mode: GateMode = GateMode.IDEAL
) -> sv.QuantumState:
    """Write e^{i 2^{m-j} phi} onto molecule j's relative phase, j = 1..m."""
    for j in range(1, m + 1):
        reps = 2 ** (m - j)
        state = sv.apply_1q(state, j, _phase_gate(phi, gate_mode, power=reps))
    return state


def controlled_phase_sequence(theta: float) -> list[SequenceStep]:
    """Five-gate decomposition whose composite is diag(1, 1, 1, e^{-2i theta}).

    Time order: theta phase gates U(x) = diag(1, e^{ix}) on the control (j)
    and target (k) slots interleaved with two CNOT(j -> k) gates.
    """
    if not math.isfinite(theta):
        raise ValidationError("theta must be finite")
    return [
        SequenceStep("phase", "j", -theta),
        SequenceStep("cnot"),
        SequenceStep("phase", "k", theta),
        SequenceStep("cnot"),
        SequenceStep("phase", "k", -theta),
    ]


def sequence_unitary(theta: float) -> np.ndarray:
    """4x4 composite of the five-gate sequence on the ordered (j, k) pair."""
    total = np.eye(4, dtype=np.complex128)
    eye = np.eye(2, dtype=np.complex128)
    for step in controlled_phase_sequence(theta):
        if step.kind == "cnot":
            g = CNOT
        else:
            u = np.diag([1.0, np.exp(1j * step.angle)])
            g = np.kron(u, eye) if step.slot == "j" else np.kron(eye, u)
        total = g @ total
    return total


def _apply_sequence(
    state: sv.QuantumState, j: int, k: int, theta: float, mode: GateMode
) -> sv.QuantumState:
    for step in controlled_phase_sequence(theta):
        if step.kind == "cnot":
            state = sv.apply_2q(state, j, k, CNOT)
        else:
            target = j if step.slot == "j" else k
            state = sv.apply_1q(state, target, _phase_gate(step.angle, mode))
    return state


def inverse_qft(
    state: sv.QuantumState, m: int, gate_mode: GateMode = GateMode.IDEAL
) -> sv.QuantumState:
    """Inverse-QFT schedule: Hadamard on molecule 1, then for each molecule
    r = 2..m the controlled-phase sequences U_{s,r} (theta = pi / 2^{r-s+1})
    followed by a Hadamard on r."""
    h = _hadamard_gate(gate_mode)
    state = sv.apply_1q(state, 1, h)
    for r in range(2, m + 1):
        for s in range(1, r):
            state = _apply_sequence(state, s, r, math.pi / 2 ** (r - s + 1), gate_mode)
        state = sv.apply_1q(state, r, h)
    return state


def bit_reverse(j: int, m: int) -> int:
    out = 0
    for _ in range(m):
        out = (out << 1) | (j & 1)
        j >>= 1
    return out


def estimate_from_bits(register_bits: tuple, true_phase: float) -> PhaseEstimate:
    """Turn register-order detector bits into a phase estimate."""
    readout = tuple(reversed(register_bits))
    frac = sum(b / 2 ** (i + 1) for i, b in enumerate(readout))
    phi_hat = TWO_PI * frac
    return PhaseEstimate(
        bits=readout,
        estimated_phase=phi_hat,
        eta_percent=phi_hat / true_phase * 100.0,
    )


def measure_and_estimate(
    state: sv.QuantumState, m: int, true_phase: float, seed: int
) -> PhaseEstimate:
    """Measure molecules 1..m and read the result out in reversed order."""
    record = sv.measure_all(state, seed)
    return estimate_from_bits(record.bits, true_phase)


def exact_distribution(
    m: int, phi: float, gate_mode: GateMode = GateMode.IDEAL
) -> OutcomeDistribution:
    """Full readout distribution of the protocol, no sampling."""
    state = prepare_register(m, gate_mode)
    state = apply_phase_kicks(state, phi, m, gate_mode)
    state = inverse_qft(state, m, gate_mode)
    register_probs = sv.probabilities(state)
    probs = np.empty(2 ** m)
    for j in range(2 ** m):
        probs[j] = register_probs[bit_reverse(j, m)]
    return OutcomeDistribution(m=m, probs=probs)


def success_probability_bound(m: int, n: int) -> float:
    """Chance the m-bit estimate lands within 1/2^n: 1 - 1/(2^{m-n+1} - 4)."""
    if m <= n:
        raise DomainError(f"need m > n, got m={m}, n={n}")
    if m == n + 1:
        raise BoundUndefinedError(
            "bound denominator vanishes at m = n + 1; need m >= n + 2"
        )
    return 1.0 - 1.0 / (2 ** (m - n + 1) - 4)


def empirical_success(
    m: int, n: int, phi: float, gate_mode: GateMode = GateMode.IDEAL
) -> float:
    """Probability mass of readouts within circular distance 1/2^n of phi."""
    if m < n:
        raise DomainError(f"need m >= n, got m={m}, n={n}")
    dist = exact_distribution(m, phi, gate_mode)
    frac = (phi / TWO_PI) % 1.0
    j = np.arange(2 ** m)
    d = np.abs(j / 2 ** m - frac) % 1.0
    d = np.minimum(d, 1.0 - d)
    return float(dist.probs[d < 0.5 ** n].sum())


def kick_equivalence_check(m: int, phi: float) -> float:
    """Overlap modulus between the single-qubit-kick state and the explicit
    (m+1)-qubit controlled-phase construction with the target held in |1>."""
    if m > 10:
        raise ValidationError("kick equivalence check limited to m <= 10")
    # (a) single-qubit kicks on m qubits
    a = apply_phase_kicks(prepare_register(m), phi, m)
    a_full = np.kron(a.amplitudes, np.array([0.0, 1.0]))  # append target |1>

    # (b) explicit controlled-phase gates onto the (m+1)th molecule
    b = sv.new_state(m + 1)
    flip = np.array([[0, 1], [1, 0]], dtype=np.complex128)
    b = sv.apply_1q(b, m + 1, flip)
    for q in range(1, m + 1):
        b = sv.apply_1q(b, q, IDEAL_HADAMARD)
    for j in range(1, m + 1):
        reps = 2 ** (m - j)
        cphase = np.diag([1.0, 1.0, 1.0, np.exp(1j * reps * phi)]).astype(
            np.complex128
        )
        b = sv.apply_2q(b, j, m + 1, cphase)
    return float(abs(np.vdot(a_full, b.amplitudes)))


def shot_seed(seed: int, shot_index: int) -> int:
    """Deterministic per-shot seed so parallel and serial runs agree."""
    return int(np.random.SeedSequence([seed, shot_index]).generate_state(1)[0])


def run_final_state(config: QpeConfig) -> sv.QuantumState:
    """Prepared-kicked-transformed state for one experiment.

    With include_target_qubit the (m+1)th molecule is simulated explicitly in
    |1> and the kicks become true controlled-phase gates; the inverse QFT
    still acts on molecules 1..m only.
    """
    m, phi, mode = config.m, config.true_phase_phi, config.gate_mode
    if not config.include_target_qubit:
        state = prepare_register(m, mode)
        state = apply_phase_kicks(state, phi, m, mode)
        return inverse_qft(state, m, mode)
    state = sv.new_state(m + 1)
    flip = np.array([[0, 1], [1, 0]], dtype=np.complex128)
    state = sv.apply_1q(state, m + 1, flip)
    h = _hadamard_gate(mode)
    for q in range(1, m + 1):
        state = sv.apply_1q(state, q, h)
    for j in range(1, m + 1):
        reps = 2 ** (m - j)
        cphase = np.diag([1.0, 1.0, 1.0, np.exp(1j * reps * phi)]).astype(
            np.complex128
        )
        state = sv.apply_2q(state, j, m + 1, cphase)
    return inverse_qft(state, m, mode)


def readout_distribution(config: QpeConfig) -> OutcomeDistribution:
    """Exact readout distribution for a config, honoring the target-qubit flag."""
    if not config.include_target_qubit:
        return exact_distribution(config.m, config.true_phase_phi, config.gate_mode)
    state = run_final_state(config)
    m = config.m
    # marginalize the target molecule (last tensor factor)
    reg = (np.abs(state.amplitudes.reshape(2 ** m, 2)) ** 2).sum(axis=1)
    probs = np.empty(2 ** m)
    for j in range(2 ** m):
        probs[j] = reg[bit_reverse(j, m)]
    return OutcomeDistribution(m=m, probs=probs)
