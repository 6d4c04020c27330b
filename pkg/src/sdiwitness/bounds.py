"""Classical and quantum bounds on the witness, and the two security criteria."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .qcore import ATOL, SPECTRAL_TOL, BinaryObservable, QubitState, helstrom, state_from_bloch
from .witness import (
    COEFFS,
    INPUTS,
    KEYS,
    CorrelatorTable,
    MeasurementPair,
    PreparationSet,
    bob_success,
    correlator_table,
    witness_value,
)

QUANTUM_MAX = 2 * math.sqrt(2)
CLASSICAL_MAX = 2.0

# Original rule is a bare threshold; the improved one is the exact fixed point
# 5/6 of improved_eve_cap (0.833 when rounded).
PB_THRESHOLD_ORIGINAL = 0.8415
PB_THRESHOLD_IMPROVED = Fraction(5, 6)


def dv_threshold(pb_critical: float) -> float:
    """Map a P_B threshold to the D + V plane: P_B = (2(D+V) + 4)/8."""
    return float(4 * Fraction(str(pb_critical)) - 2)


# ---------------------------------------------------------------- classical


@dataclass(frozen=True)
class ClassicalStrategy:
    encoder: dict[tuple[int, int], int]
    decoder: dict[tuple[int, int], int]

    def table(self) -> CorrelatorTable:
        return CorrelatorTable({
            (a0, a1, y): 1.0 if self.decoder[self.encoder[a0, a1], y] == 0 else 0.0
            for a0, a1, y in KEYS
        })

    def witness(self) -> float:
        return witness_value(self.table())


def all_classical_strategies() -> list[ClassicalStrategy]:
    dec_keys = [(m, y) for m in (0, 1) for y in (0, 1)]
    out = []
    for enc in itertools.product((0, 1), repeat=4):
        for dec in itertools.product((0, 1), repeat=4):
            out.append(ClassicalStrategy(dict(zip(INPUTS, enc)), dict(zip(dec_keys, dec))))
    return out


@dataclass(frozen=True)
class ClassicalResult:
    value: float
    argmax: ClassicalStrategy
    count: int


def classical_maximum() -> ClassicalResult:
    """Exhaustive search over all 16 x 16 deterministic one-bit strategies."""
    strategies = all_classical_strategies()
    values = [s.witness() for s in strategies]
    best = int(np.argmax(values))
    return ClassicalResult(values[best], strategies[best], len(strategies))


# ---------------------------------------------------------------- quantum


@dataclass(frozen=True)
class QuantumAnsatz:
    preparations: np.ndarray  # (4, 3) Bloch vectors, rows in INPUTS order
    measurements: np.ndarray  # (2, 3) unit directions

    def prep_set(self) -> PreparationSet:
        return PreparationSet({a: state_from_bloch(n) for a, n in zip(INPUTS, self.preparations)})

    def meas_pair(self) -> MeasurementPair:
        return MeasurementPair(BinaryObservable(self.measurements[0]), BinaryObservable(self.measurements[1]))

    def witness(self) -> float:
        return witness_value(correlator_table(self.prep_set(), self.meas_pair()))


@dataclass
class SeeSawResult:
    value: float
    ansatz: QuantumAnsatz
    trace: list[float] = field(default_factory=list)
    restart_values: list[float] = field(default_factory=list)


_C = np.array([[COEFFS[a0, a1, y] for y in (0, 1)] for a0, a1 in INPUTS], dtype=float)


def _unit(v: np.ndarray, fallback: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    return v / n if n > SPECTRAL_TOL else fallback


def _random_unit(rng: np.random.Generator, k: int) -> np.ndarray:
    v = rng.normal(size=(k, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _bloch_witness(n: np.ndarray, m: np.ndarray) -> float:
    # coefficients sum to zero, so S = 1/2 sum c_{a,y} n_a . m_y
    return 0.5 * float(np.sum(_C * (n @ m.T)))


def _best_preps(m: np.ndarray, prev: np.ndarray) -> np.ndarray:
    g = _C @ m
    return np.array([_unit(g[i], prev[i]) for i in range(4)])


def _best_meas(n: np.ndarray, prev: np.ndarray) -> np.ndarray:
    g = _C.T @ n
    return np.array([_unit(g[y], prev[y]) for y in range(2)])


def see_saw(
    measurements: np.ndarray,
    *,
    optimize_measurements: bool = True,
    tie_measurements: bool = False,
    tol: float = 1e-10,
    max_iter: int = 10_000,
    callback: Callable[[QuantumAnsatz, float], None] | None = None,
) -> SeeSawResult:
    """Alternate exact best responses of preparations and measurements.

    With ``tie_measurements`` both inputs y share one direction.
    """
    m = np.array(measurements, dtype=float).reshape(2, 3)
    if tie_measurements:
        m[1] = m[0]
    n = _best_preps(m, np.tile([0.0, 0.0, 1.0], (4, 1)))
    trace = [_bloch_witness(n, m)]
    for _ in range(max_iter):
        if callback:
            callback(QuantumAnsatz(n.copy(), m.copy()), trace[-1])
        if not optimize_measurements:
            break
        if tie_measurements:
            g = (_C.T @ n).sum(axis=0)
            m = np.tile(_unit(g, m[0]), (2, 1))
        else:
            m = _best_meas(n, m)
        n = _best_preps(m, n)
        trace.append(_bloch_witness(n, m))
        if trace[-1] - trace[-2] < tol:
            break
    ansatz = QuantumAnsatz(n, m)
    return SeeSawResult(ansatz.witness(), ansatz, trace)


def quantum_maximum(
    seed: int = 42,
    restarts: int = 20,
    *,
    tie_measurements: bool = False,
    callback: Callable[[QuantumAnsatz, float], None] | None = None,
) -> SeeSawResult:
    """Best see-saw value over ``restarts`` random measurement initializations."""
    if restarts < 1:
        raise ValueError("need at least one restart")
    rng = np.random.default_rng(seed)
    best: SeeSawResult | None = None
    values = []
    for _ in range(restarts):
        res = see_saw(_random_unit(rng, 2), tie_measurements=tie_measurements, callback=callback)
        values.append(res.value)
        if best is None or res.value > best.value:
            best = res
    best.restart_values = values
    return best


# ---------------------------------------------------------------- eavesdropper


def eve_success(prep: PreparationSet) -> float:
    """Eve's average guessing probability for a0 and a1, measuring per target bit."""
    p = []
    for bit in (0, 1):
        groups = [
            QubitState.mixture(*(prep[a] for a in INPUTS if a[bit] == v)) for v in (0, 1)
        ]
        p.append(helstrom(*groups))
    return 0.5 * (p[0] + p[1])


class OutOfDomainError(ValueError):
    """P_B value not attainable with qubits; the improved cap is undefined there."""


def improved_eve_cap(p_b: float) -> float:
    """Upper bound ``(3 + sqrt(1 - 2(2 p_b - 1)^2)) / 4`` on Eve's guessing probability."""
    arg = 1 - 2 * (2 * p_b - 1) ** 2
    if arg < -ATOL:
        raise OutOfDomainError(f"|2 P_B - 1| > sqrt(2)/2 for P_B = {p_b}; not attainable with qubits")
    return (3 + math.sqrt(max(arg, 0.0))) / 4


def hyperbit_check(n: Sequence[float], triad: Sequence[Sequence[float]]) -> float:
    """Sum of squared expectations ``sum_i (n . m_i)^2`` over an orthonormal triad."""
    m = np.asarray(triad, dtype=float).reshape(3, 3)
    if np.max(np.abs(m @ m.T - np.eye(3))) > SPECTRAL_TOL:
        raise ValueError("measurement directions must be mutually orthonormal")
    n = np.asarray(n, dtype=float)
    if np.linalg.norm(n) > 1 + ATOL:
        raise ValueError("Bloch vector outside the unit ball")
    return float(np.sum((m @ n) ** 2))


# ---------------------------------------------------------------- verdicts


@dataclass(frozen=True)
class SecurityVerdict:
    p_b: float
    p_e_cap_original: float
    p_e_cap_improved: float | None
    secure_original: bool
    secure_improved: bool
    dv_threshold_original: float
    dv_threshold_improved: float
    dv_threshold_improved_rounded: float = 1.332
    pb_threshold_original: float = PB_THRESHOLD_ORIGINAL
    pb_threshold_improved: float = float(PB_THRESHOLD_IMPROVED)

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def security_verdict(p_b: float) -> SecurityVerdict:
    if not 0.0 <= p_b <= 1.0:
        raise ValueError(f"P_B = {p_b} is not a probability")
    try:
        cap = improved_eve_cap(p_b)
    except OutOfDomainError:
        cap = None
    return SecurityVerdict(
        p_b=p_b,
        p_e_cap_original=PB_THRESHOLD_ORIGINAL,
        p_e_cap_improved=cap,
        secure_original=p_b > PB_THRESHOLD_ORIGINAL,
        secure_improved=p_b > PB_THRESHOLD_IMPROVED,
        dv_threshold_original=dv_threshold(PB_THRESHOLD_ORIGINAL),
        dv_threshold_improved=float(dv_threshold(PB_THRESHOLD_IMPROVED)),
    )


def pb_from_dv(d: float, v: float) -> float:
    return bob_success(2 * (d + v))
