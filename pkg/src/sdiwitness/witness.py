"""The (4,2,2) prepare-and-measure witness and its wave/particle decomposition."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .qcore import ATOL, KET0, KET1, MINUS, OPT_TOL, PLUS, BinaryObservable, QubitState, outcome_prob
from .search import periodic_max

# scenario: four preparations (two bits), two binary measurements, qubit messages
SCENARIO = (4, 2, 2)
DIMENSION = 2

INPUTS = tuple(itertools.product((0, 1), repeat=2))
KEYS = tuple((a0, a1, y) for (a0, a1) in INPUTS for y in (0, 1))

# sign of E_{a0a1,y} in S
COEFFS = {
    (0, 0, 0): 1, (0, 0, 1): 1,
    (0, 1, 0): 1, (0, 1, 1): -1,
    (1, 0, 0): -1, (1, 0, 1): 1,
    (1, 1, 0): -1, (1, 1, 1): -1,
}

MAX_GRID = 256
SQRT2 = math.sqrt(2)


class DecompositionError(RuntimeError):
    """The wave/particle decomposition disagrees with direct maximization."""


class EncodingError(ValueError):
    """Preparations do not follow the parity encoding (path bit in a0)."""


@dataclass(frozen=True)
class PreparationSet:
    states: Mapping[tuple[int, int], QubitState]

    def __post_init__(self) -> None:
        missing = set(INPUTS) - set(self.states)
        if missing:
            raise ValueError(f"missing preparations for inputs {sorted(missing)}")

    def __getitem__(self, key: tuple[int, int]) -> QubitState:
        return self.states[key]

    def parity_oblivious(self, tol: float = ATOL) -> bool:
        even = self[0, 0].rho + self[1, 1].rho
        odd = self[0, 1].rho + self[1, 0].rho
        return bool(np.max(np.abs(even - odd)) / 2 <= tol)


@dataclass(frozen=True)
class MeasurementPair:
    m0: BinaryObservable
    m1: BinaryObservable
    phi_s: float = float("nan")
    phi_x: float = float("nan")

    def __getitem__(self, y: int) -> BinaryObservable:
        return (self.m0, self.m1)[y]


@dataclass(frozen=True)
class CorrelatorTable:
    """``E[(a0, a1, y)] = P(b=0 | a0 a1, y)``."""

    entries: Mapping[tuple[int, int, int], float]

    def __getitem__(self, key: tuple[int, int, int]) -> float:
        return self.entries[key]

    def symmetric(self, tol: float = ATOL) -> bool:
        e = self.entries
        pairs = [((0, 0, 0), (0, 0, 1)), ((1, 1, 0), (1, 1, 1)),
                 ((0, 1, 0), (1, 0, 1)), ((1, 0, 0), (0, 1, 1))]
        return all(abs(e[p] - e[q]) <= tol for p, q in pairs)

    def normalized(self, tol: float = ATOL) -> bool:
        e = self.entries
        return (abs(e[0, 0, 0] + e[1, 1, 0] - 1) <= tol
                and abs(e[0, 1, 0] + e[1, 0, 0] - 1) <= tol)


@dataclass(frozen=True)
class DualityTables:
    """Per-configuration distinguishabilities (even parity) and visibilities (odd parity).

    ``d`` is keyed by ``(a0, a1, y)``; ``v`` by ``(a0, a1, y, b)``.
    """

    d: dict[tuple[int, int, int], float]
    v: dict[tuple[int, int, int, int], float]

    def decomposition(self) -> float:
        """Half the summed distinguishabilities plus half the visibilities with b = a_y."""
        dsum = sum(self.d.values())
        vsum = sum(val for (a0, a1, y, b), val in self.v.items() if b == (a0, a1)[y])
        return 0.5 * dsum + 0.5 * vsum


@dataclass(frozen=True)
class WitnessReport:
    s_value: float
    p_b: float
    phi_x_star: float = float("nan")
    duality: DualityTables | None = None
    decomposition: float = float("nan")
    extra: dict = field(default_factory=dict)


def bb84_preparations() -> PreparationSet:
    return PreparationSet({(0, 0): KET0, (0, 1): MINUS, (1, 0): PLUS, (1, 1): KET1})


def tunable_direction(phi_s: float, phi_x: float) -> np.ndarray:
    return np.array([
        math.sin(phi_s) * math.cos(phi_x),
        math.sin(phi_s) * math.sin(phi_x),
        math.cos(phi_s),
    ])


def tunable_measurements(phi_s: float, phi_x: float) -> MeasurementPair:
    """``M0 = cos(phi_s) Z + sin(phi_s)(cos(phi_x) X + sin(phi_x) Y)``, ``M1`` = M0 at phi_x + pi."""
    if not (math.isfinite(phi_s) and math.isfinite(phi_x)):
        raise ValueError("phases must be finite")
    m0 = BinaryObservable(tunable_direction(phi_s, phi_x))
    m1 = BinaryObservable(tunable_direction(phi_s, phi_x + math.pi))
    return MeasurementPair(m0, m1, phi_s, phi_x)


def correlator_table(prep: PreparationSet, meas: MeasurementPair) -> CorrelatorTable:
    return CorrelatorTable({(a0, a1, y): outcome_prob(prep[a0, a1], meas[y], 0) for a0, a1, y in KEYS})


def witness_value(table: CorrelatorTable | Mapping) -> float:
    entries = table.entries if isinstance(table, CorrelatorTable) else table
    missing = [k for k in KEYS if k not in entries]
    if missing:
        raise ValueError(f"correlator table lacks entries {missing}")
    return float(sum(c * entries[k] for k, c in COEFFS.items()))


def bob_success(s_value: float) -> float:
    """QRAC success probability ``(S + 4) / 8``."""
    if not -4.0 - ATOL <= s_value <= 4.0 + ATOL:
        raise ValueError(f"S = {s_value} is outside [-4, 4]")
    return (s_value + 4.0) / 8.0


def witness_at(prep: PreparationSet, phi_s: float, phi_x: float) -> float:
    return witness_value(correlator_table(prep, tunable_measurements(phi_s, phi_x)))


def per_config_duality(prep: PreparationSet, phi_s: float, grid: int = MAX_GRID) -> DualityTables:
    d: dict[tuple[int, int, int], float] = {}
    v: dict[tuple[int, int, int, int], float] = {}
    probe = np.linspace(0.0, 2 * math.pi, 17)
    for a0, a1 in INPUTS:
        state = prep[a0, a1]
        for y in (0, 1):
            if a0 == a1:
                vals = [2 * outcome_prob(state, tunable_measurements(phi_s, px)[y], a0) - 1 for px in probe]
                if max(vals) - min(vals) > 1e-9:
                    raise EncodingError(
                        f"distinguishability of input {a0}{a1}, y={y} drifts with phi_x by {max(vals) - min(vals):.3g}"
                    )
                d[a0, a1, y] = vals[0]
            else:
                for b in (0, 1):
                    def p(px: float, state=state, y=y, b=b) -> float:
                        return outcome_prob(state, tunable_measurements(phi_s, px)[y], b)

                    _, pmax = periodic_max(p, grid)
                    v[a0, a1, y, b] = 2 * pmax - 1
    return DualityTables(d, v)


def duality_witness_max(
    prep: PreparationSet | None = None,
    phi_s: float = math.pi / 4,
    grid: int = MAX_GRID,
    check: bool = True,
) -> WitnessReport:
    """Maximize S over phi_x and cross-check against the duality decomposition."""
    prep = prep or bb84_preparations()
    if grid < MAX_GRID:
        raise ValueError(f"grid must have at least {MAX_GRID} points")
    phi_star, s_star = periodic_max(lambda px: witness_at(prep, phi_s, px), grid)
    tables = per_config_duality(prep, phi_s, grid)
    rhs = tables.decomposition()
    if check and abs(rhs - s_star) > OPT_TOL:
        raise DecompositionError(f"max S = {s_star!r} but decomposition gives {rhs!r}")
    return WitnessReport(s_star, bob_success(s_star), phi_star, tables, rhs)


def symmetric_witness(d: float, v: float) -> float:
    """Maximal witness ``2 (D + V)`` for the symmetric interferometric strategy."""
    for name, val in (("d", d), ("v", v)):
        if not -ATOL <= val <= 1 + ATOL:
            raise ValueError(f"{name} = {val} is outside [0, 1]")
    return 2.0 * (d + v)
