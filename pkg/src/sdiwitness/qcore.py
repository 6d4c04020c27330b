"""Qubit states, binary observables and the Born rule, all in dimension two."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

ATOL = 1e-12
SPECTRAL_TOL = 1e-10
OPT_TOL = 1e-6

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SX, SY, SZ)


class UnphysicalError(ValueError):
    """Raised when an input cannot describe a physical qubit object."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def _vec(a) -> np.ndarray:
    v = np.array(a, dtype=float).reshape(3)
    v.setflags(write=False)
    return v


def pauli_dot(v) -> np.ndarray:
    """Return ``v . sigma`` for a real 3-vector."""
    x, y, z = v
    return x * SX + y * SY + z * SZ


def bloch_of(m: np.ndarray) -> np.ndarray:
    """Real coefficients ``(Tr(m sx), Tr(m sy), Tr(m sz))``."""
    return np.array([np.trace(m @ p).real for p in PAULI])


@dataclass(frozen=True, eq=False)
class QubitState:
    rho: np.ndarray

    def __post_init__(self) -> None:
        rho = np.asarray(self.rho, dtype=complex)
        if rho.shape != (2, 2) or not np.all(np.isfinite(rho)):
            raise UnphysicalError("density operator must be a finite 2x2 matrix")
        if np.max(np.abs(rho - rho.conj().T)) > ATOL:
            raise UnphysicalError("density operator is not Hermitian")
        if abs(np.trace(rho) - 1) > ATOL:
            raise UnphysicalError(f"trace {np.trace(rho).real!r} != 1")
        if np.linalg.eigvalsh(rho).min() < -ATOL:
            raise UnphysicalError("density operator has a negative eigenvalue")
        object.__setattr__(self, "rho", _frozen(rho))

    @property
    def bloch(self) -> np.ndarray:
        return bloch_of(self.rho)

    @property
    def purity(self) -> float:
        return float(np.trace(self.rho @ self.rho).real)

    @classmethod
    def from_ket(cls, ket) -> QubitState:
        k = np.asarray(ket, dtype=complex)
        k = k / np.linalg.norm(k)
        return cls(np.outer(k, k.conj()))

    @classmethod
    def mixture(cls, *states: QubitState) -> QubitState:
        """Equal-weight mixture."""
        return cls(sum(s.rho for s in states) / len(states))


@dataclass(frozen=True, eq=False)
class BinaryObservable:
    """A +/-1 valued observable ``m . sigma`` with unit Bloch direction ``m``.

    Outcome 0 is the +1 eigenprojector, outcome 1 the -1 eigenprojector.
    """

    direction: np.ndarray

    def __post_init__(self) -> None:
        m = _vec(self.direction)
        if not np.all(np.isfinite(m)) or abs(np.linalg.norm(m) - 1) > SPECTRAL_TOL:
            raise UnphysicalError(f"observable direction {m} is not a unit vector")
        object.__setattr__(self, "direction", m)

    @property
    def op(self) -> np.ndarray:
        return pauli_dot(self.direction)

    def projector(self, b: int) -> np.ndarray:
        sign = 1.0 if b == 0 else -1.0
        return 0.5 * (I2 + sign * self.op)

    @classmethod
    def from_operator(cls, op) -> BinaryObservable:
        op = np.asarray(op, dtype=complex)
        if np.max(np.abs(op @ op - I2)) > SPECTRAL_TOL:
            raise UnphysicalError("operator does not square to the identity")
        if np.max(np.abs(op - op.conj().T)) > SPECTRAL_TOL:
            raise UnphysicalError("operator is not Hermitian")
        return cls(bloch_of(op) / 2)


def state_from_bloch(n) -> QubitState:
    n = np.asarray(n, dtype=float)
    if np.linalg.norm(n) > 1 + ATOL:
        raise UnphysicalError(f"Bloch vector {n} lies outside the unit ball")
    return QubitState(0.5 * (I2 + pauli_dot(n)))


def outcome_prob(state: QubitState, obs: BinaryObservable, b: int) -> float:
    if b not in (0, 1):
        raise ValueError(f"outcome must be 0 or 1, got {b!r}")
    p = float(np.trace(state.rho @ obs.projector(b)).real)
    # clip rounding only; anything larger is a bug upstream
    return min(max(p, 0.0), 1.0)


def expectation(state: QubitState, obs: BinaryObservable) -> float:
    return 2.0 * outcome_prob(state, obs, 0) - 1.0


def trace_norm_traceless(delta: np.ndarray) -> float:
    """Trace norm of a traceless Hermitian 2x2 matrix.

    Its eigenvalues are +/- sqrt(-det), so the norm is 2 sqrt(-det).
    """
    det = (delta[0, 0] * delta[1, 1] - delta[0, 1] * delta[1, 0]).real
    return 2.0 * math.sqrt(max(-det, 0.0))


def helstrom(rho0: QubitState, rho1: QubitState) -> float:
    """Optimal equal-prior success probability for telling ``rho0`` from ``rho1``."""
    return 0.5 + 0.25 * trace_norm_traceless(rho0.rho - rho1.rho)


KET0 = QubitState.from_ket([1, 0])
KET1 = QubitState.from_ket([0, 1])
PLUS = QubitState.from_ket([1, 1])
MINUS = QubitState.from_ket([1, -1])
MAXMIX = QubitState(I2 / 2)

OBS_X = BinaryObservable((1, 0, 0))
OBS_Y = BinaryObservable((0, 1, 0))
OBS_Z = BinaryObservable((0, 0, 1))
