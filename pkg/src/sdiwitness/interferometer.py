"""Mach-Zehnder interferometer with a tunable output beam splitter.

The photon enters in port ``|0>``, passes the input beam splitter, an optional
path blocker, the internal phase ``phi_x`` and finally the tunable beam
splitter (``BS2 . PM2(phi_s) . BS2``).  Path index 0 is the upper arm.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .search import periodic_max, periodic_min

BS1 = np.array([[1, 1j], [1j, 1]], dtype=complex) / math.sqrt(2)
BS2 = np.array([[1j, -1], [-1, 1j]], dtype=complex) / math.sqrt(2)


class Block(enum.Enum):
    NONE = "none"
    UPPER = "upper"
    LOWER = "lower"


BLOCKERS = {
    Block.NONE: np.eye(2, dtype=complex),
    Block.UPPER: np.diag([0, 1]).astype(complex),
    Block.LOWER: np.diag([1, 0]).astype(complex),
}


class DarkOutputError(ZeroDivisionError):
    """Both detectors see zero probability, so a contrast ratio is undefined."""


def phase_mod(phi: float) -> np.ndarray:
    return np.diag([1, np.exp(1j * phi)])


def tbs(phi_s: float) -> np.ndarray:
    return BS2 @ phase_mod(phi_s) @ BS2


@dataclass(frozen=True)
class InterferometerConfig:
    phi_x: float
    phi_s: float
    block: Block = Block.NONE

    def __post_init__(self) -> None:
        if not (math.isfinite(self.phi_x) and math.isfinite(self.phi_s)):
            raise ValueError("phases must be finite")
        object.__setattr__(self, "block", Block(self.block))

    @property
    def canonical_phi_s(self) -> float:
        """``phi_s`` folded into the TBS range [0, pi/2] (same |cos|, |sin|)."""
        t = self.phi_s % math.pi
        return t if t <= math.pi / 2 else math.pi - t

    def unitary(self) -> np.ndarray:
        return tbs(self.phi_s) @ phase_mod(self.phi_x) @ BLOCKERS[self.block] @ BS1


@dataclass(frozen=True)
class PortProbabilities:
    p0: float
    p1: float
    normalized: bool

    @property
    def total(self) -> float:
        return self.p0 + self.p1

    def contrast(self) -> float:
        """``|p0 - p1| / (p0 + p1)``."""
        if self.total <= 0.0:
            raise DarkOutputError("p0 + p1 = 0")
        return abs(self.p0 - self.p1) / self.total


@dataclass(frozen=True)
class DualityEstimate:
    d_upper: float = float("nan")
    d_lower: float = float("nan")
    d_mean: float = float("nan")
    v_port0: float = float("nan")
    v_port1: float = float("nan")
    v_mean: float = float("nan")


def propagate(config: InterferometerConfig) -> PortProbabilities:
    amp = config.unitary()[:, 0]
    p = np.abs(amp) ** 2
    return PortProbabilities(float(p[0]), float(p[1]), normalized=config.block is Block.NONE)


def closed_form(phi_x: float, phi_s: float) -> tuple[float, float]:
    """Unblocked detection probabilities ``(1 +/- sin phi_x sin phi_s) / 2``."""
    k = math.sin(phi_x) * math.sin(phi_s)
    return 0.5 * (1 + k), 0.5 * (1 - k)


def _port(phi_s: float, j: int):
    def f(phi_x: float) -> float:
        p = propagate(InterferometerConfig(phi_x, phi_s))
        return p.p0 if j == 0 else p.p1

    return f


def visibility(phi_s: float, scan_points: int = 64) -> DualityEstimate:
    """Fringe visibility per port from a scanned ``phi_x``, no closed forms used."""
    if scan_points < 8:
        raise ValueError(f"scan_points must be >= 8, got {scan_points}")
    vs = []
    for j in (0, 1):
        f = _port(phi_s, j)
        _, hi = periodic_max(f, scan_points)
        _, lo = periodic_min(f, scan_points)
        vs.append((hi - lo) / (hi + lo))
    return DualityEstimate(v_port0=vs[0], v_port1=vs[1], v_mean=0.5 * (vs[0] + vs[1]))


def distinguishability(phi_s: float, phi_x: float = 0.0) -> DualityEstimate:
    if not math.isfinite(phi_s):
        raise ValueError("phi_s must be finite")
    du = propagate(InterferometerConfig(phi_x, phi_s, Block.UPPER)).contrast()
    dl = propagate(InterferometerConfig(phi_x, phi_s, Block.LOWER)).contrast()
    return DualityEstimate(d_upper=du, d_lower=dl, d_mean=0.5 * (du + dl))


def duality(phi_s: float, scan_points: int = 64) -> DualityEstimate:
    d = distinguishability(phi_s)
    v = visibility(phi_s, scan_points)
    return DualityEstimate(d.d_upper, d.d_lower, d.d_mean, v.v_port0, v.v_port1, v.v_mean)
