"""Photon-count scan files: parsing, writing, synthesis and D/V estimation.

CSV layout (exact header)::

    phi_x,phi_s,block,counts_d0,counts_d1

``block`` is one of ``none``, ``upper``, ``lower``.  Lines starting with ``#``
are comments; ``# source: <label>`` and ``# mu: <float>`` are read back as
metadata.
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

import numpy as np

from .interferometer import Block, InterferometerConfig, propagate

HEADER = ("phi_x", "phi_s", "block", "counts_d0", "counts_d1")
MIN_SCAN_SETTINGS = 8
MODES = ("extrema", "fit")


class ScanFormatError(ValueError):
    """Malformed scan file; the message names the offending line and field."""


class InsufficientDataError(ValueError):
    """The dataset lacks the groups or counts needed for an estimate."""


@dataclass(frozen=True)
class ScanRecord:
    phi_x: float
    phi_s: float
    block: Block
    counts_d0: int
    counts_d1: int

    def __post_init__(self) -> None:
        if not (math.isfinite(self.phi_x) and math.isfinite(self.phi_s)):
            raise ValueError("phases must be finite")
        if self.counts_d0 < 0 or self.counts_d1 < 0:
            raise ValueError("counts must be non-negative")
        object.__setattr__(self, "block", Block(self.block))


@dataclass(frozen=True)
class ScanDataset:
    records: tuple[ScanRecord, ...]
    source: str = ""
    mu: float | None = None

    def __len__(self) -> int:
        return len(self.records)

    def phi_s_values(self) -> list[float]:
        return sorted({r.phi_s for r in self.records})

    def group(self, phi_s: float, block: Block) -> list[ScanRecord]:
        return [r for r in self.records if r.phi_s == phi_s and r.block is block]

    def __add__(self, other: ScanDataset) -> ScanDataset:
        return ScanDataset(self.records + other.records, self.source or other.source, self.mu)


@dataclass(frozen=True)
class EstimateWithError:
    value: float
    sigma: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.sigma) or self.sigma < 0:
            raise ValueError(f"invalid sigma {self.sigma!r}")


@dataclass(frozen=True)
class DualityMeasurement:
    phi_s: float
    d: EstimateWithError
    v: EstimateWithError
    mode: str
    components: dict = field(default_factory=dict)

    @property
    def s_half(self) -> EstimateWithError:
        return EstimateWithError(self.d.value + self.v.value, math.hypot(self.d.sigma, self.v.sigma))


# ------------------------------------------------------------------ parsing


def _text(source) -> str:
    if isinstance(source, bytes):
        return source.decode("utf-8")
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as fh:
            return fh.read()
    data = source.read()
    return data.decode("utf-8") if isinstance(data, bytes) else data


def parse_scan(source: bytes | str | os.PathLike | IO) -> ScanDataset:
    """Read a scan CSV from bytes, a path or an open (text or binary) stream."""
    text = _text(source)
    meta: dict[str, str] = {}
    rows: list[tuple[int, str]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            key, sep, val = stripped[1:].partition(":")
            if sep:
                meta[key.strip()] = val.strip()
            continue
        rows.append((lineno, line))
    if not rows:
        raise ScanFormatError("empty scan file: no header")

    header_line, header = rows[0]
    cols = tuple(c.strip() for c in next(csv.reader([header])))
    missing = [c for c in HEADER if c not in cols]
    if missing:
        raise ScanFormatError(f"line {header_line}: missing columns {missing}")
    if cols != HEADER:
        raise ScanFormatError(f"line {header_line}: header must be exactly {','.join(HEADER)}")

    records = []
    for lineno, line in rows[1:]:
        fields = next(csv.reader([line]))
        if len(fields) != len(HEADER):
            raise ScanFormatError(f"line {lineno}: expected {len(HEADER)} fields, got {len(fields)}")
        values = dict(zip(HEADER, (f.strip() for f in fields)))
        records.append(_parse_row(lineno, values))

    mu = None
    if "mu" in meta:
        try:
            mu = float(meta["mu"])
        except ValueError:
            raise ScanFormatError(f"unparseable mu metadata {meta['mu']!r}") from None
    return ScanDataset(tuple(records), meta.get("source", ""), mu)


def _parse_row(lineno: int, values: dict[str, str]) -> ScanRecord:
    parsed = {}
    for name in ("phi_x", "phi_s"):
        try:
            x = float(values[name])
        except ValueError:
            raise ScanFormatError(f"line {lineno}, field {name}: not a number: {values[name]!r}") from None
        if not math.isfinite(x):
            raise ScanFormatError(f"line {lineno}, field {name}: non-finite phase {values[name]!r}")
        parsed[name] = x
    try:
        parsed["block"] = Block(values["block"].lower())
    except ValueError:
        raise ScanFormatError(
            f"line {lineno}, field block: {values['block']!r} not in none/upper/lower"
        ) from None
    for name in ("counts_d0", "counts_d1"):
        try:
            n = int(values[name])
        except ValueError:
            raise ScanFormatError(f"line {lineno}, field {name}: not an integer: {values[name]!r}") from None
        if n < 0:
            raise ScanFormatError(f"line {lineno}, field {name}: negative count {n}")
        parsed[name] = n
    return ScanRecord(**parsed)


def format_scan(ds: ScanDataset) -> str:
    buf = io.StringIO()
    if ds.source:
        buf.write(f"# source: {ds.source}\n")
    if ds.mu is not None:
        buf.write(f"# mu: {ds.mu!r}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADER)
    for r in ds.records:
        w.writerow([repr(r.phi_x), repr(r.phi_s), r.block.value, r.counts_d0, r.counts_d1])
    return buf.getvalue()


def write_scan(ds: ScanDataset, dest: str | os.PathLike | IO) -> None:
    text = format_scan(ds)
    if isinstance(dest, (str, os.PathLike)):
        with open(dest, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        dest.write(text)


# ------------------------------------------------------------------ synthesis


def default_grid(points: int = 64) -> list[float]:
    return [2 * math.pi * i / points for i in range(points)]


def synthesize_counts(
    phi_s: float,
    phi_x_grid: Sequence[float] | None = None,
    mean_total: float = 1e4,
    seed: int = 0,
    blocks: Iterable[Block] = (Block.NONE, Block.UPPER, Block.LOWER),
    mu: float | None = None,
) -> ScanDataset:
    """Poisson counts with means ``mean_total * p_j`` from the interferometer model.

    Blocked settings use the unnormalized blocked probabilities, so they carry
    half the flux of open settings.
    """
    if not mean_total > 0:
        raise ValueError(f"mean_total must be positive, got {mean_total}")
    grid = default_grid() if phi_x_grid is None else list(phi_x_grid)
    if not grid:
        raise ValueError("phi_x grid is empty")
    rng = np.random.default_rng(seed)
    records = []
    for block in blocks:
        block = Block(block)
        for px in grid:
            p = propagate(InterferometerConfig(px, phi_s, block))
            c0, c1 = rng.poisson([mean_total * p.p0, mean_total * p.p1])
            records.append(ScanRecord(float(px), float(phi_s), block, int(c0), int(c1)))
    return ScanDataset(tuple(records), source=f"synthetic seed={seed}", mu=mu)


# ------------------------------------------------------------------ estimation


def ratio_with_error(a: float, b: float) -> EstimateWithError:
    """``(a - b)/(a + b)`` for independent Poisson counts, first-order error."""
    a, b = float(a), float(b)
    total = a + b
    if total <= 0:
        raise InsufficientDataError("zero total counts in a setting used for estimation")
    return EstimateWithError((a - b) / total, 2 * math.sqrt(a * b * total) / total**2)


def _mean(parts: Sequence[EstimateWithError]) -> EstimateWithError:
    k = len(parts)
    return EstimateWithError(
        sum(p.value for p in parts) / k,
        math.sqrt(sum(p.sigma**2 for p in parts)) / k,
    )


def _fringe_fit(phi_x: np.ndarray, counts: np.ndarray) -> EstimateWithError:
    # counts ~ A + B sin + C cos, Poisson-weighted least squares
    X = np.column_stack([np.ones_like(phi_x), np.sin(phi_x), np.cos(phi_x)])
    w = 1.0 / np.maximum(counts, 1.0)
    cov = np.linalg.inv(X.T @ (X * w[:, None]))
    a, b, c = cov @ (X.T @ (w * counts))
    if a <= 0:
        raise InsufficientDataError("fitted fringe offset is not positive")
    r = math.hypot(b, c)
    if r == 0.0:
        return EstimateWithError(0.0, float(math.sqrt(cov[1, 1] + cov[2, 2]) / a))
    jac = np.array([-r / a**2, b / (r * a), c / (r * a)])
    return EstimateWithError(float(r / a), float(math.sqrt(jac @ cov @ jac)))


def _visibility(records: list[ScanRecord], mode: str) -> tuple[EstimateWithError, EstimateWithError]:
    if len({r.phi_x for r in records}) < MIN_SCAN_SETTINGS:
        raise InsufficientDataError(
            f"visibility needs >= {MIN_SCAN_SETTINGS} distinct phi_x settings, got {len({r.phi_x for r in records})}"
        )
    phi = np.array([r.phi_x for r in records])
    out = []
    for port in ("counts_d0", "counts_d1"):
        counts = np.array([getattr(r, port) for r in records], dtype=float)
        if mode == "extrema":
            out.append(ratio_with_error(counts.max(), counts.min()))
        else:
            out.append(_fringe_fit(phi, counts))
    return out[0], out[1]


def _distinguishability(records: list[ScanRecord]) -> EstimateWithError:
    a = sum(r.counts_d0 for r in records)
    b = sum(r.counts_d1 for r in records)
    r = ratio_with_error(a, b)
    return EstimateWithError(abs(r.value), r.sigma)


def estimate_duality(ds: ScanDataset, phi_s: float | None = None, mode: str = "extrema") -> DualityMeasurement:
    """D and V with Poisson errors for one phi_s group of ``ds``.

    ``mode="extrema"`` takes the max/min-count settings of the open scan;
    ``mode="fit"`` fits a sinusoid to each port instead.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    values = ds.phi_s_values()
    if phi_s is None:
        if len(values) != 1:
            raise InsufficientDataError(f"dataset holds {len(values)} phi_s groups; pick one")
        phi_s = values[0]
    groups = {b: ds.group(phi_s, b) for b in Block}
    for b in Block:
        if not groups[b]:
            raise InsufficientDataError(f"no '{b.value}' records for phi_s = {phi_s!r}")
    v0, v1 = _visibility(groups[Block.NONE], mode)
    du = _distinguishability(groups[Block.UPPER])
    dl = _distinguishability(groups[Block.LOWER])
    return DualityMeasurement(
        phi_s,
        _mean([du, dl]),
        _mean([v0, v1]),
        mode,
        {"d_upper": du, "d_lower": dl, "v_port0": v0, "v_port1": v1},
    )


def estimate_all(ds: ScanDataset, mode: str = "extrema") -> list[DualityMeasurement]:
    if not ds.records:
        raise InsufficientDataError("dataset is empty")
    return [estimate_duality(ds, ps, mode) for ps in ds.phi_s_values()]

