"""Batch command-line front end.

Every command writes its result to ``--out`` (or stdout) and a run manifest
to ``<out>.manifest.json`` (or stderr).

Exit codes: 0 success, 1 usage error, 2 data/validation error,
3 certification failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from typing import Any, Sequence

from . import __version__
from . import bounds, dataio, interferometer, witness

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_CERT = 0, 1, 2, 3
QUANTUM_CAP_TOL = 1e-9
QUANTUM_CONV_TOL = 1e-6


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ------------------------------------------------------------------ output


def _csv(rows: list[dict[str, Any]]) -> str:
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: _cell(v) for k, v in row.items()})
    return buf.getvalue()


def _cell(v: Any) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else str(v)


def _json(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def _emit(args: argparse.Namespace, text: str, params: dict[str, Any]) -> None:
    manifest = {
        "command": args.command,
        "parameters": params,
        "seed": params.get("seed"),
        "version": __version__,
        "output_sha256": hashlib.sha256(text.encode("utf-8")).hexdigest(),
    }
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        with open(f"{args.out}.manifest.json", "w", encoding="utf-8") as fh:
            fh.write(_json(manifest))
    else:
        sys.stdout.write(text)
        sys.stderr.write(_json(manifest))


def _render(args: argparse.Namespace, payload: Any, rows: list[dict[str, Any]] | None = None) -> str:
    if args.format == "csv":
        return _csv(rows if rows is not None else [payload])
    return _json(payload)


# ------------------------------------------------------------------ commands


def scan_rows(phi_s_min: float, phi_s_max: float, steps: int, scan_points: int = 64) -> list[dict[str, Any]]:
    if steps < 2:
        raise UsageError("--steps must be >= 2")
    if not (math.isfinite(phi_s_min) and math.isfinite(phi_s_max)) or phi_s_max < phi_s_min:
        raise UsageError("invalid phi_s range")
    rows = []
    for i in range(steps):
        phi_s = phi_s_min + (phi_s_max - phi_s_min) * i / (steps - 1)
        est = interferometer.duality(phi_s, scan_points)
        rows.append({
            "phi_s": phi_s,
            "D": est.d_mean,
            "V": est.v_mean,
            "S_half": est.d_mean + est.v_mean,
            "classical_bound": 1.0,
            "security_original": bounds.dv_threshold(bounds.PB_THRESHOLD_ORIGINAL),
            "security_improved": bounds.dv_threshold(bounds.PB_THRESHOLD_IMPROVED),
        })
    return rows


def cmd_scan(args: argparse.Namespace) -> int:
    rows = scan_rows(args.phi_s_min, args.phi_s_max, args.steps)
    text = _csv(rows) if args.format == "csv" else _json(rows)
    _emit(args, text, {"phi_s_min": args.phi_s_min, "phi_s_max": args.phi_s_max, "steps": args.steps})
    return EXIT_OK


def _strategy_dict(s: bounds.ClassicalStrategy) -> dict[str, Any]:
    return {
        "encoder": {f"{a0}{a1}": m for (a0, a1), m in s.encoder.items()},
        "decoder": {f"m={m},y={y}": b for (m, y), b in s.decoder.items()},
    }


def cmd_verify_classical(args: argparse.Namespace) -> int:
    res = bounds.classical_maximum()
    certified = res.value == bounds.CLASSICAL_MAX
    payload = {
        "max_S": res.value,
        "classical_bound": bounds.CLASSICAL_MAX,
        "strategy_count": res.count,
        "argmax_strategy": _strategy_dict(res.argmax),
        "certified": certified,
    }
    flat = {k: v for k, v in payload.items() if k != "argmax_strategy"}
    _emit(args, _render(args, payload, [flat]), {})
    return EXIT_OK if certified else EXIT_CERT


def cmd_optimize_quantum(args: argparse.Namespace) -> int:
    res = bounds.quantum_maximum(args.seed, args.restarts)
    cap_ok = all(v <= bounds.QUANTUM_MAX + QUANTUM_CAP_TOL for v in res.restart_values)
    converged = abs(res.value - bounds.QUANTUM_MAX) <= QUANTUM_CONV_TOL
    payload = {
        "value": res.value,
        "target": bounds.QUANTUM_MAX,
        "p_b": witness.bob_success(res.value),
        "restarts": args.restarts,
        "restart_values": res.restart_values,
        "trace_length": len(res.trace),
        "ansatz": {
            "preparations": res.ansatz.preparations.tolist(),
            "measurements": res.ansatz.measurements.tolist(),
        },
        "certified": cap_ok and converged,
    }
    flat = {k: payload[k] for k in ("value", "target", "p_b", "restarts", "trace_length", "certified")}
    _emit(args, _render(args, payload, [flat]), {"seed": args.seed, "restarts": args.restarts})
    return EXIT_OK if payload["certified"] else EXIT_CERT


def cmd_bounds(args: argparse.Namespace) -> int:
    has_pb = args.pb is not None
    has_dv = args.d is not None or args.v is not None
    if has_pb == has_dv:
        raise UsageError("give exactly one of --pb or (--d and --v)")
    if has_dv:
        if args.d is None or args.v is None:
            raise UsageError("--d and --v must be given together")
        p_b = bounds.pb_from_dv(args.d, args.v)
        params = {"d": args.d, "v": args.v}
    else:
        p_b = args.pb
        params = {"pb": args.pb}
    verdict = bounds.security_verdict(p_b).as_dict()
    _emit(args, _render(args, verdict), params)
    return EXIT_OK


def cmd_witness(args: argparse.Namespace) -> int:
    prep = witness.bb84_preparations()
    if args.phi_x is None:
        rep = witness.duality_witness_max(prep, args.phi_s)
        phi_x, s = rep.phi_x_star, rep.s_value
    else:
        phi_x = args.phi_x
        s = witness.witness_at(prep, args.phi_s, phi_x)
    table = witness.correlator_table(prep, witness.tunable_measurements(args.phi_s, phi_x))
    payload = {
        "phi_s": args.phi_s,
        "phi_x": phi_x,
        "maximized": args.phi_x is None,
        "S": s,
        "P_B": witness.bob_success(s),
        **{f"E{a0}{a1}_{y}": table[a0, a1, y] for a0, a1, y in witness.KEYS},
    }
    _emit(args, _render(args, payload), {"phi_s": args.phi_s, "phi_x": args.phi_x})
    return EXIT_OK


def analyze_rows(ds: dataio.ScanDataset, mode: str) -> list[dict[str, Any]]:
    rows = []
    for m in dataio.estimate_all(ds, mode):
        s_half = m.s_half
        p_b = min(max(bounds.pb_from_dv(max(m.d.value, 0.0), max(m.v.value, 0.0)), 0.0), 1.0)
        verdict = bounds.security_verdict(p_b)
        rows.append({
            "phi_s": m.phi_s,
            "D": m.d.value,
            "D_sigma": m.d.sigma,
            "V": m.v.value,
            "V_sigma": m.v.sigma,
            "S_half": s_half.value,
            "S_half_sigma": s_half.sigma,
            "P_B": p_b,
            "violates_classical": s_half.value > 1.0,
            "secure_original": verdict.secure_original,
            "secure_improved": verdict.secure_improved,
            "mode": m.mode,
        })
    return rows


def cmd_analyze(args: argparse.Namespace) -> int:
    with open(args.file, "rb") as fh:
        raw = fh.read()
    ds = dataio.parse_scan(raw)
    rows = analyze_rows(ds, args.mode)
    if args.format == "csv":
        text = _csv(rows)
    else:
        text = _json({"source": ds.source, "mu": ds.mu, "records": len(ds), "estimates": rows})
    _emit(args, text, {
        "file": args.file,
        "input_sha256": hashlib.sha256(raw).hexdigest(),
        "mode": args.mode,
    })
    return EXIT_OK


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sdiwitness", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp: argparse.ArgumentParser, fmt: str) -> None:
        sp.add_argument("--out", default=None, help="output file (default: stdout)")
        sp.add_argument("--format", choices=("csv", "json"), default=fmt)

    s = sub.add_parser("scan", help="D, V and D+V over a phi_s range (plot-ready)")
    s.add_argument("--phi-s-min", type=float, default=0.0)
    s.add_argument("--phi-s-max", type=float, default=math.pi / 2)
    s.add_argument("--steps", type=int, default=91)
    common(s, "csv")
    s.set_defaults(func=cmd_scan)

    s = sub.add_parser("verify-classical", help="enumerate all deterministic one-bit strategies")
    common(s, "json")
    s.set_defaults(func=cmd_verify_classical)

    s = sub.add_parser("optimize-quantum", help="see-saw search for the qubit maximum")
    s.add_argument("--seed", type=int, default=42)
    s.add_argument("--restarts", type=int, default=20)
    common(s, "json")
    s.set_defaults(func=cmd_optimize_quantum)

    s = sub.add_parser("bounds", help="security verdict from P_B or from (D, V)")
    s.add_argument("--pb", type=float, default=None)
    s.add_argument("--d", type=float, default=None)
    s.add_argument("--v", type=float, default=None)
    common(s, "json")
    s.set_defaults(func=cmd_bounds)

    s = sub.add_parser("analyze", help="estimate D, V with Poisson errors from a scan CSV")
    s.add_argument("file")
    s.add_argument("--mode", choices=dataio.MODES, default="extrema")
    common(s, "json")
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("witness", help="S and P_B at (phi_s, phi_x); maximizes phi_x if omitted")
    s.add_argument("--phi-s", type=float, required=True)
    s.add_argument("--phi-x", type=float, default=None)
    common(s, "json")
    s.set_defaults(func=cmd_witness)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"sdiwitness {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as exc:
        print(f"sdiwitness {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
