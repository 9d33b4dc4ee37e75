"""Command-line front end.

Subcommands ingest tuples, symbols, and unitaries from JSON, run the
classification, defect, dilation, characteristic-function, and model
pipelines, and emit machine-readable reports.  With a fixed seed the
JSON output is byte-identical across runs except for the provenance
timestamp block.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import platform
import sys
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .battery import run_battery
from .charfn import (
    build_charfn,
    coincidence_from_unitary,
    default_points,
    inner_residual,
    torus_grid,
)
from .defects import build_defects
from .dilation import (
    build_dilation,
    image_invariance_defect,
    intertwining_defect,
    isometry_defect,
    minimality_defect,
    model_equivalence_defect,
)
from .errors import (
    NotBeurling,
    NotSzego,
    NotUnitary,
    ParseError,
    PolydiscError,
    ShapeMismatch,
    SymbolNotInner,
)
from .hardy import (
    ahern_clark_growth,
    build_space,
    quotient_model,
    structural_checks,
    symbol_from_json,
)
from .linalg import DEFAULT_TOL, Tolerances, spec_norm
from .tuples import classify, is_beurling, tuple_from_json


@dataclass(frozen=True)
class RunConfig:
    """Resolved knobs shared by the subcommands."""

    tolerances: Tolerances
    truncation_degree: int | None
    grid_per_axis: int
    seed: int
    window_margin: int
    output_path: str | None
    out_format: str


def _positive_int(minimum: int, what: str):
    def parse(text: str) -> int:
        value = int(text)
        if value < minimum:
            raise argparse.ArgumentTypeError(f"{what} must be >= {minimum}")
        return value

    return parse


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polydisc",
        description="Commuting contraction tuples on the polydisc: "
        "classification, defects, dilations, characteristic functions.",
    )
    parser.add_argument("--version", action="version", version=f"polydisc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, tuple_file=False, symbol_file=False):
        if tuple_file:
            p.add_argument("tuple_file", help="tuple JSON file")
        if symbol_file:
            p.add_argument("symbol_file", help="inner-symbol JSON file")
        p.add_argument("--tol", type=float, default=None,
                       help="override the structural tolerance")
        p.add_argument("--degree", type=_positive_int(1, "--degree"), default=None,
                       help="truncation degree N")
        p.add_argument("--grid", type=_positive_int(4, "--grid"), default=32,
                       help="torus grid points per axis")
        p.add_argument("--seed", type=int, default=42, help="seed for sampled points")
        p.add_argument("--window", type=_positive_int(0, "--window"), default=None,
                       help="window margin; also enables the tuple file's window mask")
        p.add_argument("--out", default=None, help="write the report to this path")
        p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("classify", help="classification flags and witnesses")
    common(p, tuple_file=True)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("charfn", help="characteristic function evaluation")
    common(p, tuple_file=True)
    p.add_argument("points_file", nargs="?", default=None,
                   help="evaluation request JSON with points and grid")
    p.set_defaults(func=cmd_charfn)

    p = sub.add_parser("hardy", help="quotient model structural report")
    common(p, symbol_file=True)
    p.set_defaults(func=cmd_hardy)

    p = sub.add_parser("dilate", help="dilation defect report")
    common(p, tuple_file=True)
    p.set_defaults(func=cmd_dilate)

    p = sub.add_parser("coincide", help="coincidence under a unitary conjugation")
    common(p, tuple_file=True)
    p.add_argument("unitary_file", help="JSON file with a 'matrix' field")
    p.set_defaults(func=cmd_coincide)

    p = sub.add_parser("suite", help="run the full acceptance battery")
    common(p)
    p.set_defaults(func=cmd_suite)
    return parser


def _config(args) -> RunConfig:
    tol = DEFAULT_TOL if args.tol is None else Tolerances(tol_structural=args.tol)
    return RunConfig(
        tolerances=tol,
        truncation_degree=args.degree,
        grid_per_axis=args.grid,
        seed=args.seed,
        window_margin=0 if args.window is None else args.window,
        output_path=args.out,
        out_format=args.format,
    )


# ---------------------------------------------------------------------------
# Serialization helpers


def _jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return _jsonable(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if np.isfinite(value) else repr(value)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def _mat_json(m) -> list:
    m = np.atleast_2d(np.asarray(m, dtype=np.complex128))
    return [[[float(v.real), float(v.imag)] for v in row] for row in m]


def _load_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc


def _provenance(command: str, cfg: RunConfig, started: float) -> dict:
    return {
        "command": command,
        "config": {
            "tol_structural": cfg.tolerances.tol_structural,
            "tol_rank": cfg.tolerances.tol_rank,
            "truncation_degree": cfg.truncation_degree,
            "grid_per_axis": cfg.grid_per_axis,
            "seed": cfg.seed,
            "window_margin": cfg.window_margin,
            "format": cfg.out_format,
        },
        "versions": {
            "polydisc": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
        },
        "timestamp": {
            "utc": datetime.now(timezone.utc).isoformat(),
            "wall_seconds": time.monotonic() - started,
        },
    }


def _csv_rows(report: dict) -> list[str]:
    """Flatten residual tables: header check,value,threshold,pass."""
    lines = ["check,value,threshold,pass"]
    suite = report.get("suite")
    if suite is not None:
        for c in suite["checks"]:
            lines.append(f"{c['name']},{c['value']!r},{c['threshold']!r},{str(c['passed']).lower()}")
        return lines

    def walk(prefix: str, node):
        if isinstance(node, dict):
            for k in sorted(node):
                if k == "provenance":
                    continue
                walk(f"{prefix}.{k}" if prefix else k, node[k])
        elif isinstance(node, bool):
            lines.append(f"{prefix},,,{str(node).lower()}")
        elif isinstance(node, (int, float)):
            lines.append(f"{prefix},{node!r},,")

    walk("", report)
    return lines


def _emit(report: dict, cfg: RunConfig) -> None:
    if cfg.out_format == "csv":
        text = "\n".join(_csv_rows(report)) + "\n"
    else:
        text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if cfg.output_path:
        Path(cfg.output_path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# Subcommands


def cmd_classify(args) -> int:
    cfg = _config(args)
    started = time.monotonic()
    t, window = tuple_from_json(_load_json(args.tuple_file), cfg.tolerances)
    mask = window if args.window is not None else None
    report = {
        "classification": _jsonable(classify(t, mask)),
        "provenance": _provenance("classify", cfg, started),
    }
    _emit(report, cfg)
    return 0


def _file_mask(args, window) -> np.ndarray | None:
    if args.window is None:
        return None
    if window is None:
        raise ParseError("--window was given but the tuple file has no 'window' field")
    return window


def cmd_charfn(args) -> int:
    cfg = _config(args)
    started = time.monotonic()
    t, window = tuple_from_json(_load_json(args.tuple_file), cfg.tolerances)
    mask = _file_mask(args, window)
    verdict = is_beurling(t, mask)
    if not (verdict.holds and verdict.szego_ok):
        raise NotBeurling(
            "tuple is not Beurling"
            f" (worst pair {verdict.worst_pair}, defect overlap {verdict.residual:.3e})"
        )
    f = build_charfn(t, build_defects(t, mask))

    points = []
    grid_pa = cfg.grid_per_axis
    if args.points_file is not None:
        req = _load_json(args.points_file)
        if not isinstance(req, dict):
            raise ParseError("points file must be a JSON object")
        if "grid" in req:
            grid_pa = int(req["grid"].get("per_axis", grid_pa))
        for raw in req.get("points", []):
            arr = np.asarray(raw, dtype=float)
            if arr.shape != (t.n, 2):
                raise ParseError(f"each point needs {t.n} coordinates as [re, im]")
            points.append(arr[:, 0] + 1j * arr[:, 1])

    inner = inner_residual(f, torus_grid(t.n, grid_pa))
    sampled = default_points(t.n, seed=cfg.seed)
    max_norm = max(spec_norm(f.eval(w)) for w in list(sampled) + points)
    report = {
        "charfn_summary": {
            "n": t.n,
            "dim": t.dim,
            "input_dim": f.input_dim,
            "output_dim": f.output_dim,
            "windowed": mask is not None,
            "grid_per_axis": grid_pa,
            "inner_residual": inner,
            "max_sampled_norm": max_norm,
            "points": [
                {"w": [[float(c.real), float(c.imag)] for c in w], "matrix": _mat_json(f.eval(w))}
                for w in points
            ],
        },
        "provenance": _provenance("charfn", cfg, started),
    }
    _emit(report, cfg)
    return 0


def cmd_hardy(args) -> int:
    cfg = _config(args)
    started = time.monotonic()
    sym = symbol_from_json(_load_json(args.symbol_file))
    degree = cfg.truncation_degree or 6
    margin = max(cfg.window_margin, 1)
    space = build_space(sym.n, degree, sym.input_dim)
    model = quotient_model(space, sym, cfg.tolerances, cfg.grid_per_axis, margin)
    rep = structural_checks(model, cfg.tolerances)
    degrees = list(range(2, max(degree, 6) + 1))
    growth = ahern_clark_growth(sym, degrees)
    report = {
        "structural_checks": {
            "residuals": _jsonable(rep.residuals),
            "dims": _jsonable(rep.dims),
            "threshold": rep.threshold,
            "passed": rep.passed,
        },
        "model": {
            "degree": degree,
            "quotient_dim": model.quotient_dim,
            "space_dim": space.dim,
            "tail_bound": _jsonable(model.tail_bound),
            "reach": _jsonable(model.reach),
        },
        "growth": {"degrees": degrees, "quotient_dims": growth},
        "provenance": _provenance("hardy", cfg, started),
    }
    _emit(report, cfg)
    return 0


def cmd_dilate(args) -> int:
    cfg = _config(args)
    started = time.monotonic()
    t, _ = tuple_from_json(_load_json(args.tuple_file), cfg.tolerances)
    d = build_dilation(t, cfg.truncation_degree)
    report = {
        "dilation_defects": {
            "degree": d.degree,
            "coeff_rank": d.coeff_basis.dim,
            "space_dim": d.space.dim,
            "tail_bound": _jsonable(d.tail_bound),
            "isometry": isometry_defect(d),
            "intertwining": intertwining_defect(d),
            "minimality": minimality_defect(d),
            "model_equivalence": model_equivalence_defect(d),
            "image_invariance": image_invariance_defect(d),
        },
        "provenance": _provenance("dilate", cfg, started),
    }
    _emit(report, cfg)
    return 0


def cmd_coincide(args) -> int:
    cfg = _config(args)
    started = time.monotonic()
    t, window = tuple_from_json(_load_json(args.tuple_file), cfg.tolerances)
    obj = _load_json(args.unitary_file)
    if not isinstance(obj, dict) or "matrix" not in obj:
        raise ParseError("unitary file must be an object with a 'matrix' field")
    arr = np.asarray(obj["matrix"], dtype=float)
    if arr.ndim != 3 or arr.shape[0] != arr.shape[1] or arr.shape[2] != 2:
        raise ParseError("unitary 'matrix' must be square with [re, im] entries")
    sigma = arr[..., 0] + 1j * arr[..., 1]
    mask = _file_mask(args, window)
    pts = default_points(t.n, seed=cfg.seed)
    s, co = coincidence_from_unitary(t, sigma, mask=mask, points=pts)
    report = {
        "coincidence": {
            "residual": co.residual,
            "input_dim": co.tau.shape[0],
            "output_dim": co.tau_star.shape[0],
            "tau": _mat_json(co.tau),
            "tau_star": _mat_json(co.tau_star),
        },
        "provenance": _provenance("coincide", cfg, started),
    }
    _emit(report, cfg)
    return 0


def cmd_suite(args) -> int:
    cfg = _config(args)
    started = time.monotonic()
    checks = run_battery(cfg.seed)
    all_passed = all(c.passed for c in checks)
    report = {
        "suite": {
            "seed": cfg.seed,
            "checks": [_jsonable(c) for c in checks],
            "all_passed": all_passed,
        },
        "provenance": _provenance("suite", cfg, started),
    }
    _emit(report, cfg)
    return 0 if all_passed else 1


_GATES: dict[str, tuple[tuple[type, int], ...]] = {
    "charfn": ((NotBeurling, 3), (NotSzego, 3)),
    "hardy": ((SymbolNotInner, 4), (NotUnitary, 4)),
    "coincide": ((NotUnitary, 5), (ShapeMismatch, 5)),
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PolydiscError as exc:
        for klass, code in _GATES.get(args.command, ()):
            if isinstance(exc, klass):
                print(f"polydisc {args.command}: {exc}", file=sys.stderr)
                return code
        print(f"polydisc {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
