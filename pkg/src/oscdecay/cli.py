"""Command-line front end: analyze, sweep, verify.

Runs are reproducible: a flat key=value config file plus flag overrides
(flags win), a seed for every random start, and floating-point output
printed with 17 significant digits so reruns are byte-identical.

Exit codes: 0 ok, 2 config error, 3 math/phase error, 4 verification failure.
"""
from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .damping import build_damping, build_modified_damping, detect_special_form
from .errors import OscDecayError, PhaseSyntaxError, NonPolynomialInput, UnknownSymbol
from .newton import polyhedron, vertex_reports
from .operators import CutoffSpec, SweepResult, log_spaced, sweep
from .phase import format_phase, parse_phase
from .poly import mixed_hessian
from .puiseux import classify_roots, puiseux_roots, vertex_crosscheck
from .verify import run_suite

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_MATH = 3
EXIT_VERIFY = 4


# --- deterministic serialization ---------------------------------------------


def _fmt_float(v: float) -> str:
    if not math.isfinite(v):
        return "null"
    text = format(v, ".17g")
    return text


def json_text(obj, indent: int = 0) -> str:
    """JSON with floats at 17 significant digits (reproducible output)."""
    pad = " " * indent
    inner = " " * (indent + 2)
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, str):
        escaped = (
            obj.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
        )
        return f'"{escaped}"'
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, Fraction):
        return f'"{obj}"'
    if isinstance(obj, complex):
        return f"[{_fmt_float(obj.real)}, {_fmt_float(obj.imag)}]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = ",\n".join(
            f'{inner}"{k}": {json_text(v, indent + 2)}' for k, v in obj.items()
        )
        return "{\n" + items + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = ",\n".join(f"{inner}{json_text(v, indent + 2)}" for v in obj)
        return "[\n" + items + "\n" + pad + "]"
    if hasattr(obj, "item"):  # numpy scalar
        return json_text(obj.item(), indent)
    raise TypeError(f"cannot serialize {type(obj)!r}")


def sweep_csv_text(result: SweepResult) -> str:
    lines = ["lambda,norm,p,status"]
    for s in result.samples:
        norm = "" if s.norm is None else _fmt_float(s.norm)
        lines.append(f"{_fmt_float(s.lam)},{norm},{_fmt_float(s.p)},{s.status}")
    return "\n".join(lines) + "\n"


# --- configuration -------------------------------------------------------------


_CONFIG_KEYS = {
    "phase": str,
    "vertex": int,
    "p": float,
    "re_z": str,
    "damped": bool,
    "modified_damping": bool,
    "lambda_min": float,
    "lambda_max": float,
    "lambda_count": int,
    "grid_budget": int,
    "cutoff_width": float,
    "profile": str,
    "seed": int,
    "out_dir": str,
    "suite": str,
    "order": str,
    "atom_trials": int,
}

_DEFAULTS = {
    "phase": None,
    "vertex": None,
    "p": 2.0,
    "re_z": None,
    "damped": False,
    "modified_damping": False,
    "lambda_min": 30.0,
    "lambda_max": 3000.0,
    "lambda_count": 12,
    "grid_budget": 4096,
    "cutoff_width": 0.5,
    "profile": "bump",
    "seed": 0,
    "out_dir": ".",
    "suite": "quick",
    "order": None,
    "atom_trials": 50,
}


class ConfigError(Exception):
    pass


def _parse_bool(text: str) -> bool:
    if text.lower() in ("1", "true", "yes", "on"):
        return True
    if text.lower() in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def load_config_file(path: str) -> dict:
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc}")
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip().replace("-", "_")
        val = val.strip()
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        kind = _CONFIG_KEYS[key]
        try:
            if kind is bool:
                values[key] = _parse_bool(val)
            else:
                values[key] = kind(val)
        except (ValueError, ConfigError) as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}")
    return values


@dataclass
class RunConfig:
    phase: str
    vertex: int | None
    p: float
    re_z: str | None
    damped: bool
    modified_damping: bool
    lambda_min: float
    lambda_max: float
    lambda_count: int
    grid_budget: int
    cutoff_width: float
    profile: str
    seed: int
    out_dir: str
    suite: str
    order: str | None
    atom_trials: int

    @property
    def cutoff(self) -> CutoffSpec:
        return CutoffSpec(self.cutoff_width, self.profile)

    @property
    def lam_grid(self) -> list[float]:
        return log_spaced(self.lambda_min, self.lambda_max, self.lambda_count)


def merge_config(args: argparse.Namespace) -> RunConfig:
    values = dict(_DEFAULTS)
    if getattr(args, "config", None):
        values.update(load_config_file(args.config))
    for key in _CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    if not values["phase"]:
        raise ConfigError("no phase given (use --phase or a config file)")
    if values["suite"] not in ("quick", "full"):
        raise ConfigError(f"suite must be quick or full, got {values['suite']!r}")
    if values["profile"] not in ("bump", "box"):
        raise ConfigError(f"profile must be bump or box, got {values['profile']!r}")
    if values["lambda_count"] < 1 or values["lambda_min"] <= 0:
        raise ConfigError("lambda grid must be positive with at least one sample")
    if values["cutoff_width"] <= 0:
        raise ConfigError("cutoff width must be positive")
    return RunConfig(**values)


# --- commands --------------------------------------------------------------------


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    print(f"wrote {path}")


def _error_json(kind: str, exc: Exception) -> str:
    return json_text({"error": kind, "message": str(exc)}) + "\n"


def cmd_analyze(cfg: RunConfig) -> int:
    S = parse_phase(cfg.phase)
    H = mixed_hessian(S)
    reports = vertex_reports(S)  # raises DegeneratePhase for split phases
    order = None if cfg.order is None else Fraction(cfg.order)
    fac = puiseux_roots(H, order)
    tree = classify_roots(fac)
    crosscheck = vertex_crosscheck(H, tree)
    special = detect_special_form(tree, len(tree.groups)) if tree.groups else None
    doc = {
        "phase": format_phase(S),
        "hessian": format_phase(H),
        "phase_polyhedron": [
            {"A": a, "B": b} for a, b in polyhedron(S).vertices
        ],
        "vertices": [{"A": a, "B": b} for a, b in polyhedron(H).vertices],
        "reports": [r.to_json_dict() for r in reports],
        "cluster_tree": tree.to_json_dict(),
        "special_form": None
        if special is None
        else {"root": special[0].to_json_dict(), "power": special[1]},
        "crosscheck": crosscheck.to_json_dict(),
    }
    out = Path(cfg.out_dir) / "analysis.json"
    _write(out, json_text(doc) + "\n")
    return EXIT_OK


def _resolve_damping(cfg: RunConfig, S, reports):
    """Damping factor (or per-lambda factory) selected by the config."""
    if not (cfg.damped or cfg.modified_damping):
        return None
    H = mixed_hessian(S)
    tree = classify_roots(puiseux_roots(H))
    r = cfg.vertex if cfg.vertex is not None else len(tree.groups)
    if not 0 <= r <= len(tree.groups):
        raise ConfigError(f"vertex index {r} outside 0..{len(tree.groups)}")
    report = reports[r]
    if cfg.re_z is not None and cfg.re_z != "auto":
        re_z = float(Fraction(cfg.re_z))
    else:
        if report.damped_re_z is None:
            re_z = 0.0
        else:
            re_z = float(report.damped_re_z)
    if cfg.modified_damping:
        if detect_special_form(tree, max(r, 1)) is None:
            raise OscDecayError(
                "modified damping requires the single-root special form"
            )
        k_outer = int(math.floor(math.log2(cfg.cutoff_width))) - 1
        return lambda lam: build_modified_damping(tree, lam, k_outer, complex(re_z))
    return build_damping(tree, r, complex(re_z))


def cmd_sweep(cfg: RunConfig) -> int:
    S = parse_phase(cfg.phase)
    reports = vertex_reports(S)
    damping = _resolve_damping(cfg, S, reports)
    result = sweep(
        S,
        cfg.cutoff,
        damping,
        cfg.p,
        cfg.lam_grid,
        grid_budget=cfg.grid_budget,
        seed=cfg.seed,
    )
    out_dir = Path(cfg.out_dir)
    _write(out_dir / "sweep.csv", sweep_csv_text(result))
    _write(out_dir / "sweep_fit.json", json_text(result.to_json_dict()) + "\n")
    if result.n_valid < 6:
        print(
            f"only {result.n_valid} valid samples (need 6 for a fit)",
            file=sys.stderr,
        )
        return EXIT_MATH
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    report = run_suite(
        cfg.phase,
        suite=cfg.suite,
        cutoff=cfg.cutoff,
        grid_budget=cfg.grid_budget,
        lambda_max=cfg.lambda_max,
        lambda_count=cfg.lambda_count,
        seed=cfg.seed,
        atom_trials=cfg.atom_trials,
    )
    _write(Path(cfg.out_dir) / "verify.json", json_text(report.to_json_dict()) + "\n")
    print(report.table())
    return EXIT_OK if report.ok else EXIT_VERIFY


# --- entry point -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oscdecay",
        description="Newton-polyhedron decay predictions and numerical "
        "verification for oscillatory integral operators with polynomial phases.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("analyze", cmd_analyze), ("sweep", cmd_sweep), ("verify", cmd_verify)):
        p = sub.add_parser(name)
        p.set_defaults(func=fn)
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--phase", help="phase polynomial, e.g. 'x^3*y + x*y^3'")
        p.add_argument("--vertex", type=int, help="vertex index r")
        p.add_argument("--p", type=float, help="Lebesgue exponent for sweeps")
        p.add_argument("--re-z", dest="re_z", help="damping exponent real part, or 'auto'")
        p.add_argument("--damped", action="store_const", const=True, default=None)
        p.add_argument(
            "--modified-damping",
            dest="modified_damping",
            action="store_const",
            const=True,
            default=None,
        )
        p.add_argument("--lambda-min", dest="lambda_min", type=float)
        p.add_argument("--lambda-max", dest="lambda_max", type=float)
        p.add_argument("--lambda-count", dest="lambda_count", type=int)
        p.add_argument("--grid-budget", dest="grid_budget", type=int)
        p.add_argument("--cutoff-width", dest="cutoff_width", type=float)
        p.add_argument("--profile", choices=("bump", "box"))
        p.add_argument("--seed", type=int)
        p.add_argument("--out-dir", dest="out_dir")
        p.add_argument("--suite", choices=("quick", "full"))
        p.add_argument("--order", help="Puiseux truncation order override, e.g. 7/2")
        p.add_argument("--atom-trials", dest="atom_trials", type=int)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = merge_config(args)
    except ConfigError as exc:
        sys.stderr.write(_error_json("config", exc))
        return EXIT_CONFIG
    try:
        return args.func(cfg)
    except ConfigError as exc:
        sys.stderr.write(_error_json("config", exc))
        return EXIT_CONFIG
    except (PhaseSyntaxError, NonPolynomialInput, UnknownSymbol) as exc:
        sys.stderr.write(_error_json("phase", exc))
        return EXIT_MATH
    except OscDecayError as exc:
        sys.stderr.write(_error_json("math", exc))
        return EXIT_MATH


if __name__ == "__main__":
    sys.exit(main())
