"""Command-line entry point and figure-ready serialization.

    ssatlas <command> [flags]
    ssatlas --config FILE [--output PATH] [--format json|csv]

Every run produces a result envelope (config echo, version, wall time,
payload, warnings).  JSON output writes the whole envelope with keys in a
fixed order and floats rounded to 15 significant digits.  CSV output writes
the payload as a single table; record-list payloads get a leading ``kind``
column.

Exit codes: 0 success, 2 usage error, 3 numerical failure, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import io
import json
import logging
import math
import os
import re
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Callable, Sequence

import numpy as np

from . import __version__
from .atlas import (
    SSRoot,
    Window,
    count_ss,
    cross_validate_transition,
    find_ss,
    trace_gc_curve,
)
from .eigensolver import GridSpec, classify_states, compute_spectrum, summarize
from .errors import NumericalError
from .potential import PotentialParams, exact_bound_state, schrodinger_residual
from .scattering import scattering_sweep

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4

COMMANDS = (
    "spectrum-sweep",
    "scattering-sweep",
    "ss-find",
    "ss-atlas",
    "trace-gc",
    "verify-exact",
    "cross-validate",
)

# decimal literal, period separator only
_NUMBER = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")


class UsageError(ValueError):
    """Invalid command line or configuration."""


def _real(text: str) -> float:
    if not _NUMBER.match(text.strip()):
        raise argparse.ArgumentTypeError(f"malformed number {text!r}")
    return float(text)


def _count(text: str) -> int:
    if not re.match(r"^\+?\d+$", text.strip()):
        raise argparse.ArgumentTypeError(f"malformed integer {text!r}")
    return int(text)


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce one run.  Unused fields stay None."""

    command: str
    A: float | None = None
    g: float | None = None
    k: float | None = None
    axis: str | None = None
    g_lo: float | None = None
    g_hi: float | None = None
    g_step: float | None = None
    k_lo: float | None = None
    k_hi: float | None = None
    n_samples: int | None = None
    A_lo: float | None = None
    A_hi: float | None = None
    A_step: float | None = None
    g0: float | None = None
    k0: float | None = None
    tol: float | None = None
    max_iter: int | None = None
    coarse_n: int | None = None
    warm_start: bool | None = None
    diagnostics: bool | None = None
    half_width: float = 25.0
    n_points: int = 2001
    boundary: str | None = None
    exterior_width: float = 10.0
    scaling_angle: float = 0.5
    L: float = 25.0
    rel_tol: float = 1e-10
    threads: int = 1
    output: str | None = None
    format: str = "json"

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "RunConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        try:
            cfg = cls(**d)
        except TypeError as exc:
            raise UsageError(str(exc)) from exc
        return normalize(cfg)

    def grid(self) -> GridSpec:
        return GridSpec(
            half_width=self.half_width,
            n_points=self.n_points,
            boundary=self.boundary or "dirichlet",
            exterior_width=self.exterior_width,
            scaling_angle=self.scaling_angle,
        )

    def A_values(self) -> list[float]:
        if self.A is not None:
            return [self.A]
        return _arange(self.A_lo, self.A_hi, self.A_step)


@dataclass
class ResultEnvelope:
    config: RunConfig
    version: str
    wall_time: float
    payload: dict[str, Any]
    warnings: list[str] = field(default_factory=list)


def _arange(lo: float, hi: float, step: float) -> list[float]:
    # inclusive of hi up to rounding; values rounded to 12 decimals so that
    # the echo of e.g. 0.1 + 3 * 0.05 is stable
    n = int(math.floor((hi - lo) / step + 1e-9))
    return [round(lo + i * step, 12) for i in range(n + 1)]


# -- parsing ----------------------------------------------------------------


def _add_grid(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("finite-difference grid")
    g.add_argument("--half-width", type=_real, default=25.0, help="box half width L (default 25)")
    g.add_argument("--n-points", type=_count, default=2001, help="grid nodes (default 2001)")
    g.add_argument("--boundary", choices=("dirichlet", "scaled"), default=None)
    g.add_argument("--exterior-width", type=_real, default=10.0)
    g.add_argument("--scaling-angle", type=_real, default=0.5)


def _add_scattering(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("integration")
    g.add_argument("--L", type=_real, default=25.0, help="integration half width (default 25)")
    g.add_argument("--rel-tol", type=_real, default=1e-10, help="integrator rtol (default 1e-10)")


def _add_output(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("output")
    g.add_argument("--output", "-o", default=None, help="output path (default stdout)")
    g.add_argument("--format", choices=("json", "csv"), default="json")
    g.add_argument("--threads", type=_count, default=1, help="worker processes, 0 = auto")


def _add_A_range(p: argparse.ArgumentParser, single: bool) -> None:
    if single:
        p.add_argument("--A", type=_real, default=None, help="amplitude A")
    p.add_argument("--A-lo", type=_real, default=None)
    p.add_argument("--A-hi", type=_real, default=None)
    p.add_argument("--A-step", type=_real, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ssatlas", description=__doc__.split("\n")[0])
    parser.add_argument("--config", default=None, help="JSON run configuration")
    parser.add_argument("--output", dest="config_output", default=None, help="with --config: output path")
    parser.add_argument("--format", dest="config_format", choices=("json", "csv"), default=None, help="with --config: format")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("spectrum-sweep", help="pair and bound-state summary versus g")
    p.add_argument("--A", type=_real, required=True)
    p.add_argument("--g-lo", type=_real, required=True)
    p.add_argument("--g-hi", type=_real, required=True)
    p.add_argument("--g-step", type=_real, default=0.01)
    _add_grid(p)
    _add_output(p)

    p = sub.add_parser("scattering-sweep", help="T, R_left, R_right along g or k")
    p.add_argument("--A", type=_real, required=True)
    p.add_argument("--axis", choices=("g", "k"), default=None, help="swept variable (inferred)")
    p.add_argument("--g", type=_real, default=None, help="fixed coupling (k sweep)")
    p.add_argument("--k", type=_real, default=None, help="fixed wave number (g sweep)")
    p.add_argument("--g-lo", type=_real, default=None)
    p.add_argument("--g-hi", type=_real, default=None)
    p.add_argument("--k-lo", type=_real, default=None)
    p.add_argument("--k-hi", type=_real, default=None)
    p.add_argument("--n-samples", type=_count, default=201)
    _add_scattering(p)
    _add_output(p)

    p = sub.add_parser("ss-find", help="Newton search for one singularity")
    p.add_argument("--A", type=_real, required=True)
    p.add_argument("--g0", type=_real, required=True)
    p.add_argument("--k0", type=_real, required=True)
    p.add_argument("--tol", type=_real, default=1e-9)
    p.add_argument("--max-iter", type=_count, default=50)
    _add_output(p)

    p = sub.add_parser("ss-atlas", help="all singularities and staircase count per A")
    _add_A_range(p, single=True)
    p.add_argument("--coarse-n", type=_count, default=24)
    p.add_argument("--diagnostics", action="store_true", default=False)
    _add_output(p)

    p = sub.add_parser("trace-gc", help="singularity couplings g*(A)")
    _add_A_range(p, single=False)
    p.add_argument("--coarse-n", type=_count, default=24)
    p.add_argument("--no-warm-start", dest="warm_start", action="store_false", default=True)
    _add_output(p)

    p = sub.add_parser("verify-exact", help="check the closed-form bound state")
    p.add_argument("--g", type=_real, default=-1.0 / (2.0 * math.sqrt(3.0)))
    _add_grid(p)
    _add_output(p)

    p = sub.add_parser("cross-validate", help="singularity versus first bifurcation")
    p.add_argument("--A", type=_real, required=True)
    _add_grid(p)
    _add_output(p)
    return parser


_DEFAULT_BOUNDARY = {
    "spectrum-sweep": "scaled",
    "verify-exact": "dirichlet",
    "cross-validate": "scaled",
}


def parse_config(argv: Sequence[str]) -> RunConfig:
    """Parse argv into a validated :class:`RunConfig`.

    Raises :class:`UsageError` (argparse errors are converted).
    """
    parser = build_parser()
    err = io.StringIO()
    try:
        with contextlib.redirect_stderr(err):
            ns = parser.parse_args(list(argv))
    except SystemExit as exc:
        if exc.code == 0:
            raise
        lines = err.getvalue().strip().splitlines()
        msg = lines[-1].split("error: ", 1)[-1] if lines else "usage error"
        raise UsageError(msg) from None
    _configure_logging(ns.verbose)
    if ns.config is not None:
        overrides = {
            k: v
            for k, v in (("output", ns.config_output), ("format", ns.config_format))
            if v is not None
        }
        if ns.command is not None:
            raise UsageError("--config cannot be combined with a command")
        try:
            with open(ns.config, encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise UsageError(f"cannot read config {ns.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise UsageError(f"config {ns.config} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise UsageError(f"config {ns.config} must hold a JSON object")
        data.update(overrides)
        return RunConfig.from_dict(data)
    if ns.command is None:
        raise UsageError("a command is required (or --config FILE)")
    values = {
        k: v
        for k, v in vars(ns).items()
        if k not in ("config", "verbose", "config_output", "config_format")
    }
    return normalize(RunConfig(**values))


_COMMAND_DEFAULTS: dict[str, dict[str, Any]] = {
    "spectrum-sweep": {"g_step": 0.01},
    "scattering-sweep": {"n_samples": 201},
    "ss-find": {"tol": 1e-9, "max_iter": 50},
    "ss-atlas": {"coarse_n": 24, "diagnostics": False},
    "trace-gc": {"coarse_n": 24, "warm_start": True},
}


def normalize(cfg: RunConfig) -> RunConfig:
    """Fill command defaults (boundary, scan axis, ...) and validate."""
    if cfg.command not in COMMANDS:
        raise UsageError(f"unknown command {cfg.command!r}")
    fill = {k: v for k, v in _COMMAND_DEFAULTS.get(cfg.command, {}).items() if getattr(cfg, k) is None}
    if cfg.command in _DEFAULT_BOUNDARY and cfg.boundary is None:
        fill["boundary"] = _DEFAULT_BOUNDARY[cfg.command]
    if cfg.command == "scattering-sweep" and cfg.axis is None:
        fill["axis"] = "k" if cfg.k_lo is not None or cfg.k_hi is not None else "g"
    cfg = replace(cfg, **fill)
    validate(cfg)
    return cfg


def _require(cfg: RunConfig, *names: str) -> None:
    for n in names:
        if getattr(cfg, n) is None:
            raise UsageError(f"{cfg.command} requires --{n.replace('_', '-')}")


def _ordered(lo: float, hi: float, name: str) -> None:
    if not lo < hi:
        raise UsageError(f"--{name}-lo must be below --{name}-hi (got {lo} >= {hi})")


def validate(cfg: RunConfig) -> None:
    """Command-specific checks beyond what argparse enforces."""
    c = cfg.command
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if isinstance(v, float) and not math.isfinite(v):
            raise UsageError(f"--{f.name.replace('_', '-')} must be finite")
    if cfg.format not in ("json", "csv"):
        raise UsageError(f"unknown format {cfg.format!r}")
    if cfg.threads < 0:
        raise UsageError("--threads must be >= 0")
    if cfg.A is not None and cfg.A < 0:
        raise UsageError("--A must be >= 0")
    if c == "spectrum-sweep":
        _require(cfg, "A", "g_lo", "g_hi", "g_step")
        _ordered(cfg.g_lo, cfg.g_hi, "g")
        if not cfg.g_step > 0:
            raise UsageError("--g-step must be positive")
    elif c == "scattering-sweep":
        _require(cfg, "A", "n_samples")
        if cfg.n_samples < 1:
            raise UsageError("--n-samples must be >= 1")
        if cfg.axis not in ("g", "k"):
            raise UsageError(f"--axis must be g or k, got {cfg.axis!r}")
        if cfg.axis == "k":
            _require(cfg, "g", "k_lo", "k_hi")
            _ordered(cfg.k_lo, cfg.k_hi, "k")
            if not cfg.k_lo > 0:
                raise UsageError("--k-lo must be positive")
        else:
            _require(cfg, "k", "g_lo", "g_hi")
            _ordered(cfg.g_lo, cfg.g_hi, "g")
            if not cfg.k > 0:
                raise UsageError("--k must be positive")
    elif c == "ss-find":
        _require(cfg, "A", "g0", "k0")
        if not cfg.k0 > 0:
            raise UsageError("--k0 must be positive")
    elif c in ("ss-atlas", "trace-gc"):
        if cfg.A is None:
            _require(cfg, "A_lo", "A_hi", "A_step")
            _ordered(cfg.A_lo, cfg.A_hi, "A")
            if not cfg.A_step > 0:
                raise UsageError("--A-step must be positive")
            if cfg.A_lo < 0:
                raise UsageError("--A-lo must be >= 0")
        if cfg.coarse_n is not None and cfg.coarse_n < 16:
            raise UsageError("--coarse-n must be >= 16")
    elif c in ("verify-exact",):
        _require(cfg, "g")
        if not cfg.g * cfg.g < 0.25:
            raise UsageError("--g must satisfy g^2 < 1/4")
    elif c == "cross-validate":
        _require(cfg, "A")
    if c in ("spectrum-sweep", "verify-exact", "cross-validate"):
        try:
            cfg.grid()
        except ValueError as exc:
            raise UsageError(str(exc)) from exc


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING - 10 * min(verbosity, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


# -- execution ----------------------------------------------------------------


def _pmap(fn: Callable, items: Sequence, threads: int) -> list:
    """Order-preserving map, in worker processes when threads != 1."""
    workers = (os.cpu_count() or 1) if threads == 0 else threads
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as ex:
        return list(ex.map(fn, items))


def _root_record(r: SSRoot) -> dict[str, Any]:
    return {
        "A": r.A,
        "g_star": r.g_star,
        "k_star": r.k_star,
        "residual": r.residual,
        "newton_iterations": r.newton_iterations,
        "m11_abs": r.m11_abs,
        "norm": r.norm,
        "det_defect": r.det_defect,
    }


def _spectrum_row(args) -> dict[str, Any]:
    A, g, grid = args
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        s = compute_spectrum(PotentialParams(g=g, A=A), grid)
        sm = summarize(s)
        cls = classify_states(s)
    bound = s.eigenvalues[cls.bound].real
    return {
        "g": g,
        "max_im_E": sm.max_im_E,
        "re_E_pair": sm.re_E_pair,
        "n_pair_states": sm.n_pair_states,
        "n_bound": sm.n_bound,
        "min_bound_E": float(bound.min()) if bound.size else None,
        "_warnings": [str(w.message) for w in caught],
    }


def _run_spectrum_sweep(cfg: RunConfig, warn: list[str]) -> dict[str, Any]:
    g_values = _arange(cfg.g_lo, cfg.g_hi, cfg.g_step)
    grid = cfg.grid()
    rows = _pmap(_spectrum_row, [(cfg.A, g, grid) for g in g_values], cfg.threads)
    for r in rows:
        for w in r.pop("_warnings"):
            if w not in warn:
                warn.append(w)
    return {"A": cfg.A, "boundary": grid.boundary, "rows": rows}


def _run_scattering_sweep(cfg: RunConfig, warn: list[str]) -> dict[str, Any]:
    if cfg.axis == "k":
        fixed, lo, hi = cfg.g, cfg.k_lo, cfg.k_hi
    else:
        fixed, lo, hi = cfg.k, cfg.g_lo, cfg.g_hi
    rows = scattering_sweep(cfg.A, cfg.axis, fixed, lo, hi, cfg.n_samples, cfg.L, cfg.rel_tol)
    n_over = sum(r.overflow for r in rows)
    if n_over:
        warn.append(f"{n_over} samples hit the |m22| floor; coefficients clamped")
    return {
        "A": cfg.A,
        "axis": cfg.axis,
        "fixed": fixed,
        "rows": [
            {cfg.axis: r.value, "T": r.T, "R_left": r.R_left, "R_right": r.R_right, "overflow": r.overflow}
            for r in rows
        ],
    }


def _run_ss_find(cfg: RunConfig, warn: list[str]) -> dict[str, Any]:
    r = find_ss(cfg.A, cfg.g0, cfg.k0, tol=cfg.tol, max_iter=cfg.max_iter)
    return {"root": _root_record(r)}


def _atlas_record(args) -> dict[str, Any]:
    A, coarse_n, diagnostics = args
    a = count_ss(A, coarse_n=coarse_n, diagnostics=diagnostics)
    w = a.window
    return {
        "A": a.A,
        "count": a.count,
        "predicted_count": a.predicted_count,
        "window": {"g_lo": w.g_lo, "g_hi": w.g_hi, "k_lo": w.k_lo, "k_hi": w.k_hi},
        "roots": [_root_record(r) for r in a.roots],
        "warnings": list(a.warnings),
    }


def _run_ss_atlas(cfg: RunConfig, warn: list[str]) -> dict[str, Any]:
    items = [(A, cfg.coarse_n, bool(cfg.diagnostics)) for A in cfg.A_values()]
    atlases = _pmap(_atlas_record, items, cfg.threads)
    for a in atlases:
        warn.extend(a.pop("warnings"))
    return {"atlases": atlases}


def _run_trace_gc(cfg: RunConfig, warn: list[str]) -> dict[str, Any]:
    A_values = cfg.A_values()
    if cfg.warm_start:
        curve = trace_gc_curve(A_values, coarse_n=cfg.coarse_n, warm_start=True)
    else:
        curve = [
            p
            for chunk in _pmap(_trace_one, [(A, cfg.coarse_n) for A in A_values], cfg.threads)
            for p in chunk
        ]
    return {
        "points": [
            {
                "A": p.A,
                "count": len(p.roots),
                "g_stars": [r.g_star for r in p.roots],
                "k_stars": [r.k_star for r in p.roots],
            }
            for p in curve
        ]
    }


def _trace_one(args):
    A, coarse_n = args
    return trace_gc_curve([A], coarse_n=coarse_n, warm_start=False)


def _run_verify_exact(cfg: RunConfig, warn: list[str]) -> dict[str, Any]:
    st = exact_bound_state(cfg.g)
    p = PotentialParams(g=cfg.g, A=st.A)
    grid = cfg.grid()
    s = compute_spectrum(p, grid)
    cls = classify_states(s)
    bound = s.eigenvalues[cls.bound]
    if bound.size == 0:
        raise NumericalError("no bound state found in the computed spectrum")
    E_num = complex(bound[np.argmin(np.abs(bound - st.energy))])
    rows = []
    for h in (4e-3, 2e-3, 1e-3):
        x = np.arange(-10.0, 10.0 + h / 2, h)
        rows.append({"h": h, "residual": schrodinger_residual(st.psi, st.energy, p, x, h)})
    orders = [
        math.log2(rows[i]["residual"] / rows[i + 1]["residual"]) for i in range(len(rows) - 1)
    ]
    return {
        "g": cfg.g,
        "A": st.A,
        "E_exact": st.energy,
        "E_numeric": E_num.real,
        "E_numeric_imag": E_num.imag,
        "abs_error": abs(E_num - st.energy),
        "observed_order": orders[-1],
        "residuals": rows,
    }


def _run_cross_validate(cfg: RunConfig, warn: list[str]) -> dict[str, Any]:
    rep = cross_validate_transition(cfg.A, grid=cfg.grid())
    tp = rep.transition
    first = rep.ss_roots[0] if rep.ss_roots else None
    if rep.both_absent:
        warn.append(f"no singularity and no transition at A={cfg.A}")
    elif first is None or tp is None:
        raise NumericalError(
            f"only one side located a point at A={cfg.A}: "
            f"singularity={'yes' if first else 'no'}, transition={'yes' if tp else 'no'}"
        )
    return {
        "A": cfg.A,
        "n_roots": len(rep.ss_roots),
        "g_star": first.g_star if first else None,
        "k_star": first.k_star if first else None,
        "g_c": tp.g_c if tp else None,
        "k_c": tp.k_c if tp else None,
        "E_c_re": tp.E_c.real if tp else None,
        "E_c_im": tp.E_c.imag if tp else None,
        "dg": rep.dg,
        "dk": rep.dk,
        "both_absent": rep.both_absent,
    }


_RUNNERS = {
    "spectrum-sweep": _run_spectrum_sweep,
    "scattering-sweep": _run_scattering_sweep,
    "ss-find": _run_ss_find,
    "ss-atlas": _run_ss_atlas,
    "trace-gc": _run_trace_gc,
    "verify-exact": _run_verify_exact,
    "cross-validate": _run_cross_validate,
}


def run(cfg: RunConfig) -> ResultEnvelope:
    """Execute ``cfg`` and wrap the payload in an envelope."""
    t0 = time.perf_counter()
    warn: list[str] = []
    payload = _RUNNERS[cfg.command](cfg, warn)
    return ResultEnvelope(
        config=cfg,
        version=__version__,
        wall_time=time.perf_counter() - t0,
        payload=payload,
        warnings=warn,
    )


# -- serialization ------------------------------------------------------------


def format_number(x: float) -> str:
    """Shortest repr of ``x`` rounded to 15 significant digits."""
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"non-finite value {x!r} cannot be serialized")
    return repr(float(f"{x:.15g}"))


def _json(obj: Any) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_number(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_json(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def envelope_dict(env: ResultEnvelope) -> dict[str, Any]:
    return {
        "config": env.config.to_dict(),
        "version": env.version,
        "wall_time": env.wall_time,
        "warnings": list(env.warnings),
        "payload": env.payload,
    }


def _csv_cell(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format_number(v)
    if isinstance(v, (list, tuple)):
        return ";".join(_csv_cell(x) for x in v)
    return str(v)


def payload_table(command: str, payload: dict[str, Any]) -> tuple[list[str], list[dict[str, Any]]]:
    """Flatten a payload into one table (header, rows)."""
    if command in ("spectrum-sweep", "scattering-sweep"):
        rows = payload["rows"]
        header = list(rows[0]) if rows else []
        return header, rows
    if command == "ss-find":
        rec = payload["root"]
        return list(rec), [rec]
    if command == "ss-atlas":
        header = ["kind", "A", "count", "predicted_count", "g_star", "k_star", "residual", "newton_iterations"]
        rows: list[dict[str, Any]] = []
        for a in payload["atlases"]:
            rows.append({"kind": "atlas", "A": a["A"], "count": a["count"], "predicted_count": a["predicted_count"]})
            for r in a["roots"]:
                rows.append({"kind": "root", **{k: r[k] for k in header[4:]}, "A": r["A"]})
        return header, rows
    if command == "trace-gc":
        header = ["kind", "A", "count", "g_star", "k_star"]
        rows = []
        for p in payload["points"]:
            rows.append({"kind": "point", "A": p["A"], "count": p["count"]})
            for g, k in zip(p["g_stars"], p["k_stars"]):
                rows.append({"kind": "root", "A": p["A"], "g_star": g, "k_star": k})
        return header, rows
    if command == "verify-exact":
        summary = {k: v for k, v in payload.items() if k != "residuals"}
        header = ["kind", *summary, "h", "residual"]
        rows = [{"kind": "summary", **summary}]
        rows += [{"kind": "residual", **r} for r in payload["residuals"]]
        return header, rows
    if command == "cross-validate":
        return list(payload), [payload]
    raise ValueError(f"unknown command {command!r}")


def serialize(env: ResultEnvelope, fmt: str = "json") -> bytes:
    """Encode an envelope as UTF-8 JSON (whole envelope) or CSV (payload)."""
    if fmt == "json":
        return (_json(envelope_dict(env)) + "\n").encode("utf-8")
    if fmt == "csv":
        header, rows = payload_table(env.config.command, env.payload)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_csv_cell(r.get(h)) for h in header])
        return buf.getvalue().encode("utf-8")
    raise ValueError(f"unknown format {fmt!r}")


def write_output(data: bytes, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
        return
    with open(path, "wb") as fh:
        fh.write(data)


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        print(f"ssatlas: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        env = run(cfg)
        data = serialize(env, cfg.format)
    except NumericalError as exc:
        print(f"ssatlas: numerical failure in {type(exc).__module__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"ssatlas: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    for w in env.warnings:
        logger.warning(w)
    try:
        write_output(data, cfg.output)
    except OSError as exc:
        print(f"ssatlas: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK
