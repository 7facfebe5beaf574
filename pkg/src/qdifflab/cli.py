"""Command-line interface.

Every subcommand reads JSON, writes JSON (stdout unless ``--json`` names a
file) and exits with 0 on success, 1 on invalid input and 2 when a numeric
routine fails.  Complex numbers are written as ``[re, im]``.
"""

from __future__ import annotations

import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import click
import numpy as np

from . import corpus as corpus_mod
from .cuts import CutError, CutGraph, find_matching
from .flatgeo import CAPTURE, FlatDifferential, FlatGeoError, render_svg, strip_decomposition
from .hurwitz import ContinuationError, HurwitzError, load_qdiff, local_exponent_audit, recover_from_qdiff, zero_count_check
from .periods import PeriodError, SheetPath, equivariance_residual, period
from .qstab import QStabError, StabilityDatum, induce
from .quiver import QuiverError, build_dga, n_reduce, verify_d_squared
from .surface import SurfaceError, hat_rank, load_arc_system, numerical_data, validate_arc_system
from .winding import LoopSpec, WindingError, angle_change

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2


@dataclass
class RunConfig:
    ode_tol: float = 1e-10
    quad_tol: float = 1e-10
    capture_radius: float = CAPTURE
    phase_grid: int = 48
    budget: float | None = None
    seed: int = 0
    json_out: str | None = None
    svg_out: str | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("ode_tol", "quad_tol", "capture_radius"):
            if not getattr(self, name) > 0:
                raise click.BadParameter(f"{name} must be positive")
        if self.budget is not None and not self.budget > 0:
            raise click.BadParameter("budget must be positive")


class InputError(Exception):
    """Malformed input file."""


def to_jsonable(x):
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [to_jsonable(v) for v in x.tolist()]
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True)


def read_json(path: str):
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def emit(cfg: RunConfig, obj) -> None:
    text = dumps(obj)
    if cfg.json_out:
        Path(cfg.json_out).write_text(text + "\n")
    else:
        click.echo(text)


def _complex(text: str) -> complex:
    parts = [p for p in text.replace(" ", "").split(",") if p]
    try:
        vals = [float(p) for p in parts]
    except ValueError as exc:
        raise click.BadParameter(f"expected 're' or 're,im', got {text!r}") from exc
    if len(vals) not in (1, 2):
        raise click.BadParameter(f"expected 're' or 're,im', got {text!r}")
    return complex(vals[0], vals[1] if len(vals) == 2 else 0.0)


def _common(f):
    f = click.option("--tol", type=float, default=1e-10, show_default=True,
                     help="Integration / ODE tolerance.")(f)
    f = click.option("--budget", type=float, default=None, help="Trajectory length budget.")(f)
    f = click.option("--seed", type=int, default=0, show_default=True)(f)
    f = click.option("--json", "json_out", type=click.Path(dir_okay=False), default=None,
                     help="Write the JSON report here instead of stdout.")(f)
    return f


def _config(tol, budget, seed, json_out, **extra) -> RunConfig:
    return RunConfig(ode_tol=tol, quad_tol=tol, budget=budget, seed=seed, json_out=json_out,
                     extra=extra)


class Failure(Exception):
    """A finished run whose result is a failure; carries the exit code."""

    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Numerical toolkit for q-quadratic differentials."""


# ------------------------------------------------------------------ surface

@main.group()
def surface():
    """Arc systems on graded marked surfaces."""


@surface.command("check")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@_common
def surface_check(path, **kw):
    cfg = _config(**kw)
    sysm, g = load_arc_system(read_json(path))
    problems = validate_arc_system(sysm, genus=g)
    out = {"valid": not problems, "violations": problems}
    emit(cfg, out)
    if problems:
        raise Failure(EXIT_INVALID, "invalid arc system")


@surface.command("data")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@_common
def surface_data(path, **kw):
    cfg = _config(**kw)
    sysm, g = load_arc_system(read_json(path))
    surf = numerical_data(sysm, g)
    out = surf.to_dict()
    try:
        out["hat_rank"] = hat_rank(surf)
    except SurfaceError as exc:
        out["hat_rank"] = None
        out["hat_rank_note"] = str(exc)
    emit(cfg, out)


# ------------------------------------------------------------------ quiver

@main.group()
def quiver():
    """Graded quivers, superpotentials and Ginzburg differentials."""


def _dga(path, truncation):
    sysm, g = load_arc_system(read_json(path))
    problems = validate_arc_system(sysm, genus=g)
    if problems:
        raise SurfaceError("; ".join(problems))
    return build_dga(sysm, truncation)


@quiver.command("build")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option("--truncation", type=int, default=6, show_default=True)
@_common
def quiver_build(path, truncation, **kw):
    emit(_config(**kw), _dga(path, truncation).to_dict())


@quiver.command("verify")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option("--truncation", type=int, default=6, show_default=True)
@_common
def quiver_verify(path, truncation, **kw):
    cfg = _config(**kw)
    residues = verify_d_squared(_dga(path, truncation))
    out = {"d2_residues": [[g, [[c, list(p)] for p, c in sorted(el.items())]] for g, el in residues]}
    emit(cfg, out)
    if residues:
        raise Failure(EXIT_NUMERIC, "d^2 does not vanish")


@quiver.command("reduce")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option("--N", "n", type=int, required=True, help="Collapse bidegree (a, b) to a + bN.")
@click.option("--truncation", type=int, default=6, show_default=True)
@_common
def quiver_reduce(path, n, truncation, **kw):
    cfg = _config(**kw)
    red = n_reduce(_dga(path, truncation), n)
    emit(cfg, dict(red.to_dict(), N=n, d2_residues=len(verify_d_squared(red))))


# ------------------------------------------------------------------ hurwitz

@main.group()
def hurwitz():
    """Covers and q-quadratic differentials."""


@hurwitz.command("check")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@_common
def hurwitz_check(path, **kw):
    cfg = _config(**kw)
    qd = load_qdiff(read_json(path))
    report = zero_count_check(qd)
    out = {"qdiff": qd.to_dict(), "zero_count": report.to_dict(),
           "local_exponents": local_exponent_audit(qd)}
    emit(cfg, out)
    if not report.ok:
        raise Failure(EXIT_NUMERIC, "zero count mismatch")


@hurwitz.command("recover")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option("--samples", type=int, default=256, show_default=True)
@_common
def hurwitz_recover(path, samples, **kw):
    cfg = _config(**kw)
    qd = load_qdiff(read_json(path))
    rec = recover_from_qdiff(qd, samples)
    emit(cfg, {"cover": rec.cover.to_dict(), "raw_coefficients": rec.raw_coefficients,
               "phase_index": rec.phase_index, "monodromy": rec.monodromy})


# ------------------------------------------------------------------ geometry

@main.command()
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option("--phase", type=float, default=0.0, show_default=True)
@click.option("--svg", "svg_out", type=click.Path(dir_okay=False), default=None)
@click.option("--points/--no-points", default=False, help="Include trajectory samples in the JSON.")
@_common
def foliate(path, phase, svg_out, points, **kw):
    """Horizontal strip decomposition of an integer-s differential."""
    cfg = _config(**kw)
    qd = load_qdiff(read_json(path))
    try:
        fd = FlatDifferential.from_qdiff(qd)
    except FlatGeoError as exc:
        raise InputError(str(exc)) from exc
    dec = strip_decomposition(fd, phase, cfg.ode_tol, budget=cfg.budget)
    if svg_out:
        Path(svg_out).write_text(render_svg(fd, dec))
    emit(cfg, dict(dec.to_dict(with_points=points), differential=fd.to_dict()))


def _loop(spec: dict) -> LoopSpec:
    kind = spec.get("kind", "circle")
    if kind == "circle":
        return LoopSpec.circle(_complex_item(spec.get("center", 0)), float(spec["radius"]),
                               int(spec.get("samples", 4096)), bool(spec.get("ccw", True)))
    if kind == "ellipse":
        return LoopSpec.ellipse(_complex_item(spec.get("center", 0)), float(spec["a"]),
                                float(spec["b"]), float(spec.get("tilt", 0.0)))
    if kind == "polygon":
        return LoopSpec.polygon([_complex_item(v) for v in spec["vertices"]])
    if kind == "samples":
        return LoopSpec.from_samples([_complex_item(v) for v in spec["points"]],
                                     bool(spec.get("closed_duplicate", False)))
    raise InputError(f"unknown loop kind {kind!r}")


def _complex_item(x) -> complex:
    if isinstance(x, (list, tuple)):
        return complex(float(x[0]), float(x[1]) if len(x) > 1 else 0.0)
    return complex(x)


@main.command()
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option("--loop", "loop_path", type=click.Path(exists=True, dir_okay=False), required=True)
@_common
def wind(path, loop_path, **kw):
    """Angle change and winding number of loops."""
    cfg = _config(**kw)
    qd = load_qdiff(read_json(path))
    spec = read_json(loop_path)
    loops = spec if isinstance(spec, list) else [spec]
    rows = []
    for i, item in enumerate(loops):
        ac = angle_change(None, _loop(item), dlog=qd.dlog_coefficient)
        rows.append({"loop": item.get("label", i), "angle_change": ac, "winding": ac / math.pi})
    emit(cfg, {"loops": rows})


def _sheet_path(item: dict) -> SheetPath:
    return SheetPath([_complex_item(p) for p in item["points"]], int(item.get("sheet", 0)),
                     tuple((int(k), int(j)) for k, j in item.get("jumps", ())),
                     int(item.get("branch_sign", 1)), str(item.get("label", "")))


@main.command()
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option("--paths", "paths_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--method", type=click.Choice(["graded", "adaptive"]), default="graded",
              show_default=True)
@_common
def periods(path, paths_path, method, **kw):
    """Periods along sheet paths, with deck-equivariance residuals."""
    cfg = _config(**kw)
    qd = load_qdiff(read_json(path))
    items = read_json(paths_path)
    items = items if isinstance(items, list) else items["paths"]
    rows = []
    for i, item in enumerate(items):
        p = _sheet_path(item)
        z = period(qd, p, method=method, tol=cfg.quad_tol)
        res = equivariance_residual(qd, p, method=method, tol=cfg.quad_tol)
        rows.append({"path": p.label or i, "period": z, "equivariance_residual": res})
    emit(cfg, {"s": qd.s, "q": qd.q, "periods": rows})


# ------------------------------------------------------------------ combinatorics

@main.command()
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@_common
def cut(path, **kw):
    """Matching of simple zeros to pole components."""
    cfg = _config(**kw)
    g = CutGraph.from_dict(read_json(path))
    res = find_matching(g)
    out = dict(res.to_dict(), graph=g.to_dict(), invariant_violations=g.violations())
    emit(cfg, out)
    if not res.feasible:
        raise Failure(EXIT_INVALID, "no matching exists")


@main.command("induce")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option("--s", "s_text", required=True, help="Parameter as 're' or 're,im'.")
@click.option("--mode", type=click.Choice(["open", "closed"]), default="open", show_default=True)
@click.option("--window", type=int, default=1, show_default=True)
@_common
def induce_cmd(path, s_text, mode, window, **kw):
    """Induce q-stability data from a stability datum."""
    cfg = _config(**kw)
    d = StabilityDatum.from_dict(read_json(path))
    emit(cfg, induce(d, _complex(s_text), mode, window).to_dict())


@main.command("corpus")
@click.option("--suite", type=click.Choice([*corpus_mod.SUITES, "all"]), default="all",
              show_default=True)
@_common
def corpus_cmd(suite, **kw):
    """Run the built-in check suites and print a residual table."""
    cfg = _config(**kw)
    names = corpus_mod.SUITES if suite == "all" else (suite,)
    report = {}
    failed = 0
    for name in names:
        rows = corpus_mod.run_suite(name, cfg.seed)
        report[name] = rows
        bad = [r for r in rows if not r["ok"]]
        failed += len(bad)
        click.echo(f"{name}: {len(rows) - len(bad)}/{len(rows)} ok", err=True)
        for r in bad:
            click.echo(f"  FAIL {r['case']}", err=True)
    emit(cfg, report)
    if failed:
        raise Failure(EXIT_NUMERIC, f"{failed} corpus checks failed")


_INVALID = (InputError, SurfaceError, QuiverError, HurwitzError, CutError, QStabError,
            click.BadParameter, KeyError, ValueError, TypeError)
_NUMERIC = (FlatGeoError, PeriodError, WindingError, ContinuationError, ArithmeticError)


def run(argv=None) -> int:
    """Entry point returning the exit code instead of exiting."""
    try:
        main.main(args=argv, prog_name="qdifflab", standalone_mode=False)
    except Failure as exc:
        click.echo(f"error: {exc}", err=True)
        return exc.code
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.UsageError as exc:
        exc.show()
        return EXIT_INVALID
    except _NUMERIC as exc:
        click.echo(f"numeric failure: {exc}", err=True)
        return EXIT_NUMERIC
    except _INVALID as exc:
        click.echo(f"invalid input: {exc}", err=True)
        return EXIT_INVALID
    except click.Abort:
        return EXIT_INVALID
    return EXIT_OK


def entry() -> None:
    sys.exit(run())


if __name__ == "__main__":
    entry()
