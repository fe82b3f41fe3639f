"""Command-line front end: ``twistorsolve {solve|glue|backlund|roundtrip|verify}``.

Exit codes: 0 ok, 2 invalid configuration, 3 solver failure, 4 I/O error.
Set ``TWISTORSOLVE_LOG`` (DEBUG, INFO, WARNING, ...) for the log level.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import config as cfgmod
from .backlund import coefficients, eikonal_residual, transform, verify_system
from .checks import run_all
from .errors import (
    HypothesisViolated,
    NodePlacement,
    ProportionalTriples,
    TwistorError,
)
from .fields import Grid3, ScalarField3
from .gluing import gluing_from_config
from .inverse import (
    SampledGluing,
    TransversalCurve,
    boundary_values,
    canonical_Y,
    check_condition_10760,
    glue_sample,
    reconstruct,
    suggest_t_max,
)
from .oracles import fixture
from .pde import abc_from_lambda_triple, residual_report
from .riemann import check_wave_gluing, wave_solution

log = logging.getLogger("twistorsolve")

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_IO = 0, 2, 3, 4


class SolverFailure(Exception):
    """Raised by a command to request exit code 3 after writing its outputs."""


class Run:
    """Output directory plus the resolved config and its hash."""

    def __init__(self, cfg: dict, out: Path):
        self.cfg = cfg
        self.out = out
        self.hash = cfgmod.config_hash(cfg)

    def grid(self) -> Grid3:
        g = self.cfg["grid"]
        return Grid3.box(g["radius"], g["n"], g.get("center", (0.0, 0.0, 0.0)))

    def lambdas(self):
        return cfgmod.lambdas(self.cfg["lambdas"])

    def write_json(self, name: str, data: dict) -> None:
        data = dict(data, config_hash=self.hash, version=__version__)
        (self.out / name).write_text(json.dumps(_plain(data), indent=2, sort_keys=True) + "\n")

    def write_field(self, name: str, field: ScalarField3) -> None:
        field.to_csv(self.out / f"{name}.csv", config_hash=self.hash)


def _plain(x):
    """JSON-friendly copy: complex numbers become [re, im], numpy scalars become floats."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        x = float(x)
    if isinstance(x, float) and not np.isfinite(x):
        return repr(x)
    return x


def _solver(cfg):
    s = cfg["solver"]
    return dict(N=s["N"], tol=s["tol"], max_iters=s["max_iters"])


def _load_gluing(run: Run):
    g = run.cfg["gluing"]
    if g.get("kind") == "sampled":
        if "file" not in g:
            raise cfgmod.ConfigError("gluing.file is required for a sampled gluing")
        return SampledGluing.load(g["file"])
    return gluing_from_config(g)


def _curve(run: Run, w, abc, radius):
    c = run.cfg["builder"]["curve"]
    if c == "canonical":
        return canonical_Y(w, abc, radius)
    return TransversalCurve.linear(c["slope"], radius)


def _residual(field: ScalarField3, abc) -> dict:
    if min(field.grid.shape) < 3:
        return {"skipped": "grid smaller than the 3-point stencil"}
    return residual_report(field, abc).to_dict()


# commands -------------------------------------------------------------------

def cmd_solve(run: Run) -> None:
    lams = run.lambdas()
    g = _load_gluing(run)
    s = run.cfg["solver"]
    if s["N"] != getattr(g, "N", s["N"]):
        raise cfgmod.ConfigError(f"solver.N = {s['N']} but the sampled gluing has N = {g.N}")
    field = wave_solution(g, *lams, run.grid(), method=s["method"], jobs=run.jobs, **_solver(run.cfg))
    abc = abc_from_lambda_triple(*lams)
    run.write_field("field", field)
    field.write_slice_z0(run.out / "slice_z0.dat", run.hash)
    run.write_json("report.json", {
        "command": "solve",
        "residual": _residual(field, abc),
        "holes": len(field.holes),
        "value_at_center": complex(field.values[tuple(n // 2 for n in field.grid.shape)]),
    })
    if field.holes:
        raise SolverFailure(f"{len(field.holes)} grid points failed to solve")


def _build_gluing(run: Run, w, N: int):
    lams = run.lambdas()
    abc = abc_from_lambda_triple(*lams)
    b = run.cfg["builder"]
    grid = run.grid()
    half = max(h * (n - 1) / 2 for h, n in zip(grid.spacing, grid.shape))
    pilot = _curve(run, w, abc, max(0.5, 10 * half))
    t_max = b["t_max"]
    if t_max == "auto":
        t_max = suggest_t_max(w, *lams, pilot, grid, N)
    Y = _curve(run, w, abc, 1.01 * max(t_max, pilot.radius))
    sg = glue_sample(w, *lams, Y, t_max=t_max, degree=b["degree"], N=N, eps1=b["eps1"])
    return sg, Y, abc


def cmd_glue(run: Run) -> None:
    f = run.cfg["fixture"]
    w = fixture(f["name"], f.get("params"))
    sg, Y, abc = _build_gluing(run, w, run.cfg["solver"]["N"])
    lams = run.lambdas()
    sg.provenance["config_hash"] = run.hash
    sg.save(run.out / "gluing.json")
    cond = check_condition_10760(w, lams[0], lams[1], Y, abc=abc)
    index = sg.index_at_zero()
    run.write_json("report.json", {
        "command": "glue",
        "t_max": sg.t_max,
        "fit_residual": sg.fit_residual,
        "condition_10760": cond.to_dict(),
        "index_dg_dt_at_0": index,
        "index_ok": index == -2,
    })
    if index != -2:
        raise SolverFailure(f"constructed gluing has index {index}, expected -2")


def cmd_backlund(run: Run) -> None:
    f = run.cfg["fixture"]
    w = fixture(f["name"], f.get("params"))
    source = abc_from_lambda_triple(*run.lambdas())
    target = abc_from_lambda_triple(*cfgmod.lambdas(run.cfg["backlund"]["target_lambdas"]))
    coeff = coefficients(source, target)
    grid = run.grid()
    v = transform(w, source, target, grid, order=run.cfg["backlund"]["order"], jobs=run.jobs)
    run.write_field("v", v)
    v.write_slice_z0(run.out / "slice_z0.dat", run.hash)
    report = {"command": "backlund", "alpha": coeff.alpha, "beta": coeff.beta,
              "gamma": coeff.gamma, "holes": len(v.holes)}
    if min(grid.shape) >= 3:
        report["system"] = verify_system(w, v, source, target)
        report["target_residual"] = residual_report(v, target).to_dict()
        report["eikonal"] = eikonal_residual(w, v, source).to_dict()
    run.write_json("report.json", report)
    if v.holes:
        raise SolverFailure(f"{len(v.holes)} leaf traces failed")


def cmd_roundtrip(run: Run) -> None:
    f = run.cfg["fixture"]
    w = fixture(f["name"], f.get("params"))
    lams = run.lambdas()
    grid = run.grid()
    exact = w.sample(grid).values
    scale = max(float(np.max(np.abs(exact))), 1e-300)
    table = []
    rec_main = None
    for N in run.cfg["roundtrip"]["N_list"]:
        sg, Y, _ = _build_gluing(run, w, N)
        rec = reconstruct(sg, *lams, Y, boundary_values(w, Y), grid, tol=run.cfg["solver"]["tol"],
                          max_iters=run.cfg["solver"]["max_iters"], jobs=run.jobs)
        err = np.abs(rec.values - exact)
        table.append({"N": N, "max_abs_err": float(np.nanmax(err)), "mean_abs_err": float(np.nanmean(err)),
                      "max_rel_err": float(np.nanmax(err)) / scale, "holes": len(rec.holes),
                      "t_max": sg.t_max, "fit_residual": sg.fit_residual})
        if N == run.cfg["solver"]["N"] or rec_main is None:
            rec_main = rec
    run.write_field("reconstructed", rec_main)
    run.write_json("report.json", {"command": "roundtrip", "fixture": f["name"], "table": table})
    with open(run.out / "convergence.dat", "w") as fh:
        fh.write(f"# N max_abs_err mean_abs_err max_rel_err  config {run.hash}\n")
        for row in table:
            fh.write(f"{row['N']} {row['max_abs_err']:.17g} {row['mean_abs_err']:.17g} "
                     f"{row['max_rel_err']:.17g}\n")
    if any(row["holes"] for row in table):
        raise SolverFailure("reconstruction has holes")


def cmd_verify(run: Run) -> None:
    v = run.cfg["verify"]
    checks = run_all(seed=v["seed"], samples=v["samples"])
    ok = all(c.ok for c in checks)
    run.write_json("verify.json", {"command": "verify", "ok": ok,
                                   "checks": [c.to_dict() for c in checks]})
    if not ok:
        raise SolverFailure("invariant checks failed: "
                            + ", ".join(c.name for c in checks if not c.ok))


COMMANDS = {"solve": cmd_solve, "glue": cmd_glue, "backlund": cmd_backlund,
            "roundtrip": cmd_roundtrip, "verify": cmd_verify}


def _preflight(cmd: str, cfg: dict) -> None:
    """Cheap configuration checks that map to exit code 2 before any heavy work."""
    lams = cfgmod.lambdas(cfg["lambdas"])
    abc_from_lambda_triple(*lams)
    if cmd in ("solve", "glue", "roundtrip"):
        if not (abs(lams[0]) < 1 and abs(lams[1]) < 1 and abs(lams[2]) > 1):
            raise NodePlacement(f"need |lam1|, |lam2| < 1 < |lam3|, got {lams}")
    if cmd == "solve" and cfg["gluing"].get("kind") != "sampled":
        check_wave_gluing(gluing_from_config(cfg["gluing"]), *lams, cfg["solver"]["N"])
    if cmd == "backlund":
        coefficients(abc_from_lambda_triple(*lams),
                     abc_from_lambda_triple(*cfgmod.lambdas(cfg["backlund"]["target_lambdas"])))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="twistorsolve", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                   help="worker threads (results do not depend on this)")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--version", action="version", version=__version__)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=os.environ.get("TWISTORSOLVE_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        raw = json.loads(Path(args.config).read_text())
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except json.JSONDecodeError as exc:
        print(f"error: config is not valid JSON: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = cfgmod.resolve(raw, args.command)
        _preflight(args.command, cfg)
    except (cfgmod.ConfigError, TwistorError, ValueError) as exc:
        name = type(exc).__name__
        print(f"error: invalid configuration ({name}): {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        run = Run(cfg, out)
        run.jobs = max(1, args.jobs)
        (out / "resolved_config.json").write_text(
            json.dumps(dict(cfg, config_hash=run.hash), indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        print(f"error: cannot write outputs: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        COMMANDS[args.command](run)
    except (ProportionalTriples, HypothesisViolated, NodePlacement, cfgmod.ConfigError) as exc:
        print(f"error: invalid configuration ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverFailure as exc:
        print(f"error: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except TwistorError as exc:
        print(f"error: solver failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"error: I/O: {exc}", file=sys.stderr)
        return EXIT_IO
    log.info("done; outputs in %s", out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
