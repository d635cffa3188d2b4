"""Command-line front end.

    mcflow solve  --config run.json [overrides]
    mcflow radial --config run.json [overrides]
    mcflow verify --config run.json [--explore] [overrides]

A run is described by one JSON config; individual keys can be
overridden from the command line. ``solve`` writes the solution and
mesh CSVs plus a JSONL iteration log, ``radial`` writes the disk
profile and its golden fixture, ``verify`` writes report.json and
prints the bound table. Exit codes: 0 success, 1 verify found a failed
check, 2 no convergence / slope blow-up, 3 bad configuration.
"""

import argparse
import json
import os
import sys
from dataclasses import dataclass, field as dc_field
from pathlib import Path

from . import geometry, meshing, pfunc, problems, radial, solver, verify
from .errors import (
    ConfigError, McflowError, MeshQualityFailure, NonConvergence,
    SlopeBlowup,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_NO_CONVERGENCE = 2
EXIT_CONFIG = 3


@dataclass
class RunConfig:
    domain: dict
    problem: dict
    h: float = 0.05
    betas: list = dc_field(default_factory=lambda: [1.0, 1.5, 2.0])
    output_dir: str = "out"
    emit_fields: bool = True
    radial: dict = dc_field(default_factory=lambda: {"R": 1.0, "n": 10_000})
    explore: bool = False


def load_config(path, overrides):
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config: file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON: {exc}")
    if not isinstance(raw, dict):
        raise ConfigError("config: top level must be an object")
    for key in ("domain", "problem"):
        if key not in raw:
            raise ConfigError(f"config: missing '{key}'")

    cfg = RunConfig(
        domain=raw["domain"],
        problem=raw["problem"],
        h=float(raw.get("h", 0.05)),
        betas=[float(b) for b in raw.get("betas", [1.0, 1.5, 2.0])],
        output_dir=str(raw.get("output_dir", "out")),
        emit_fields=bool(raw.get("emit_fields", True)),
        radial=dict(raw.get("radial", {"R": 1.0, "n": 10_000})),
    )

    if overrides.h is not None:
        cfg.h = overrides.h
    if overrides.alpha is not None:
        cfg.problem = {"kind": "power_mc", "alpha": overrides.alpha}
    if overrides.mu is not None:
        cfg.problem = {"kind": "constant_forcing", "mu": overrides.mu}
    if overrides.out is not None:
        cfg.output_dir = overrides.out
    cfg.explore = bool(getattr(overrides, "explore", False))

    if not cfg.h > 0:
        raise ConfigError("h: must be positive")
    if not cfg.explore:
        bad = [b for b in cfg.betas if not pfunc.beta_in_theorem_range(b)]
        if bad:
            raise ConfigError(
                f"betas: {bad} outside [1, 2]; pass --explore to allow")
    return cfg


def _threads():
    """MCFLOW_THREADS caps assembly parallelism; the kernels run one
    deterministic thread, so any positive cap is honored trivially."""
    raw = os.environ.get("MCFLOW_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError("MCFLOW_THREADS: must be an integer")
    if n < 1:
        raise ConfigError("MCFLOW_THREADS: must be >= 1")
    return n


def _build_objects(cfg):
    spec = geometry.from_config(cfg.domain)
    problem = problems.from_dict(cfg.problem)
    return spec, problem


def cmd_solve(cfg):
    spec, problem = _build_objects(cfg)
    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)

    mesh = meshing.triangulate(spec, cfg.h)
    fld = solver.newton_solve(mesh, problem)
    grads = solver.recover_gradient(mesh, fld)

    meshing.mesh_to_csv(mesh, outdir / "mesh_vertices.csv",
                        outdir / "mesh_triangles.csv")
    solver.solution_to_csv(mesh, fld, grads, outdir / "solution.csv")
    _write_log(fld.solve_trace, outdir / "solver_log.jsonl")
    if cfg.emit_fields and not (
            isinstance(problem, problems.PowerMC) and problem.is_soliton):
        for beta in cfg.betas:
            pf = pfunc.evaluate_field(mesh, fld, grads, problem, beta)
            pfunc.field_to_csv(mesh, pf,
                               outdir / f"pfunc_{pf.kind}_beta{beta}.csv")
    print(f"solved: {mesh.n_vertices} vertices, "
          f"{len(fld.solve_trace)} Newton steps")
    return EXIT_OK


def cmd_radial(cfg):
    _, problem = _build_objects(cfg)
    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    r_max = float(cfg.radial.get("R", 1.0))
    n = int(cfg.radial.get("n", 10_000))
    sol = radial.solve_radial(problem, r_max, n)
    radial.radial_to_csv(sol, outdir / "radial.csv")
    radial.fixture_to_json(sol, outdir / "radial_fixture.json")
    print(f"radial profile: q = {sol.q:.12g}, u_min = {sol.u_min:.12g}")
    return EXIT_OK


def cmd_verify(cfg):
    spec, problem = _build_objects(cfg)
    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)

    report = verify.full_report(spec, problem, cfg.h, cfg.betas)
    (outdir / "report.json").write_text(report.to_json())
    _print_report(report)
    return EXIT_OK if report.checks_pass else EXIT_CHECK_FAILED


def _print_report(report):
    print(f"domain {report.domain}  problem {report.problem}  h={report.h}")
    print(f"q_min={report.q_min:.6g}  u_min={report.u_min:.6g}  "
          f"kappa_max={report.kappa_max:.6g}  inradius={report.inradius:.6g}")
    print(f"critical points: {report.critical.count}; "
          f"z(theta) zero counts: "
          f"{sorted(report.critical.z_theta_zero_counts.values())}")
    for p in report.pfunc_results:
        if p.skipped:
            print(f"  {p.kind}(beta={p.beta}): skipped ({p.note})")
        else:
            tag = "" if p.within_theorem_range else "  [not asserted]"
            print(f"  {p.kind}(beta={p.beta}): min_on_boundary="
                  f"{p.min_on_boundary}{tag}")
    header = f"{'bound':8} {'lhs':>12} {'rhs':>12} {'slack':>12}  status"
    print(header)
    for b in report.bounds:
        if not b.applicable:
            print(f"{b.name:8} {b.lhs:12.6g} {'n/a':>12} {'n/a':>12}  "
                  f"not applicable")
        else:
            status = "ok" if b.holds else "FAILED"
            print(f"{b.name:8} {b.lhs:12.6g} {b.rhs:12.6g} "
                  f"{b.slack:12.6g}  {status}")
    print(f"boundary identity residual: "
          f"{report.boundary_identity_residual:.6g}")
    print("all checks pass" if report.checks_pass
          else "SOME CHECKS FAILED")


def _write_log(trace, path):
    with open(path, "w") as fh:
        for entry in trace or []:
            fh.write(json.dumps(entry) + "\n")


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="mcflow",
        description="mean-curvature-type Dirichlet problems: solve, "
                    "radial oracle, verify")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("solve", "radial", "verify"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--h", type=float, default=None)
        p.add_argument("--alpha", type=float, default=None)
        p.add_argument("--mu", type=float, default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--explore", action="store_true")
    args = parser.parse_args(argv)

    try:
        _threads()
        cfg = load_config(args.config, args)
        handler = {"solve": cmd_solve, "radial": cmd_radial,
                   "verify": cmd_verify}[args.command]
        return handler(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NonConvergence, SlopeBlowup) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        if isinstance(exc, NonConvergence):
            for entry in exc.trace:
                print(f"  {entry}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except (MeshQualityFailure, McflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
