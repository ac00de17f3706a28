"""Command-line front end.

    savif simulate      --preset example2 --output runs/ex2
    savif energy        --config run.yaml --override time.T=1.0
    savif sweep-temporal --preset example1_beta_plus --override scheme.name=ifgrk4
    savif sweep-spatial --preset example1_beta_minus
    savif validate-config --config run.yaml

Every run writes ``manifest.json`` (resolved config, version stamp, summary)
into the output directory. Output directory precedence: ``--output``, then
the ``SAVIF_OUTPUT_DIR`` environment variable, then ``io.output_dir``.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import platform
import sys
import time
from pathlib import Path
from typing import Optional

import numpy as np
import scipy

from . import __version__
from .config import RunConfig, parse_config, serialize_config
from .errors import ConfigError, SavifError
from .experiments import (
    SWEEP_COLUMNS,
    Integrator,
    ManufacturedSolution,
    example2_u0,
    h1_error,
    n_steps_for,
    run_spatial_sweep,
    run_temporal_sweep,
    zero_data,
)
from .sav_core import ProblemParams, discrete_energy, init_state, load_checkpoint, save_checkpoint
from .spectral import make_grid

log = logging.getLogger("savif")

OUTPUT_ENV = "SAVIF_OUTPUT_DIR"

SUBCOMMANDS = {
    "simulate": "simulate",
    "sweep-temporal": "temporal_sweep",
    "sweep-spatial": "spatial_sweep",
    "energy": "energy",
}

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 2, 3


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def version_stamp() -> dict:
    return {
        "savif": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }


def build_problem(cfg: RunConfig, N: Optional[int] = None):
    """ProblemParams, initial-data callables and the exact solution (if any) for ``cfg``."""
    p = cfg.problem
    grid = make_grid(*p.domain, p.N if N is None else N)
    ms = ManufacturedSolution(p.alpha, p.beta)
    if p.source == "manufactured":
        src = ms.source
    elif p.source == "manufactured_discrete":
        src = ms.discrete_source(grid)
    else:
        src = None
    params = ProblemParams(grid, p.alpha, p.beta, p.C0, src)
    if p.initial == "example1":
        u0, u1 = (lambda x, y: ms.u(x, y, 0.0)), (lambda x, y: ms.u_t(x, y, 0.0))
    elif p.initial == "example2":
        u0, u1 = example2_u0, zero_data
    else:
        u0, u1 = zero_data, zero_data
    exact = ms if (p.initial == "example1" and src is not None) else None
    return params, u0, u1, exact


def _integrator(cfg: RunConfig, params: ProblemParams, tau: float) -> Integrator:
    s = cfg.scheme
    return Integrator(s.name, params, tau, tol=s.tol, max_iter=s.max_iter, strict_paper=s.strict_paper)


class _Manifest:
    def __init__(self, out: Path, cfg: RunConfig):
        self.path = out / "manifest.json"
        self.data = {
            "config": cfg.to_dict(),
            "version": version_stamp(),
            "status": "running",
            "results": {},
        }
        self.write()

    def write(self):
        tmp = self.path.with_suffix(".tmp")
        tmp.write_text(json.dumps(self.data, indent=2, sort_keys=True, default=float))
        tmp.replace(self.path)


def _write_error(out: Path, exc: Exception, step=None, snapshot=None) -> dict:
    record = {"error": type(exc).__name__, "message": str(exc), "step": step,
              "snapshot": None if snapshot is None else str(snapshot)}
    (out / "error.json").write_text(json.dumps(record, indent=2))
    return record


def _run_trajectory(cfg: RunConfig, out: Path, manifest: _Manifest, resume: Optional[str]) -> int:
    params, u0, u1, exact = build_problem(cfg)
    tau, T = cfg.time.tau, cfg.time.T
    n_total = n_steps_for(T, tau)
    integ = _integrator(cfg, params, tau)
    energy_mode = cfg.experiment.kind == "energy"

    if resume:
        ck = load_checkpoint(resume)
        if ck.state.grid != params.grid:
            raise ConfigError("resume", "checkpoint grid does not match the configuration")
        state, n0 = ck.state, ck.step
        E0 = ck.meta.get("E0", discrete_energy(state, params))
        if cfg.scheme.name == "savif" and n0 > 0:
            integ.ws.u_prev = ck.u_prev
            integ.ws.first_step_done = ck.u_prev is not None
            integ.ws.steps_taken = n0
        mode = "a"
    else:
        state = init_state(params, u0, u1)
        n0 = 0
        E0 = discrete_energy(state, params)
        mode = "w"
    manifest.data["results"]["E0"] = E0
    if E0 == 0.0:
        log.warning("initial energy is zero; RE column holds the absolute drift")
    E_ref = abs(E0) if E0 != 0.0 else 1.0

    diag_f = open(out / "diagnostics.csv", mode, newline="")
    diag = csv.writer(diag_f)
    energy_f = energy = None
    if energy_mode:
        energy_f = open(out / "energy.csv", mode, newline="")
        energy = csv.writer(energy_f)
    if mode == "w":
        diag.writerow(["n", "t", "E", "r", "linf_u"])
        diag.writerow([0, _fmt(state.t), _fmt(E0), _fmt(state.r), _fmt(np.abs(state.u.data).max())])
        if energy is not None:
            energy.writerow(["n", "t", "E", "RE"])
            energy.writerow([0, _fmt(state.t), _fmt(E0), _fmt(0.0)])

    max_re = float(manifest.data["results"].get("max_RE", 0.0))
    if resume and energy_mode:
        max_re = float(ck.meta.get("max_RE", 0.0))

    def u_prev_for_checkpoint():
        return getattr(integ.ws, "u_prev", None) if cfg.scheme.name == "savif" else None

    def checkpoint(path, st, n):
        save_checkpoint(path, st, n, u_prev_for_checkpoint(), meta={"E0": E0, "max_RE": max_re})

    n = n0
    t_start = time.perf_counter()
    try:
        while n < n_total:
            try:
                new_state = integ.step(state)
            except SavifError as exc:
                snap = out / "failure_state.csv"
                checkpoint(snap, state, n)
                rec = _write_error(out, exc, step=n, snapshot=snap)
                manifest.data["status"] = "failed"
                manifest.data["error"] = rec
                manifest.write()
                log.error("step %d failed: %s (state saved to %s)", n, exc, snap)
                return EXIT_SOLVER
            state = new_state
            n += 1
            E = discrete_energy(state, params)
            diag.writerow([n, _fmt(state.t), _fmt(E), _fmt(state.r), _fmt(np.abs(state.u.data).max())])
            if energy is not None:
                re = abs(E - E0) / E_ref
                max_re = max(max_re, re)
                energy.writerow([n, _fmt(state.t), _fmt(E), _fmt(re)])
            if cfg.io.checkpoint_every and n % cfg.io.checkpoint_every == 0:
                checkpoint(out / "checkpoint.csv", state, n)
    finally:
        diag_f.close()
        if energy_f is not None:
            energy_f.close()

    checkpoint(out / "final_state.csv", state, n)
    res = manifest.data["results"]
    res.update({"steps": n, "t_final": state.t, "r_final": state.r,
                "E_final": discrete_energy(state, params),
                "seconds": time.perf_counter() - t_start})
    if energy_mode:
        res["max_RE"] = max_re
    if cfg.scheme.name == "savif":
        res["min_abs_denominator"] = integ.min_abs_denominator
    if exact is not None:
        err = h1_error(state, state.t, exact, params.C0)
        res.update({"h1_err": err.h1_err, "l2_err_v": err.l2_err_v, "r_err": err.r_err})
    return EXIT_OK


def _run_sweep(cfg: RunConfig, out: Path, manifest: _Manifest) -> int:
    kind = cfg.experiment.kind
    p = cfg.problem
    kw = dict(tol=cfg.scheme.tol, max_iter=cfg.scheme.max_iter, strict_paper=cfg.scheme.strict_paper)
    try:
        if kind == "temporal_sweep":
            params, _, _, exact = build_problem(cfg)
            if exact is None:
                raise ConfigError("problem.source", "temporal sweeps need a manufactured source")
            res = run_temporal_sweep(cfg.scheme.name, params, exact, cfg.experiment.tau_list, cfg.time.T, **kw)
        else:
            if p.domain != [-8.0, -8.0, 16.0, 16.0]:
                log.warning("spatial sweep runs on the manufactured-solution domain (-8, 8)^2")
            res = run_spatial_sweep(cfg.scheme.name, cfg.experiment.N_list, cfg.time.tau, cfg.time.T,
                                    beta=p.beta, alpha=p.alpha, C0=p.C0, **kw)
    except SavifError as exc:
        if isinstance(exc, ConfigError):
            raise
        rec = _write_error(out, exc)
        manifest.data["status"] = "failed"
        manifest.data["error"] = rec
        manifest.write()
        return EXIT_SOLVER
    with open(out / "sweep.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SWEEP_COLUMNS)
        for row in res.as_table():
            w.writerow([_fmt(x) for x in row])
    manifest.data["results"].update({
        "control": res.control,
        "slope": res.slope,
        "reduction_factors": res.reduction_factors(),
        "rows_above_floor": len(res.usable()),
        **res.extra,
    })
    return EXIT_OK


def run(cfg: RunConfig, resume: Optional[str] = None) -> int:
    """Execute ``cfg``; returns the process exit status."""
    out = Path(cfg.io.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = _Manifest(out, cfg)
    np.random.seed(cfg.io.seed)
    if cfg.experiment.kind in ("simulate", "energy"):
        status = _run_trajectory(cfg, out, manifest, resume)
    else:
        status = _run_sweep(cfg, out, manifest)
    if status == EXIT_OK:
        manifest.data["status"] = "ok"
        manifest.write()
    return status


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="savif", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in (*SUBCOMMANDS, "validate-config"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", metavar="PATH", help="YAML/JSON run configuration")
        sp.add_argument("--preset", metavar="NAME", help="start from a named preset")
        sp.add_argument("--override", metavar="KEY=VALUE", action="append", default=[],
                        help="dotted-path override, e.g. time.tau=0.01 (repeatable)")
        sp.add_argument("--output", metavar="DIR", help="output directory")
        if name in ("simulate", "energy"):
            sp.add_argument("--resume", metavar="CHECKPOINT", help="continue from a checkpoint file")
    return ap


def load_config(args) -> RunConfig:
    text = Path(args.config).read_text() if args.config else ""
    overrides = list(args.override)
    if args.preset:
        overrides.insert(0, f"preset={args.preset}")
    cmd_kind = SUBCOMMANDS.get(args.command)
    if cmd_kind is not None:
        overrides.append(f"experiment.kind={cmd_kind}")
    env_out = os.environ.get(OUTPUT_ENV)
    if args.output:
        overrides.append(f"io.output_dir={args.output}")
    elif env_out:
        overrides.append(f"io.output_dir={env_out}")
    return parse_config(text, overrides)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args)
        if args.command == "validate-config":
            print(serialize_config(cfg))
            return EXIT_OK
        return run(cfg, resume=getattr(args, "resume", None))
    except ConfigError as exc:
        print(json.dumps({"error": "ConfigError", "key": exc.key, "message": str(exc)}), file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
