"""Command-line driver.

Subcommands map onto the analysis pipeline:

* ``simulate``       integrate and export the trajectory
* ``equilibrium``    solve one steady state and its stability
* ``continue-eq``    sweep C over the equilibrium branch (Hopf detection)
* ``orbit``          compute one periodic orbit and its Floquet multipliers
* ``continue-orbit`` continue an orbit branch until it loses stability
* ``attractor``      local + energy attractors, spectra and chaos report
* ``road``           attractor data at the regime's route-to-chaos C value

Exit codes: 0 success, 1 solver non-convergence or divergence, 2 usage or
configuration error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

import numpy as np

from . import continuation, diagnostics, equilibrium, orbits
from .config import ConfigError, RunConfig, load_config
from .integrate import IntegratorConfig, flow_map, integrate
from .model import REGIME_LABELS
from .spectral import DivergenceError, SpectralGrid, amplitude_spectrum

__all__ = ["cli_dispatch", "main"]

#: Route-to-chaos parameter values per regime (strange-attractor runs).
CHAOS_C = {"linear": -1.5329, "self_u1": -1.53, "self_u2": -1.63, "cross": -1.51}

#: Parameter values where each regime's first orbit branch goes unstable.
ROAD_C = {"linear": -1.531, "self_u1": -1.49, "self_u2": -1.63, "cross": -1.52}


class SolverFailure(RuntimeError):
    """Mapped to exit code 1."""


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bvamx",
        description="Pseudospectral bifurcation analysis of the augmented "
                    "BVAM reaction-diffusion model",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in [
        ("simulate", "integrate the model and export the trajectory"),
        ("equilibrium", "solve a steady state and report stability"),
        ("continue-eq", "equilibrium branch over a C sweep"),
        ("orbit", "one periodic orbit with Floquet multipliers"),
        ("continue-orbit", "orbit branch continuation in C"),
        ("attractor", "attractor and spectrum data at fixed C"),
        ("road", "attractor data at the regime's route-to-chaos C"),
    ]:
        cmd = sub.add_parser(name, help=helptext)
        cmd.add_argument("--config", help="configuration file (key = value)")
        cmd.add_argument("--regime", choices=REGIME_LABELS)
        cmd.add_argument("--C", type=float, help="bifurcation parameter value")
        cmd.add_argument("--out", help="output directory")
        cmd.add_argument("--N", type=int, help="collocation count (even)")
        cmd.add_argument("--dt", type=float, help="time step")
        cmd.add_argument("--seed-from", dest="seed_from",
                         help="state CSV used as the initial condition")
    return parser


def _resolve(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    overrides = {}
    if args.regime is not None:
        overrides["regime"] = args.regime
    if args.C is not None:
        overrides["C"] = args.C
    if args.out is not None:
        overrides["out_dir"] = args.out
    elif args.config is None and "BVAM_OUT_DIR" in os.environ:
        overrides["out_dir"] = os.environ["BVAM_OUT_DIR"]
    if args.N is not None:
        if args.N <= 0 or args.N % 2:
            raise ConfigError("--N must be a positive even integer")
        overrides["N"] = args.N
    if args.dt is not None:
        if args.dt <= 0:
            raise ConfigError("--dt must be positive")
        overrides["dt"] = args.dt
    return dataclasses.replace(cfg, **overrides)


def _setup(cfg: RunConfig):
    grid = SpectralGrid(cfg.N, cfg.Lx)
    params = cfg.parameters()
    os.makedirs(cfg.out_dir, exist_ok=True)
    return grid, params


def _initial_state(cfg: RunConfig, grid: SpectralGrid, seed_from):
    if seed_from:
        x, state, period = diagnostics.read_state(seed_from)
        if state.n != grid.N:
            raise ConfigError(
                f"seed state has N = {state.n}, run uses N = {grid.N}"
            )
        return state, period
    return equilibrium.cosine_guess(grid, cfg.guess_amplitude, cfg.guess_mode), None


def _continuation_config(cfg: RunConfig) -> continuation.ContinuationConfig:
    return continuation.ContinuationConfig(
        dt=cfg.dt, newton_tol=cfg.newton_tol, orbit_tol=cfg.orbit_tol,
        max_iter=cfg.max_iter, orbit_max_iter=cfg.orbit_max_iter,
        monodromy_h=cfg.monodromy_h, workers=cfg.workers,
        guess_amplitude=cfg.guess_amplitude, guess_mode=cfg.guess_mode,
        stability_threshold=cfg.stability_threshold, transient=cfg.transient,
    )


def _out(cfg: RunConfig, name: str) -> str:
    return os.path.join(cfg.out_dir, name)


def _cmd_simulate(cfg: RunConfig, args) -> int:
    grid, params = _setup(cfg)
    state, _ = _initial_state(cfg, grid, args.seed_from)
    traj = integrate(params, grid, state, cfg.t_end,
                     IntegratorConfig(dt=cfg.dt, record_every=cfg.record_every,
                                      divergence_threshold=cfg.divergence_threshold))
    diagnostics.export_trajectory(traj, grid, _out(cfg, "trajectory.csv"),
                                  config=cfg.as_dict())
    return 0


def _solve_equilibrium(cfg: RunConfig, grid, params, seed_from):
    guess, _ = _initial_state(cfg, grid, seed_from)
    result = equilibrium.newton_krylov_solve(params, grid, guess,
                                             tol=cfg.newton_tol,
                                             max_iter=cfg.max_iter)
    if not result.converged:
        raise SolverFailure(
            f"equilibrium solve did not converge "
            f"(residual {result.residual_norm:.3e} after {result.iterations} iterations)"
        )
    return result


def _cmd_equilibrium(cfg: RunConfig, args) -> int:
    grid, params = _setup(cfg)
    result = _solve_equilibrium(cfg, grid, params, args.seed_from)
    report = equilibrium.stability_spectrum(params, grid, result.state,
                                            cfg.stability_threshold)
    diagnostics.export_state(grid, result.state, _out(cfg, "state.csv"),
                             config=cfg.as_dict())
    diagnostics._write_csv(
        _out(cfg, "stability.csv"),
        ["eigenvalue_re", "eigenvalue_im"],
        ([ev.real, ev.imag] for ev in report.eigenvalues),
    )
    diagnostics._write_metadata(
        _out(cfg, "stability.csv"), cfg.as_dict(), grid,
        extra={"stable": report.stable, "hopf_candidate": report.hopf_candidate,
               "max_real_part": report.max_real_part,
               "residual_norm": result.residual_norm},
    )
    return 0


def _cmd_continue_eq(cfg: RunConfig, args) -> int:
    grid, params = _setup(cfg)
    guess, _ = _initial_state(cfg, grid, args.seed_from)
    branch = continuation.continue_equilibria(
        cfg.regime, params, cfg.C_start, cfg.C_end, cfg.C_steps, grid,
        _continuation_config(cfg), guess=guess)
    diagnostics.export_branch(branch, _out(cfg, "branch_eq.csv"), grid,
                              config=cfg.as_dict())
    if branch.diagnostic:
        raise SolverFailure(branch.diagnostic)
    return 0


def _seed_orbit(cfg: RunConfig, grid, params, seed_from):
    ccfg = _continuation_config(cfg)
    if seed_from:
        state, period = _initial_state(cfg, grid, seed_from)
        guess = orbits.PeriodicOrbit(anchor=state,
                                     period=period or cfg.period_guess)
        solved = orbits.solve_orbit(params, grid, guess, reference=state,
                                    dt=cfg.dt, tol=cfg.orbit_tol,
                                    max_iter=cfg.orbit_max_iter)
        if not solved.converged:
            raise SolverFailure(
                f"orbit solve did not converge (residual {solved.residual_norm:.3e})"
            )
        return solved
    result = _solve_equilibrium(cfg, grid, params, None)
    report = equilibrium.stability_spectrum(params, grid, result.state,
                                            cfg.stability_threshold)
    point = continuation.BranchPoint(C=params.C, solution=result.state,
                                     energy=0.0, stability=report)
    try:
        return continuation.hopf_seed_orbit(cfg.regime, params, point, grid,
                                            ccfg, period_guess=cfg.period_guess)
    except continuation.NoPeriodicityError as exc:
        raise SolverFailure(str(exc)) from exc


def _cmd_orbit(cfg: RunConfig, args) -> int:
    grid, params = _setup(cfg)
    orbit = _seed_orbit(cfg, grid, params, args.seed_from)
    mono = orbits.monodromy_matrix(params, grid, orbit, cfg.dt,
                                   h=cfg.monodromy_h, workers=cfg.workers)
    bif = orbits.classify_orbit_bifurcation(mono)
    diagnostics.export_state(grid, orbit.anchor, _out(cfg, "orbit.csv"),
                             config=cfg.as_dict(), period=orbit.period)
    diagnostics._write_csv(
        _out(cfg, "floquet.csv"),
        ["multiplier_re", "multiplier_im"],
        ([m.real, m.imag] for m in mono.multipliers),
    )
    diagnostics._write_metadata(
        _out(cfg, "floquet.csv"), cfg.as_dict(), grid,
        extra={"period": orbit.period, "residual_norm": orbit.residual_norm,
               "classification": bif.kind,
               "trivial_index": mono.trivial_index},
    )
    return 0


def _cmd_continue_orbit(cfg: RunConfig, args) -> int:
    grid, params = _setup(cfg)
    orbit = _seed_orbit(cfg, grid, params, args.seed_from)
    branch = continuation.continue_orbits(
        cfg.regime, params, orbit, params.C, cfg.delta_C, grid,
        _continuation_config(cfg))
    diagnostics.export_branch(branch, _out(cfg, "branch_orbit.csv"), grid,
                              config=cfg.as_dict())
    if branch.diagnostic:
        raise SolverFailure(branch.diagnostic)
    return 0


def _cmd_attractor(cfg: RunConfig, args, C: float | None = None) -> int:
    if C is not None:
        cfg = dataclasses.replace(cfg, C=C)
    grid, params = _setup(cfg)
    state, _ = _initial_state(cfg, grid, args.seed_from)
    # burn through the transient without recording, then sample
    state = flow_map(params, grid, state, cfg.tau, cfg.dt,
                     divergence_threshold=cfg.divergence_threshold)
    window = max(cfg.t_end, 2048 * cfg.record_every * cfg.dt)
    traj = integrate(params, grid, state, window,
                     IntegratorConfig(dt=cfg.dt, record_every=cfg.record_every,
                                      divergence_threshold=cfg.divergence_threshold))
    local = diagnostics.local_attractor(traj, grid, 0.0)
    global_ = diagnostics.energy_attractor(params, grid, traj, 0.0)
    diagnostics.export_attractor(local, _out(cfg, "attractor_local.csv"),
                                 grid, config=cfg.as_dict())
    diagnostics.export_attractor(global_, _out(cfg, "attractor_energy.csv"),
                                 grid, config=cfg.as_dict())
    sample_dt = float(np.median(np.diff(traj.times)))
    freqs, amps = amplitude_spectrum(traj.energies[:-1], spacing=sample_dt)
    diagnostics._write_csv(_out(cfg, "energy_spectrum.csv"),
                           ["f", "amplitude"], zip(freqs, amps))
    diagnostics._write_metadata(_out(cfg, "energy_spectrum.csv"),
                                cfg.as_dict(), grid)
    report = diagnostics.chaos_indicator(traj.energies[:-1], sample_dt,
                                         bound=cfg.divergence_threshold)
    with open(_out(cfg, "chaos.json"), "w") as fh:
        json.dump({"broadband": report.broadband,
                   "dominant_power_fraction": report.dominant_power_fraction,
                   "bounded": report.bounded}, fh, indent=2)
        fh.write("\n")
    return 0


def _cmd_road(cfg: RunConfig, args) -> int:
    return _cmd_attractor(cfg, args, C=ROAD_C[cfg.regime])


_COMMANDS = {
    "simulate": _cmd_simulate,
    "equilibrium": _cmd_equilibrium,
    "continue-eq": _cmd_continue_eq,
    "orbit": _cmd_orbit,
    "continue-orbit": _cmd_continue_orbit,
    "attractor": _cmd_attractor,
    "road": _cmd_road,
}


def cli_dispatch(argv: list[str] | None = None) -> int:
    """Run one CLI invocation; returns the process exit status."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = _resolve(args)
        return _COMMANDS[args.command](cfg, args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"bvamx: error: {exc}", file=sys.stderr)
        return 2
    except (SolverFailure, DivergenceError,
            orbits.DegenerateOrbitError,
            continuation.NoPeriodicityError) as exc:
        print(f"bvamx: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    raise SystemExit(cli_dispatch())
