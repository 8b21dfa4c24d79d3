"""Parameter continuation in C for equilibria and periodic orbits.

Plain (naive) stepping with warm starts: each solve starts from the
previous solution. Equilibrium branches record energy and the full
stability report and flag the first stable -> unstable transition as the
Hopf event. Orbit branches record period, monodromy and classification,
and stop at the first instability (period doubling, fold or
Neimark-Sacker). Failed steps are retried with up to four halvings of the
parameter step before the branch is truncated.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import find_peaks

from . import equilibrium as eq
from . import orbits as orb
from .integrate import IntegratorConfig, integrate, flow_map
from .model import FieldPair, ModelParameters, energy
from .spectral import SpectralGrid

__all__ = [
    "BranchPoint",
    "Branch",
    "ContinuationConfig",
    "NoPeriodicityError",
    "continue_equilibria",
    "continue_orbits",
    "hopf_seed_orbit",
]


class NoPeriodicityError(RuntimeError):
    """No approximately periodic signal emerged within the transient budget."""


@dataclass
class BranchPoint:
    C: float
    solution: object  # FieldPair or PeriodicOrbit
    energy: float
    stability: object  # StabilityReport or MonodromyResult
    event: str | None = None
    period: float | None = None


@dataclass
class Branch:
    regime: str
    kind: str  # equilibrium | orbit
    points: list[BranchPoint] = field(default_factory=list)
    diagnostic: str | None = None

    def __len__(self) -> int:
        return len(self.points)

    def event_points(self) -> list[BranchPoint]:
        return [pt for pt in self.points if pt.event]


@dataclass(frozen=True)
class ContinuationConfig:
    """Solver settings shared by the sweep drivers."""

    dt: float = 5e-4
    newton_tol: float = 1e-10
    orbit_tol: float = orb.ORBIT_TOLERANCE
    max_iter: int = 50
    orbit_max_iter: int = 20
    monodromy_h: float = orb.MONODROMY_STEP
    workers: int = 1
    guess_amplitude: float = 0.5
    guess_mode: int = 3
    stability_threshold: float = eq.STABILITY_THRESHOLD
    transient: float = 50.0
    perturbation: float = 1e-3
    max_orbit_steps: int = 200
    max_step_halvings: int = 4


def continue_equilibria(regime: str, params: ModelParameters,
                        C_start: float, C_end: float, steps: int,
                        grid: SpectralGrid,
                        cfg: ContinuationConfig = ContinuationConfig(),
                        guess: FieldPair | None = None) -> Branch:
    """Trace the equilibrium branch over ``steps`` values of C.

    Warm-starts every Newton-Krylov solve from the previous solution and
    flags the first stability flip as the Hopf event. On a failed solve the
    parameter step is halved (up to four times) to walk up to the target C;
    if that also fails the branch is truncated, keeping prior points.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    c_values = np.linspace(C_start, C_end, steps)
    branch = Branch(regime=regime, kind="equilibrium")
    state = guess if guess is not None else eq.cosine_guess(
        grid, cfg.guess_amplitude, cfg.guess_mode)
    was_stable: bool | None = None
    prev_c = C_start
    for c in c_values:
        result = _solve_towards(params, grid, state, prev_c, float(c), cfg)
        if result is None:
            branch.diagnostic = (
                f"equilibrium solve failed at C = {c:.6g}; branch truncated"
            )
            break
        state = result.state
        report = eq.stability_spectrum(params.with_C(float(c)), grid, state,
                                       cfg.stability_threshold)
        event = None
        if was_stable is True and not report.stable:
            event = "hopf" if report.hopf_candidate else "instability"
        was_stable = report.stable
        branch.points.append(BranchPoint(
            C=float(c),
            solution=state.copy(),
            energy=energy(params.with_C(float(c)), grid, state),
            stability=report,
            event=event,
        ))
        prev_c = float(c)
    return branch


def _solve_towards(params: ModelParameters, grid: SpectralGrid,
                   state: FieldPair, c_from: float, c_to: float,
                   cfg: ContinuationConfig):
    """Solve at c_to, bisecting the parameter step on failure."""
    result = eq.newton_krylov_solve(params.with_C(c_to), grid, state,
                                    tol=cfg.newton_tol, max_iter=cfg.max_iter)
    if result.converged:
        return result
    for halvings in range(1, cfg.max_step_halvings + 1):
        n_sub = 2 ** halvings
        current = state
        ok = True
        for sub in range(1, n_sub + 1):
            c_sub = c_from + (c_to - c_from) * sub / n_sub
            res = eq.newton_krylov_solve(params.with_C(c_sub), grid, current,
                                         tol=cfg.newton_tol,
                                         max_iter=cfg.max_iter)
            if not res.converged:
                ok = False
                break
            current = res.state
        if ok:
            return res
    return None


def continue_orbits(regime: str, params: ModelParameters,
                    branch_start: orb.PeriodicOrbit, C_start: float,
                    delta_C: float, grid: SpectralGrid,
                    cfg: ContinuationConfig = ContinuationConfig()) -> Branch:
    """Continue a converged orbit in C until it loses stability.

    Per step: warm-start the shooting solve from the previous orbit (which
    also provides the phase reference), then compute the monodromy matrix
    and classify. The branch stops and is flagged at the first escaping
    multiplier; period per point is recorded for the period-vs-C data.
    """
    if not branch_start.converged:
        raise ValueError("continuation must start from a converged orbit")
    if delta_C == 0:
        raise ValueError("delta_C must be nonzero")
    branch = Branch(regime=regime, kind="orbit")
    orbit = branch_start
    c = float(C_start)
    for _ in range(cfg.max_orbit_steps):
        p_c = params.with_C(c)
        mono = orb.monodromy_matrix(p_c, grid, orbit, cfg.dt,
                                    h=cfg.monodromy_h, workers=cfg.workers)
        bif = orb.classify_orbit_bifurcation(mono)
        branch.points.append(BranchPoint(
            C=c,
            solution=orbit,
            energy=energy(p_c, grid, orbit.anchor),
            stability=mono,
            event=None if bif.kind == "none" else bif.kind,
            period=orbit.period,
        ))
        if bif.kind != "none":
            break
        nxt = _orbit_step(params, grid, orbit, c, c + delta_C, cfg)
        if nxt is None:
            branch.diagnostic = (
                f"orbit solve failed at C = {c + delta_C:.6g}; branch truncated"
            )
            break
        orbit = nxt
        c = c + delta_C
    return branch


def _orbit_step(params: ModelParameters, grid: SpectralGrid,
                orbit: orb.PeriodicOrbit, c_from: float, c_to: float,
                cfg: ContinuationConfig):
    """One orbit continuation step with parameter-step halving on failure."""
    for halvings in range(cfg.max_step_halvings + 1):
        n_sub = 2 ** halvings
        current = orbit
        ok = True
        for sub in range(1, n_sub + 1):
            c_sub = c_from + (c_to - c_from) * sub / n_sub
            guess = orb.PeriodicOrbit(anchor=current.anchor.copy(),
                                      period=current.period)
            try:
                res = orb.solve_orbit(params.with_C(c_sub), grid, guess,
                                      reference=current.anchor, dt=cfg.dt,
                                      tol=cfg.orbit_tol,
                                      max_iter=cfg.orbit_max_iter)
            except orb.DegenerateOrbitError:
                return None
            if not res.converged:
                ok = False
                break
            current = res
        if ok:
            return current
    return None


def hopf_seed_orbit(regime: str, params: ModelParameters,
                    hopf_point: BranchPoint, grid: SpectralGrid,
                    cfg: ContinuationConfig = ContinuationConfig(),
                    period_guess: float = 3.0,
                    observation_window: float = 20.0) -> orb.PeriodicOrbit:
    """Seed a periodic orbit by simulation from an unstable steady state.

    Perturbs the equilibrium along its leading eigenvector, integrates
    through a transient, and checks that the energy signal oscillates
    (successive maxima with consistent spacing). The post-transient state
    anchors the shooting solve with the configured period guess.
    """
    report = hopf_point.stability
    if report.stable:
        raise NoPeriodicityError(
            "steady state is stable: trajectory decays back to equilibrium"
        )
    base = hopf_point.solution
    direction = FieldPair.from_vector(report.leading_eigenvector)
    state = FieldPair(base.u1 + cfg.perturbation * direction.u1,
                      base.u2 + cfg.perturbation * direction.u2)
    p_c = params.with_C(hopf_point.C)
    state = flow_map(p_c, grid, state, cfg.transient, cfg.dt)

    record = max(1, int(round(0.01 / cfg.dt)))
    traj = integrate(p_c, grid, state, observation_window,
                     IntegratorConfig(dt=cfg.dt, record_every=record))
    peaks, _ = find_peaks(traj.energies,
                          prominence=1e-9 * max(1.0, np.ptp(traj.energies)))
    if len(peaks) < 2:
        raise NoPeriodicityError(
            "no oscillation detected in the energy signal after the transient"
        )
    spacings = np.diff(traj.times[peaks])
    if np.ptp(spacings) > 0.5 * np.mean(spacings):
        raise NoPeriodicityError("energy maxima are not evenly spaced")

    # anchor at a peak near mid-window, then refine the period by state
    # recurrence: energy maxima alone are ambiguous once the energy signal
    # develops two humps per cycle
    half = np.searchsorted(traj.times[peaks], 0.5 * traj.times[-1])
    anchor_idx = int(peaks[min(half, len(peaks) - 1)])
    anchor = traj.states[anchor_idx]
    t0 = float(traj.times[anchor_idx])
    vec0 = anchor.to_vector()
    window = ((traj.times >= t0 + 0.5 * period_guess)
              & (traj.times <= t0 + 2.5 * period_guess))
    period = period_guess
    if np.any(window):
        idxs = np.nonzero(window)[0]
        dists = np.array([np.linalg.norm(traj.states[i].to_vector() - vec0)
                          for i in idxs])
        # earliest near-minimal recurrence, not the global minimum: the
        # state also recurs at every integer multiple of the period
        mins, _ = find_peaks(-dists)
        cands = mins[dists[mins] <= 1.5 * dists.min()] if len(mins) else []
        best = int(cands[0]) if len(cands) else int(np.argmin(dists))
        period = float(traj.times[idxs[best]] - t0)
    guess = orb.PeriodicOrbit(anchor=anchor, period=period)
    solved = orb.solve_orbit(p_c, grid, guess, reference=anchor, dt=cfg.dt,
                             tol=cfg.orbit_tol, max_iter=cfg.orbit_max_iter)
    if not solved.converged:
        raise NoPeriodicityError(
            f"shooting failed to converge from the simulated orbit "
            f"(residual {solved.residual_norm:.3e})"
        )
    return solved
