"""Branch tracing in C: equilibrium sweeps, orbit continuation, Hopf seeding."""

import numpy as np
import pytest

from bvamx import (
    FieldPair,
    SpectralGrid,
    regime_parameters,
)
from bvamx.continuation import (
    Branch,
    BranchPoint,
    ContinuationConfig,
    NoPeriodicityError,
    continue_equilibria,
    continue_orbits,
    hopf_seed_orbit,
)
from bvamx.equilibrium import cosine_guess, newton_krylov_solve, stability_spectrum
from bvamx.model import energy


GRID = SpectralGrid(32, 5.0)
CFG = ContinuationConfig(dt=2e-3)


@pytest.fixture(scope="module")
def eq_branch():
    p = regime_parameters("linear", C=-0.5)
    return continue_equilibria("linear", p, -0.5, -1.1, 13, GRID, CFG)


class TestEquilibriumContinuation:
    def test_full_branch(self, eq_branch):
        assert eq_branch.kind == "equilibrium"
        assert eq_branch.diagnostic is None
        assert len(eq_branch.points) == 13
        cs = [pt.C for pt in eq_branch.points]
        assert cs[0] == -0.5 and cs[-1] == pytest.approx(-1.1)
        assert np.allclose(np.diff(cs), -0.05)

    def test_single_hopf_event(self, eq_branch):
        events = [pt for pt in eq_branch.points if pt.event]
        assert len(events) == 1
        assert events[0].event == "hopf"
        # the transition happens where the sweep crosses the onset
        assert -1.0 < events[0].C < -0.85

    def test_stability_flips_once(self, eq_branch):
        flags = [pt.stability.stable for pt in eq_branch.points]
        flips = sum(1 for a, b in zip(flags, flags[1:]) if a != b)
        assert flips == 1
        assert flags[0] and not flags[-1]

    def test_pattern_tracked_not_zero_state(self, eq_branch):
        for pt in eq_branch.points:
            assert np.max(np.abs(pt.solution.u1)) > 0.1
            assert np.isfinite(pt.energy)
            assert pt.energy > 0

    def test_event_points_helper(self, eq_branch):
        evs = eq_branch.event_points()
        assert len(evs) == 1 and evs[0].event == "hopf"

    def test_truncation_on_hopeless_solves(self):
        # one Newton iteration at an extreme tolerance cannot converge, so
        # every halved step fails and the branch reports the truncation
        p = regime_parameters("linear", C=-0.5)
        cfg = ContinuationConfig(dt=2e-3, newton_tol=1e-16, max_iter=1,
                                 max_step_halvings=1)
        branch = continue_equilibria("linear", p, -0.5, -0.6, 3, GRID, cfg,
                                     guess=cosine_guess(GRID))
        assert branch.diagnostic is not None
        assert "truncated" in branch.diagnostic

    def test_invalid_steps(self):
        p = regime_parameters("linear", C=-0.5)
        with pytest.raises(ValueError):
            continue_equilibria("linear", p, -0.5, -1.0, 0, GRID, CFG)


@pytest.fixture(scope="module")
def seeded_orbit():
    p = regime_parameters("linear", C=-1.0)
    eq = newton_krylov_solve(p, GRID, cosine_guess(GRID, amplitude=1.0))
    rep = stability_spectrum(p, GRID, eq.state)
    point = BranchPoint(C=-1.0, solution=eq.state,
                        energy=energy(p, GRID, eq.state), stability=rep)
    cfg = ContinuationConfig(dt=2e-3, transient=400.0)
    return p, hopf_seed_orbit("linear", p, point, GRID, cfg)


class TestOrbitContinuation:
    def test_seeded_orbit_near_expected_period(self, seeded_orbit):
        p, orbit = seeded_orbit
        assert orbit.converged
        assert abs(orbit.period - 3.0) < 1.5

    def test_short_continuation(self, seeded_orbit):
        p, orbit = seeded_orbit
        cfg = ContinuationConfig(dt=2e-3, max_orbit_steps=3)
        branch = continue_orbits("linear", p, orbit, -1.0, -0.02, GRID, cfg)
        assert branch.kind == "orbit"
        assert 1 <= len(branch.points) <= 3
        for pt in branch.points:
            assert pt.period is not None and pt.period > 0
            assert pt.stability.matrix.shape == (64, 64)
            # trivial multiplier present on every converged orbit
            trivial = pt.stability.multipliers[pt.stability.trivial_index]
            assert abs(trivial - 1.0) < 1e-2
        # period varies continuously along the branch
        periods = [pt.period for pt in branch.points]
        for a, b in zip(periods, periods[1:]):
            assert abs(b - a) < 0.1 * a
        # stable this close to onset: no event inside the short window
        assert all(pt.event is None for pt in branch.points)

    def test_requires_converged_start(self, seeded_orbit):
        p, orbit = seeded_orbit
        from bvamx.orbits import PeriodicOrbit

        bad = PeriodicOrbit(anchor=orbit.anchor, period=orbit.period)
        with pytest.raises(ValueError):
            continue_orbits("linear", p, bad, -1.0, -0.01, GRID, CFG)
        with pytest.raises(ValueError):
            continue_orbits("linear", p, orbit, -1.0, 0.0, GRID, CFG)


class TestHopfSeeding:
    def test_stable_point_rejected(self):
        p = regime_parameters("linear", C=-0.5)
        eq = newton_krylov_solve(p, GRID, cosine_guess(GRID))
        rep = stability_spectrum(p, GRID, eq.state)
        assert rep.stable
        point = BranchPoint(C=-0.5, solution=eq.state,
                            energy=energy(p, GRID, eq.state), stability=rep)
        with pytest.raises(NoPeriodicityError, match="stable"):
            hopf_seed_orbit("linear", p, point, GRID, CFG)


class TestConfig:
    def test_frozen(self):
        with pytest.raises(Exception):
            CFG.dt = 1.0
