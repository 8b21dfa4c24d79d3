"""Hopf transition and the first limit cycle: sweep the equilibrium branch
in C until the patterned state loses stability, then converge the emerging
periodic orbit by single shooting and report its Floquet multipliers.

Runs at N = 64 so the whole script finishes in a couple of minutes.
"""

import numpy as np

from bvamx import (
    ContinuationConfig,
    SpectralGrid,
    classify_orbit_bifurcation,
    continue_equilibria,
    hopf_seed_orbit,
    monodromy_matrix,
    regime_parameters,
)

grid = SpectralGrid(64, 5.0)
p = regime_parameters("linear", C=-0.5)
cfg = ContinuationConfig(dt=2e-3, guess_amplitude=1.0, transient=400.0)

branch = continue_equilibria("linear", p, -0.5, -1.1, 13, grid, cfg)
hopf = next(pt for pt in branch.points if pt.event == "hopf")
lead = hopf.stability.eigenvalues[0]
print(f"stability flip at C = {hopf.C:.3f}, "
      f"leading pair {lead.real:+.4f} +/- {abs(lead.imag):.4f}j")

# seed one step past onset: right at the flip the attracting cycle is
# barely attracting and the long transient still shadows unstable orbits
seed_pt = branch.points[branch.points.index(hopf) + 1]
p_seed = regime_parameters("linear", C=seed_pt.C)
orbit = hopf_seed_orbit("linear", p_seed, seed_pt, grid, cfg)
print(f"shooting converged at C = {seed_pt.C:.3f}: {orbit.converged}, "
      f"period T = {orbit.period:.4f}, residual {orbit.residual_norm:.2e}")

mono = monodromy_matrix(p_seed, grid, orbit, dt=cfg.dt)
mu = mono.multipliers[:4]
print("leading multipliers:", np.array2string(mu, precision=4))
print("classification:", classify_orbit_bifurcation(mono).kind)
