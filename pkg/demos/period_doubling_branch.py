"""First period doubling on the oscillating-pattern branch: converge the
limit cycle at C = -1.30, continue it toward deeper C, and stop at the
first Floquet multiplier escaping through -1.

N = 64 keeps each continuation step under a minute; expect ~10 minutes
total. The acceptance suite repeats this at N = 128 for all four regimes.
"""

import numpy as np

from bvamx import (
    ContinuationConfig,
    SpectralGrid,
    continue_equilibria,
    continue_orbits,
    hopf_seed_orbit,
    regime_parameters,
)

grid = SpectralGrid(64, 5.0)
cfg = ContinuationConfig(dt=2e-3, guess_amplitude=1.0, transient=400.0,
                         max_orbit_steps=12)
C0 = -1.30

# walk the (unstable) equilibrium down to C0, then seed the attracting cycle
eq_branch = continue_equilibria("linear", regime_parameters("linear", C=-0.5),
                                -0.5, C0, 9, grid, cfg)
seed_pt = eq_branch.points[-1]
p0 = regime_parameters("linear", C=C0)
orbit = hopf_seed_orbit("linear", p0, seed_pt, grid, cfg, period_guess=3.1)
print(f"cycle at C = {C0}: T = {orbit.period:.4f}, "
      f"residual {orbit.residual_norm:.2e}")

branch = continue_orbits("linear", p0, orbit, C0, -0.02, grid, cfg)
for pt in branch.points:
    mono = pt.stability
    nontrivial = np.delete(mono.multipliers, mono.trivial_index)
    # skip the spatial-translation multiplier sitting at +1; the doubling
    # shows up as the next multiplier marching toward -1
    moving = nontrivial[np.abs(nontrivial - 1.0) > 5e-2]
    mu = moving[np.argmax(np.abs(moving))]
    tag = f"  <- {pt.event}" if pt.event else ""
    print(f"C = {pt.C:+.3f}  T = {pt.period:.4f}  "
          f"critical mu = {mu.real:+.4f}{mu.imag:+.4f}j{tag}")
