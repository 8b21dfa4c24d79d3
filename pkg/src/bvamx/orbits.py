"""Periodic orbits by single shooting, monodromy matrices and Floquet theory.

A periodic orbit is the unknown pair (anchor state, period T) solving

    phi^T(X) - X = 0,
    (phi^T(X) - X) . F(X_ref) = 0,

where the scalar phase row is the periodicity defect projected on the
vector field at a reference state (the previous continuation solution).
The 2N+1 system is solved jointly by the same Jacobian-free Newton-GMRES
machinery as the equilibrium solver. Stability comes from the monodromy
matrix, built column-by-column from finite differences of the flow, whose
eigenvalues are the Floquet multipliers.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import LinearOperator, gmres

from .equilibrium import _jfnk_matvec, residual
from .integrate import flow_map, flow_map_batch
from .model import FieldPair, ModelParameters
from .spectral import DivergenceError, SpectralGrid

__all__ = [
    "PeriodicOrbit",
    "MonodromyResult",
    "OrbitBifurcation",
    "DegenerateOrbitError",
    "shooting_residual",
    "solve_orbit",
    "monodromy_matrix",
    "classify_orbit_bifurcation",
]

ORBIT_TOLERANCE = 5e-4
MONODROMY_STEP = 1e-3

#: |Im mu| below this counts as a real multiplier in the classification.
DEFAULT_TOL_ANGLE = 1e-3

#: |mu| must exceed 1 + this to count as leaving the unit circle; absorbs
#: the spatial-translation multiplier (exactly 1 for patterned orbits) and
#: the finite-difference error of the monodromy columns.
DEFAULT_ESCAPE_TOL = 2e-2


class DegenerateOrbitError(RuntimeError):
    """The orbit candidate collapsed onto a steady state."""


@dataclass
class PeriodicOrbit:
    anchor: FieldPair
    period: float
    residual_norm: float = np.inf
    converged: bool = False

    def __post_init__(self):
        if not self.period > 0:
            raise ValueError("period must be positive")


@dataclass
class MonodromyResult:
    matrix: np.ndarray
    multipliers: np.ndarray
    trivial_index: int


@dataclass
class OrbitBifurcation:
    kind: str  # none | fold | period_doubling | neimark_sacker
    critical_multiplier: complex


def shooting_residual(p: ModelParameters, grid: SpectralGrid,
                      candidate: PeriodicOrbit, reference: FieldPair,
                      dt: float) -> np.ndarray:
    """Length-(2N+1) shooting residual.

    First 2N entries: phi^T(anchor) - anchor. Last entry: that defect
    dotted with F(reference), the coarse first-order phase condition.
    """
    defect = (
        flow_map(p, grid, candidate.anchor, candidate.period, dt).to_vector()
        - candidate.anchor.to_vector()
    )
    phase = float(defect @ residual(p, grid, reference))
    return np.concatenate([defect, [phase]])


def _unpack(y: np.ndarray) -> tuple[FieldPair, float]:
    return FieldPair.from_vector(y[:-1]), float(y[-1])


def solve_orbit(p: ModelParameters, grid: SpectralGrid, guess: PeriodicOrbit,
                reference: FieldPair, dt: float,
                tol: float = ORBIT_TOLERANCE, max_iter: int = 20,
                gmres_restart: int = 50, gmres_rtol: float = 1e-3,
                max_halvings: int = 8,
                equilibrium_tol: float = 1e-8,
                min_period: float | None = None) -> PeriodicOrbit:
    """Newton-Krylov on the joint (anchor, T) shooting system.

    Raises :class:`DegenerateOrbitError` when the iterate collapses onto a
    steady state (vanishing vector field at the anchor), which satisfies
    the periodicity rows for every T. Non-convergence is reported through
    the ``converged`` flag, not an exception.

    ``min_period`` (default: a quarter of the guess period) keeps the
    solve away from the spurious T -> 0 root, where the periodicity defect
    vanishes for any anchor.
    """
    if min_period is None:
        min_period = 0.25 * guess.period
    f_ref = residual(p, grid, reference)

    def shoot(y: np.ndarray) -> np.ndarray:
        anchor, period = _unpack(y)
        if period <= 0:
            raise ValueError("period went non-positive during the solve")
        defect = flow_map(p, grid, anchor, period, dt).to_vector() - y[:-1]
        return np.concatenate([defect, [float(defect @ f_ref)]])

    y = np.concatenate([guess.anchor.to_vector(), [guess.period]])
    fy = shoot(y)
    norm = float(np.linalg.norm(fy))
    iterations = 0
    for iterations in range(max_iter):
        anchor, _ = _unpack(y)
        if float(np.linalg.norm(residual(p, grid, anchor))) < equilibrium_tol:
            raise DegenerateOrbitError(
                "orbit candidate converged to a steady state "
                f"(||F(anchor)|| < {equilibrium_tol:g})"
            )
        if norm <= tol:
            break
        op = LinearOperator(
            (y.size, y.size),
            matvec=lambda v: _jfnk_matvec(shoot, y, fy, v),
        )
        step, _ = gmres(op, -fy, rtol=gmres_rtol, restart=gmres_restart,
                        maxiter=4)
        if not np.all(np.isfinite(step)) or np.linalg.norm(step) == 0.0:
            break
        lam = 1.0
        trial, f_trial, trial_norm = y, fy, norm
        for _ in range(max_halvings + 1):
            cand = y + lam * step
            if cand[-1] <= min_period:  # stay away from the T -> 0 root
                lam *= 0.5
                continue
            try:
                f_cand = shoot(cand)
            except DivergenceError:  # overlong step blew up: backtrack
                lam *= 0.5
                continue
            cand_norm = float(np.linalg.norm(f_cand))
            if cand_norm < norm:
                trial, f_trial, trial_norm = cand, f_cand, cand_norm
                break
            lam *= 0.5
        else:
            break
        y, fy, norm = trial, f_trial, trial_norm
    else:
        iterations = max_iter
    anchor, period = _unpack(y)
    return PeriodicOrbit(anchor=anchor, period=period, residual_norm=norm,
                         converged=bool(norm <= tol))


def _monodromy_column(args):
    p, grid, anchor_vec, period, dt, h, base_vec, i = args
    perturbed = anchor_vec.copy()
    perturbed[i] += h
    out = flow_map(p, grid, FieldPair.from_vector(perturbed), period, dt)
    return i, (out.to_vector() - base_vec) / h


def monodromy_from_flow(flow, x0: np.ndarray, h: float) -> np.ndarray:
    """Finite-difference linearization of an arbitrary flow map at ``x0``.

    Column i = (flow(x0 + h e_i) - flow(x0)) / h. Exposed separately so the
    column machinery can be validated on flows with known linearizations.
    """
    base = flow(x0)
    mat = np.empty((base.size, x0.size))
    for i in range(x0.size):
        perturbed = x0.copy()
        perturbed[i] += h
        mat[:, i] = (flow(perturbed) - base) / h
    return mat


def monodromy_matrix(p: ModelParameters, grid: SpectralGrid,
                     orbit: PeriodicOrbit, dt: float,
                     h: float = MONODROMY_STEP,
                     workers: int = 1) -> MonodromyResult:
    """Monodromy matrix of a converged orbit and its Floquet multipliers.

    Columns are independent flow evaluations (2N + 1 flows in total,
    including the reused base flow) and are computed in parallel when
    ``workers`` > 1; assembly is by column index, so the matrix is
    reproducible regardless of scheduling. Multipliers are sorted by
    descending modulus; ``trivial_index`` points at the one closest to 1.
    """
    anchor_vec = orbit.anchor.to_vector()
    base_vec = flow_map(p, grid, orbit.anchor, orbit.period, dt).to_vector()
    n = anchor_vec.size
    mat = np.empty((n, n))
    if workers > 1:
        jobs = [
            (p, grid, anchor_vec, orbit.period, dt, h, base_vec, i)
            for i in range(n)
        ]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for i, col in pool.map(_monodromy_column, jobs,
                                   chunksize=max(1, n // (4 * workers))):
                mat[:, i] = col
    else:
        # one vectorized flow over all 2N perturbed states: same columns
        # as the per-column loop, one FFT batch per RK4 stage
        batch = np.empty((2, n, grid.N))
        batch[0] = orbit.anchor.u1
        batch[1] = orbit.anchor.u2
        for i in range(grid.N):
            batch[0, i, i] += h
            batch[1, grid.N + i, i] += h
        out = flow_map_batch(p, grid, batch, orbit.period, dt)
        flat = np.concatenate([out[0], out[1]], axis=1)  # (2N, 2N)
        mat[:] = (flat - base_vec).T / h
    mult = np.linalg.eigvals(mat)
    mult = mult[np.argsort(-np.abs(mult), kind="stable")]
    trivial = int(np.argmin(np.abs(mult - 1.0)))
    return MonodromyResult(matrix=mat, multipliers=mult, trivial_index=trivial)


def classify_orbit_bifurcation(result: MonodromyResult,
                               tol_angle: float = DEFAULT_TOL_ANGLE,
                               escape_tol: float = DEFAULT_ESCAPE_TOL) -> OrbitBifurcation:
    """Classify how the orbit loses stability from its Floquet multipliers.

    The trivial multiplier is excluded; if everything else stays inside the
    unit circle the kind is "none". Otherwise the largest-modulus escaping
    multiplier decides: real negative -> period doubling, real positive ->
    fold, complex pair -> Neimark-Sacker.

    ``escape_tol`` widens the unit circle for the escape test: with
    periodic boundary conditions spatial translation contributes a second
    multiplier at exactly 1 for any patterned orbit, and finite-difference
    monodromy noise puts it on either side of the circle at random. Only a
    modulus beyond 1 + escape_tol counts as an escape.
    """
    mult = result.multipliers
    rest = np.delete(mult, result.trivial_index)
    if rest.size == 0 or np.max(np.abs(rest)) <= 1.0 + escape_tol:
        return OrbitBifurcation(kind="none", critical_multiplier=0j)
    critical = rest[int(np.argmax(np.abs(rest)))]
    if abs(critical.imag) <= tol_angle:
        kind = "period_doubling" if critical.real < 0 else "fold"
    else:
        kind = "neimark_sacker"
    return OrbitBifurcation(kind=kind, critical_multiplier=complex(critical))


def default_workers() -> int:
    """Worker count for monodromy columns (half the CPUs, at least 1)."""
    return max(1, (os.cpu_count() or 2) // 2)
