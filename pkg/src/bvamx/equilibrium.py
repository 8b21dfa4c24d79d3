"""Steady states by matrix-free Newton-Krylov, and their linear stability.

The stationary system is the real-space time derivative (inverse transform
of the Fourier-space RHS) set to zero. The Newton direction is obtained
from restarted GMRES with Jacobian-vector products by directional finite
differences, so no Jacobian is ever assembled for the solve. For stability
analysis the linearized operator *is* assembled densely (guarded to
N <= 2048) from the pointwise Jacobians and the spectral Laplacian matrix,
and its full spectrum is computed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import LinearOperator, gmres

from .model import (
    FieldPair,
    ModelParameters,
    potential_jacobian,
    reaction_jacobian,
)
from .spectral import SpectralGrid, inverse_transform, rhs_fourier

__all__ = [
    "EquilibriumResult",
    "StabilityReport",
    "residual",
    "cosine_guess",
    "newton_krylov_solve",
    "laplacian_matrix",
    "assemble_linearization",
    "stability_spectrum",
]

DENSE_GUARD = 2048

# threshold on eigenvalue real parts, avoiding numerical false positives
STABILITY_THRESHOLD = 1e-3


@dataclass
class EquilibriumResult:
    state: FieldPair
    residual_norm: float
    iterations: int
    converged: bool


@dataclass
class StabilityReport:
    """Full spectrum of the linearization at an equilibrium.

    ``hopf_candidate`` is set when the two leading eigenvalues form a
    complex-conjugate pair with imaginary part above the threshold.
    ``leading_eigenvector`` (length 2N, real part of the leading mode) is
    kept for seeding departures from unstable states.
    """

    eigenvalues: np.ndarray
    max_real_part: float
    stable: bool
    hopf_candidate: bool
    leading_eigenvector: np.ndarray
    threshold: float = STABILITY_THRESHOLD


def residual(p: ModelParameters, grid: SpectralGrid, state: FieldPair) -> np.ndarray:
    """Real-space stationary residual, both species concatenated (length 2N)."""
    f1_hat, f2_hat = rhs_fourier(p, grid, state)
    return np.concatenate([
        inverse_transform(grid, f1_hat),
        inverse_transform(grid, f2_hat),
    ])


def cosine_guess(grid: SpectralGrid, amplitude: float = 0.5, mode: int = 3,
                 amplitude2: float | None = None, mode2: int | None = None) -> FieldPair:
    """Initial guess u_i = A_i cos(k_m x) with grid wavenumber k_m = pi*m/Lx.

    Mode 3 on Lx = 5 gives the three-stripe pattern (k ~ 1.9) that the
    Turing band selects.
    """
    a2 = amplitude if amplitude2 is None else amplitude2
    m2 = mode if mode2 is None else mode2
    k1 = np.pi * mode / grid.Lx
    k2 = np.pi * m2 / grid.Lx
    return FieldPair(amplitude * np.cos(k1 * grid.x), a2 * np.cos(k2 * grid.x))


def _residual_vec(p, grid, v: np.ndarray) -> np.ndarray:
    return residual(p, grid, FieldPair.from_vector(v))


def _jfnk_matvec(func, x, fx, v):
    """Directional finite-difference Jacobian-vector product."""
    norm_v = np.linalg.norm(v)
    if norm_v == 0.0:
        return np.zeros_like(v)
    h = np.sqrt(np.finfo(float).eps) * (1.0 + np.linalg.norm(x)) / norm_v
    return (func(x + h * v) - fx) / h


def zero_state_preconditioner(p: ModelParameters, grid: SpectralGrid) -> LinearOperator:
    """Inverse of the linearization at the homogeneous zero state.

    Block-diagonal per Fourier mode (2x2 blocks), so it is applied exactly
    at FFT cost. The stationary Jacobian at any smooth state differs from
    this by bounded pointwise terms, which makes GMRES on the
    preconditioned system converge in a handful of iterations where the
    raw -k^2 diffusion scales stall it.
    """
    k2 = grid.k ** 2
    a11 = p.eta - p.d1 * k2
    a12 = np.full_like(k2, p.eta * p.a)
    a21 = np.full_like(k2, p.eta * p.H)
    a22 = p.eta * p.b - p.d2 * k2
    det = a11 * a22 - a12 * a21
    # guard nearly singular modes (edges of the Turing band)
    det = np.where(np.abs(det) < 1e-8, 1.0, det)

    def apply(v: np.ndarray) -> np.ndarray:
        n = grid.N
        z = np.fft.fft(v.reshape(2, n)) / n
        w1 = (a22 * z[0] - a12 * z[1]) / det
        w2 = (-a21 * z[0] + a11 * z[1]) / det
        out = (np.fft.ifft(np.stack([w1, w2])) * n).real
        return out.reshape(-1)

    return LinearOperator((2 * grid.N, 2 * grid.N), matvec=apply)


def newton_krylov_solve(p: ModelParameters, grid: SpectralGrid,
                        guess: FieldPair, tol: float = 1e-10,
                        max_iter: int = 50,
                        gmres_restart: int = 50,
                        gmres_rtol: float = 1e-3,
                        max_halvings: int = 8) -> EquilibriumResult:
    """Find a steady state by Jacobian-free Newton-GMRES.

    Inner solves are loose (relative tolerance ``gmres_rtol``); the Newton
    step is damped by halving (at most ``max_halvings`` times) whenever the
    residual norm would increase. Returns the best iterate with a
    convergence flag; never raises on non-convergence.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    x = guess.to_vector()
    fx = _residual_vec(p, grid, x)
    norm = float(np.linalg.norm(fx))
    iterations = 0
    precond = zero_state_preconditioner(p, grid)
    for iterations in range(max_iter):
        if norm <= tol:
            break
        op = LinearOperator(
            (x.size, x.size),
            matvec=lambda v: _jfnk_matvec(lambda y: _residual_vec(p, grid, y), x, fx, v),
        )
        step, _ = gmres(op, -fx, M=precond, rtol=gmres_rtol,
                        restart=gmres_restart, maxiter=4)
        if not np.all(np.isfinite(step)) or np.linalg.norm(step) == 0.0:
            break
        lam = 1.0
        for _ in range(max_halvings + 1):
            trial = x + lam * step
            f_trial = _residual_vec(p, grid, trial)
            trial_norm = float(np.linalg.norm(f_trial))
            if trial_norm < norm or not np.isfinite(trial_norm):
                break
            lam *= 0.5
        else:
            break
        if not np.isfinite(trial_norm) or trial_norm >= norm:
            break
        x, fx, norm = trial, f_trial, trial_norm
    else:
        iterations = max_iter
    return EquilibriumResult(
        state=FieldPair.from_vector(x),
        residual_norm=norm,
        iterations=iterations,
        converged=bool(norm <= tol),
    )


_LAPLACIAN_CACHE: dict[tuple[int, float], np.ndarray] = {}


def laplacian_matrix(grid: SpectralGrid) -> np.ndarray:
    """Dense N x N spectral Laplacian (symbol -k^2 conjugated by the DFT).

    Built by transforming the identity column-by-column; cached per grid.
    Symmetric and real to roundoff; annihilates constants.
    """
    if grid.N > DENSE_GUARD:
        raise ValueError(f"dense assembly guarded to N <= {DENSE_GUARD}")
    key = (grid.N, grid.Lx)
    cached = _LAPLACIAN_CACHE.get(key)
    if cached is not None:
        return cached
    eye_hat = np.fft.fft(np.eye(grid.N), axis=0)
    lap = np.fft.ifft(-grid.k[:, None] ** 2 * eye_hat, axis=0)
    mat = np.ascontiguousarray(lap.real)
    mat.setflags(write=False)
    _LAPLACIAN_CACHE[key] = mat
    return mat


def assemble_linearization(p: ModelParameters, grid: SpectralGrid,
                           state: FieldPair) -> np.ndarray:
    """Dense 2N x 2N linearized operator around ``state``.

    Block (i, j) = diag(dR_i/du_j) + Lap_N @ diag(dmu_i/du_j), the operator
    ordering Lap(coefficient * du) putting the Laplacian on the left.
    """
    if grid.N > DENSE_GUARD:
        raise ValueError(f"dense assembly guarded to N <= {DENSE_GUARD}")
    lap = laplacian_matrix(grid)
    rj = reaction_jacobian(p, state.u1, state.u2)
    pj = potential_jacobian(p, state.u1, state.u2)
    n = grid.N
    out = np.empty((2 * n, 2 * n))
    for i in range(2):
        for j in range(2):
            block = lap * np.broadcast_to(pj[i][j], (n,))  # Lap_N @ diag(...)
            block[np.arange(n), np.arange(n)] += np.broadcast_to(rj[i][j], (n,))
            out[i * n:(i + 1) * n, j * n:(j + 1) * n] = block
    return out


def stability_spectrum(p: ModelParameters, grid: SpectralGrid,
                       state: FieldPair,
                       threshold: float = STABILITY_THRESHOLD) -> StabilityReport:
    """Eigen-decompose the assembled linearization and classify stability.

    Eigenvalues are sorted by descending real part; the state is stable
    when the largest real part stays below ``threshold``.
    """
    mat = assemble_linearization(p, grid, state)
    eigvals, eigvecs = np.linalg.eig(mat)
    order = np.argsort(-eigvals.real, kind="stable")
    eigvals = eigvals[order]
    eigvecs = eigvecs[:, order]
    max_real = float(eigvals[0].real)
    lead = eigvals[0]
    hopf = bool(
        abs(lead.imag) > threshold
        and abs(eigvals[1] - np.conj(lead)) < 1e-8 * max(1.0, abs(lead))
    )
    vec = eigvecs[:, 0].real
    nrm = np.linalg.norm(vec)
    if nrm < 1e-12:  # purely imaginary eigenvector: use the imaginary part
        vec = eigvecs[:, 0].imag
        nrm = np.linalg.norm(vec)
    return StabilityReport(
        eigenvalues=eigvals,
        max_real_part=max_real,
        stable=bool(max_real < threshold),
        hopf_candidate=hopf,
        leading_eigenvector=vec / nrm,
        threshold=threshold,
    )
