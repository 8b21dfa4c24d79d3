"""Fourier collocation grid, FFT conventions and the spectral right-hand side.

Conventions (fixed once, used by every module):

* collocation points x_j = -Lx + j*dx, j = 0..N-1, dx = 2*Lx/N, so x = 0
  sits exactly at index N/2;
* wavenumbers k_m = 2*pi*f_m with f_m = m/(2*Lx) in FFT ordering
  {0, 1, ..., N/2-1, -N/2, ..., -1}, i.e. k_m = pi*m/Lx;
* forward transform carries the 1/N normalization, the inverse is
  unnormalized, so the coefficient of a constant field c is c at m = 0.

Nonlinear terms are always evaluated in real space and then transformed.
The Laplacian symbol is -k^2 (diffusion is dissipative).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import FieldPair, ModelParameters, chemical_potentials, reaction_terms

__all__ = [
    "SpectralGrid",
    "SpectralError",
    "DivergenceError",
    "forward_transform",
    "inverse_transform",
    "spectral_laplacian",
    "spectral_gradient",
    "rhs_fourier",
    "amplitude_spectrum",
    "truncation_error_estimate",
    "dealias",
    "resample",
]


class SpectralError(ValueError):
    """Convention mismatch or contaminated spectrum."""


class DivergenceError(RuntimeError):
    """Trajectory blow-up: non-finite or out-of-range field values."""

    def __init__(self, message: str, time: float | None = None):
        super().__init__(message)
        self.time = time


@dataclass(frozen=True)
class SpectralGrid:
    """Collocation grid of even size N on [-Lx, Lx]."""

    N: int
    Lx: float
    dx: float = field(init=False)
    x: np.ndarray = field(init=False, repr=False)
    k: np.ndarray = field(init=False, repr=False)
    phase: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.N <= 0 or self.N % 2 != 0:
            raise ValueError("N must be a positive even integer")
        if not self.Lx > 0:
            raise ValueError("Lx must be positive")
        dx = 2.0 * self.Lx / self.N
        object.__setattr__(self, "dx", dx)
        x = -self.Lx + dx * np.arange(self.N)
        object.__setattr__(self, "x", x)
        # k_m = 2*pi*m*df with df = 1/(2*Lx), FFT ordering
        k = 2.0 * np.pi * np.fft.fftfreq(self.N, d=dx)
        object.__setattr__(self, "k", k)
        # the grid starts at x = -Lx, so the coefficient of e^{i k_m x}
        # differs from the raw DFT by e^{i k_m Lx} = (-1)^m
        m = np.rint(np.fft.fftfreq(self.N) * self.N).astype(int)
        object.__setattr__(self, "phase", np.where(m % 2 == 0, 1.0, -1.0))
        self.x.setflags(write=False)
        self.k.setflags(write=False)
        self.phase.setflags(write=False)

    @property
    def center_index(self) -> int:
        """Index of the collocation point x = 0."""
        return self.N // 2


def forward_transform(grid: SpectralGrid, u: np.ndarray) -> np.ndarray:
    """DFT with 1/N normalization; a constant field c maps to c at m = 0."""
    u = np.asarray(u)
    if u.shape[-1] != grid.N:
        raise ValueError(f"field length {u.shape[-1]} != grid N {grid.N}")
    return grid.phase * np.fft.fft(u) / grid.N


def inverse_transform(grid: SpectralGrid, coeffs: np.ndarray,
                      imag_tol: float = 1e-10) -> np.ndarray:
    """Exact inverse of :func:`forward_transform`, returning a real field.

    Imaginary residue below ``imag_tol`` (relative to the field scale) is
    discarded; anything larger signals a convention mismatch or NaN
    contamination and raises :class:`SpectralError`.
    """
    coeffs = np.asarray(coeffs)
    if coeffs.shape[-1] != grid.N:
        raise ValueError(f"spectrum length {coeffs.shape[-1]} != grid N {grid.N}")
    u = np.fft.ifft(grid.phase * coeffs) * grid.N
    scale = max(1.0, float(np.max(np.abs(u.real), initial=0.0)))
    imag_max = float(np.max(np.abs(u.imag), initial=0.0))
    if not np.isfinite(imag_max) or imag_max > imag_tol * scale:
        raise SpectralError(
            f"non-negligible imaginary part {imag_max:.3e} in inverse transform"
        )
    return np.ascontiguousarray(u.real)


def spectral_laplacian(grid: SpectralGrid, coeffs: np.ndarray) -> np.ndarray:
    """Multiply coefficient m by the Laplacian symbol -k_m^2."""
    return -grid.k ** 2 * coeffs


def spectral_gradient(grid: SpectralGrid, u: np.ndarray) -> np.ndarray:
    """First derivative of a real field, computed spectrally."""
    du = np.fft.ifft(1j * grid.k * np.fft.fft(u))
    return du.real


def dealias(grid: SpectralGrid, coeffs: np.ndarray) -> np.ndarray:
    """Zero modes above 2/3 Nyquist (optional robustness measure)."""
    m = np.abs(np.fft.fftfreq(grid.N, d=1.0 / grid.N))
    out = np.array(coeffs, copy=True)
    out[..., m > grid.N / 3] = 0.0
    return out


def _rhs_hat(p: ModelParameters, grid: SpectralGrid, z: np.ndarray,
             apply_dealias: bool = False) -> np.ndarray:
    """Fourier-space RHS for a (2, N) complex coefficient array.

    Nonlinear terms are evaluated in real space, transformed, then the
    diffusion symbol -k^2 is applied to the chemical-potential spectrum.
    """
    u = np.fft.ifft(z) * grid.N
    u1, u2 = u[0].real, u[1].real
    mu1, mu2 = chemical_potentials(p, u1, u2)
    r1, r2 = reaction_terms(p, u1, u2)
    mu_hat = np.fft.fft(np.stack([mu1, mu2])) / grid.N
    r_hat = np.fft.fft(np.stack([r1, r2])) / grid.N
    out = -grid.k ** 2 * mu_hat + r_hat
    if apply_dealias:
        out = dealias(grid, out)
    return out


def rhs_fourier(p: ModelParameters, grid: SpectralGrid, state: FieldPair,
                apply_dealias: bool = False):
    """Fourier-space time derivative (-k^2 mu_hat_i + R_hat_i) for i = 1, 2."""
    if state.n != grid.N:
        raise ValueError(f"state length {state.n} != grid N {grid.N}")
    if not (np.all(np.isfinite(state.u1)) and np.all(np.isfinite(state.u2))):
        raise DivergenceError("non-finite values in state passed to rhs_fourier")
    z = np.fft.fft(np.stack([state.u1, state.u2])) / grid.N
    # _rhs_hat works on raw DFT coefficients; re-anchor the phase to x
    out = grid.phase * _rhs_hat(p, grid, z, apply_dealias)
    return out[0], out[1]


def amplitude_spectrum(signal: np.ndarray, spacing: float = 1.0):
    """One-sided amplitude spectrum of a real signal, mean removed.

    Returns (frequencies, amplitudes) with amplitudes 2/N * |DFT| over the
    non-negative frequencies and frequency step 1/(N*spacing). A signal
    A*cos(2*pi*f0*t) sampled over an integer number of periods produces a
    single peak of height A at f0.
    """
    signal = np.asarray(signal, dtype=float)
    n = signal.size
    if n < 2:
        raise ValueError("signal must contain at least 2 samples")
    centered = signal - signal.mean()
    coeffs = np.fft.rfft(centered)
    freqs = np.fft.rfftfreq(n, d=spacing)
    amps = 2.0 / n * np.abs(coeffs)
    return freqs, amps


def truncation_error_estimate(grid: SpectralGrid, coeffs: np.ndarray,
                              cutoff: int) -> float:
    """Power in modes with |m| > cutoff (the empirical truncation tail)."""
    if not 0 <= cutoff <= grid.N // 2:
        raise ValueError(f"cutoff must lie in [0, N/2], got {cutoff}")
    m = np.fft.fftfreq(grid.N, d=1.0 / grid.N)
    tail = np.abs(m) > cutoff
    return float(np.sum(np.abs(np.asarray(coeffs)[tail]) ** 2))


def resample(grid: SpectralGrid, u: np.ndarray, new_grid: SpectralGrid) -> np.ndarray:
    """Trigonometric interpolation of a real field onto a finer/coarser grid.

    Pads (or truncates) the Fourier coefficients; exact for fields resolved
    on the source grid.
    """
    c = forward_transform(grid, u)
    shifted = np.fft.fftshift(c)
    n_old, n_new = grid.N, new_grid.N
    if n_new >= n_old:
        pad = (n_new - n_old) // 2
        out = np.concatenate([
            np.zeros(pad, dtype=complex), shifted, np.zeros(n_new - n_old - pad, dtype=complex)
        ])
        if n_new > n_old:
            # split the unpaired -N/2 mode between +/- N/2 to preserve
            # conjugate symmetry
            out[pad + n_old] = 0.5 * out[pad]
            out[pad] = 0.5 * out[pad]
    else:
        lo = (n_old - n_new) // 2
        out = shifted[lo:lo + n_new].copy()
        # the retained band must stay conjugate-symmetric: drop the unpaired
        # -N/2 mode
        out[0] = out[0].real
    return inverse_transform(new_grid, np.fft.ifftshift(out))
