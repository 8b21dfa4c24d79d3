"""Pointwise algebra of the augmented BVAM reaction-diffusion model.

Two species u1, u2 evolve on a periodic domain [-Lx, Lx] under

    du1/dt = Lap(mu1(u1, u2)) + R1(u1, u2)
    du2/dt = Lap(mu2(u1, u2)) + R2(u1, u2)

with cubic reaction terms R_i, chemical potentials mu_i containing
linear, self- (u_i^3) and cross- (u_j^2 u_i) diffusion contributions,
and a Lyapunov-like energy functional E whose time derivative balances
gradient dissipation against the reaction power.

Everything in this module is a pure pointwise (or quadrature) function;
all spatial structure lives in :mod:`bvamx.spectral`.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "ModelParameters",
    "FieldPair",
    "REGIME_LABELS",
    "regime_parameters",
    "reaction_terms",
    "chemical_potentials",
    "reaction_jacobian",
    "potential_jacobian",
    "energy",
    "energy_dissipation_rhs",
]


@dataclass(frozen=True)
class ModelParameters:
    """All reaction and diffusion coefficients plus the domain half-length.

    The single bifurcation parameter is ``C``; sweeps produce copies via
    :func:`dataclasses.replace`.
    """

    eta: float = 1.0
    a: float = -1.0
    b: float = -1.5
    C: float = -0.5
    H: float = 3.0
    d1: float = 0.08
    d2: float = 1.0
    d11: float = 0.0
    d22: float = 0.0
    d12: float = 0.0
    Lx: float = 5.0

    def __post_init__(self):
        if not self.Lx > 0:
            raise ValueError("domain half-length Lx must be positive")
        for name in ("d1", "d2", "d11", "d22", "d12"):
            if getattr(self, name) < 0:
                raise ValueError(f"diffusion coefficient {name} must be >= 0")

    def with_C(self, C: float) -> "ModelParameters":
        return replace(self, C=float(C))


#: The four diffusion regimes: shared reaction parameters, one nonlinear
#: diffusion coefficient switched on at a time.
REGIME_LABELS = ("linear", "self_u1", "self_u2", "cross")

_REGIME_DIFFUSION = {
    "linear": dict(d11=0.0, d22=0.0, d12=0.0),
    "self_u1": dict(d11=0.07, d22=0.0, d12=0.0),
    "self_u2": dict(d11=0.0, d22=0.05, d12=0.0),
    "cross": dict(d11=0.0, d22=0.0, d12=0.02),
}


def regime_parameters(label: str, C: float = -0.5) -> ModelParameters:
    """Preset parameters for one of the four diffusion regimes.

    All regimes share Lx = 5, H = 3, eta = 1, a = -1, b = -3/2,
    d1 = 0.08, d2 = 1; the label selects which nonlinear diffusion
    coefficient is nonzero.
    """
    if label not in _REGIME_DIFFUSION:
        raise ValueError(
            f"unknown regime {label!r}; expected one of {REGIME_LABELS}"
        )
    return ModelParameters(C=float(C), **_REGIME_DIFFUSION[label])


@dataclass
class FieldPair:
    """The two species' values on the collocation grid."""

    u1: np.ndarray
    u2: np.ndarray

    def __post_init__(self):
        self.u1 = np.asarray(self.u1, dtype=float)
        self.u2 = np.asarray(self.u2, dtype=float)
        if self.u1.shape != self.u2.shape or self.u1.ndim != 1:
            raise ValueError("u1 and u2 must be 1-d arrays of equal length")
        if self.u1.size % 2 != 0:
            raise ValueError("field length N must be even")

    @property
    def n(self) -> int:
        return self.u1.size

    def to_vector(self) -> np.ndarray:
        """Concatenate into the length-2N vector used by the solvers."""
        return np.concatenate([self.u1, self.u2])

    @classmethod
    def from_vector(cls, v: np.ndarray) -> "FieldPair":
        v = np.asarray(v, dtype=float)
        n = v.size // 2
        return cls(v[:n].copy(), v[n:].copy())

    def copy(self) -> "FieldPair":
        return FieldPair(self.u1.copy(), self.u2.copy())


def reaction_terms(p: ModelParameters, u1, u2):
    """Reaction terms (R1, R2); accepts scalars or arrays elementwise.

    R1 = eta*(u1 + a*u2 - C*u1*u2 - u1*u2^2)
    R2 = eta*(b*u2 + H*u1 + C*u1*u2 + u1*u2^2)

    The bilinear and cubic terms cancel in R1 + R2.
    """
    cross = p.C * u1 * u2 + u1 * u2 * u2
    r1 = p.eta * (u1 + p.a * u2 - cross)
    r2 = p.eta * (p.b * u2 + p.H * u1 + cross)
    return r1, r2


def chemical_potentials(p: ModelParameters, u1, u2):
    """Chemical potentials (mu1, mu2); elementwise.

    mu1 = d1*u1 + d11*u1^3 + d12*u2^2*u1
    mu2 = d2*u2 + d22*u2^3 + d12*u1^2*u2
    """
    mu1 = p.d1 * u1 + p.d11 * u1 ** 3 + p.d12 * u2 * u2 * u1
    mu2 = p.d2 * u2 + p.d22 * u2 ** 3 + p.d12 * u1 * u1 * u2
    return mu1, mu2


def reaction_jacobian(p: ModelParameters, u1, u2):
    """2x2 Jacobian of the reaction terms, d(R_i)/d(u_j).

    For array inputs the result has shape (2, 2) + input shape.
    """
    return np.array(
        [
            [
                p.eta * (1.0 - p.C * u2 - u2 * u2),
                p.eta * (p.a - p.C * u1 - 2.0 * u1 * u2),
            ],
            [
                p.eta * (p.H + p.C * u2 + u2 * u2),
                p.eta * (p.b + p.C * u1 + 2.0 * u1 * u2),
            ],
        ]
    )


def potential_jacobian(p: ModelParameters, u1, u2):
    """2x2 Jacobian of the chemical potentials, d(mu_i)/d(u_j)."""
    off = 2.0 * p.d12 * u1 * u2
    return np.array(
        [
            [p.d1 + 3.0 * p.d11 * u1 * u1 + p.d12 * u2 * u2, off * np.ones_like(u1)],
            [off * np.ones_like(u1), p.d2 + 3.0 * p.d22 * u2 * u2 + p.d12 * u1 * u1],
        ]
    )


def _quadrature(grid, values: np.ndarray) -> float:
    # Rectangle rule on the uniform periodic grid; exact for trigonometric
    # polynomials below the Nyquist limit.
    return float(grid.dx * np.sum(values))


def energy(p: ModelParameters, grid, state: FieldPair) -> float:
    """Energy functional E >= 0, integrated over [-Lx, Lx].

    Integrand: d1*u1^2/2 + d2*u2^2/2 + d11*u1^4/4 + d22*u2^4/4
    + d12*u1^2*u2^2/2.
    """
    _check_state(grid, state)
    u1, u2 = state.u1, state.u2
    density = (
        0.5 * p.d1 * u1 * u1
        + 0.5 * p.d2 * u2 * u2
        + 0.25 * p.d11 * u1 ** 4
        + 0.25 * p.d22 * u2 ** 4
        + 0.5 * p.d12 * u1 * u1 * u2 * u2
    )
    return _quadrature(grid, density)


def energy_dissipation_rhs(p: ModelParameters, grid, state: FieldPair) -> float:
    """dE/dt from the energy law: -sum_i ||grad mu_i||^2 + sum_i (R_i, mu_i).

    Gradients are computed spectrally; inner products by periodic
    quadrature. Along trajectories of the model this equals the time
    derivative of :func:`energy`.
    """
    from . import spectral

    _check_state(grid, state)
    mu1, mu2 = chemical_potentials(p, state.u1, state.u2)
    r1, r2 = reaction_terms(p, state.u1, state.u2)
    g1 = spectral.spectral_gradient(grid, mu1)
    g2 = spectral.spectral_gradient(grid, mu2)
    dissipation = _quadrature(grid, g1 * g1) + _quadrature(grid, g2 * g2)
    production = _quadrature(grid, r1 * mu1) + _quadrature(grid, r2 * mu2)
    return -dissipation + production


def _check_state(grid, state: FieldPair):
    if state.n != grid.N:
        raise ValueError(
            f"state length {state.n} does not match grid N = {grid.N}"
        )
