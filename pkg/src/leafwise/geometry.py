"""Curvature data to equation coefficients, and doubly-twisted product instances."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import ScalarField, TorusGrid, resample, same_grid
from .model import Coefficients
from .spectral import SpectralResult, ground_state

TORSION_VARIANTS = ("display", "u_squared")
MIN_WARP = 1e-12


@dataclass(frozen=True)
class GeometryInput:
    n: int
    h_top_sq: ScalarField
    t_bot_sq: ScalarField
    a_T: ScalarField
    b_T: ScalarField
    s_mix_bar: ScalarField
    phi: ScalarField | float = 0.0

    def __post_init__(self):
        if int(self.n) < 1:
            raise ValueError("n must be a positive integer")
        fields = [self.h_top_sq, self.t_bot_sq, self.a_T, self.b_T, self.s_mix_bar]
        if isinstance(self.phi, ScalarField):
            fields.append(self.phi)
        same_grid(*fields)
        if np.min(self.t_bot_sq.values) < 0:
            raise ValueError("t_bot_sq must be nonnegative")

    @classmethod
    def constant(cls, grid, n, h_top_sq=0.0, t_bot_sq=0.0, a_T=0.0, b_T=0.0, s_mix_bar=0.0,
                 phi=0.0) -> "GeometryInput":
        c = ScalarField.constant
        return cls(n, c(grid, h_top_sq), c(grid, t_bot_sq), c(grid, a_T), c(grid, b_T),
                   c(grid, s_mix_bar), phi)

    @property
    def grid(self):
        return self.h_top_sq.grid


def coefficients_from_geometry(g: GeometryInput) -> Coefficients:
    """Ψ1 = (hh - b)/n, Ψ2 = TT/n, Ψ3 = a/n and β⊤ = Ψ2 - Ψ1 - Ψ3 - S̄mix/n."""
    n = float(g.n)
    psi1 = (g.h_top_sq - g.b_T) / n
    psi2 = g.t_bot_sq / n
    psi3 = g.a_T / n
    beta_top = psi2 - psi1 - psi3 - g.s_mix_bar / n
    return Coefficients(beta_top, psi1, psi2, psi3, g.phi)


# ---------------------------------------------------------------------------
# doubly-twisted products B × F with metric v² g_B + u² g_F


def product_grid(base: TorusGrid, fiber: TorusGrid) -> TorusGrid:
    return TorusGrid(tuple(base.points) + tuple(fiber.points),
                     tuple(base.periods) + tuple(fiber.periods))


def broadcast_base(f: ScalarField, fiber: TorusGrid) -> ScalarField:
    """Extend a base field constantly along the fiber."""
    grid = product_grid(f.grid, fiber)
    arr = np.broadcast_to(f.shaped.reshape(f.grid.shape + (1,) * fiber.dim), grid.shape)
    return ScalarField(grid, arr.reshape(-1))


@dataclass(frozen=True)
class TwistedProductSpec:
    base_grid: TorusGrid
    fiber_grid: TorusGrid
    u: ScalarField
    v: ScalarField
    tr_top_u: ScalarField | None = None  # (tr𝔗⊤)(u), sampled
    tr_bot_v: ScalarField | None = None  # (tr𝔗⊥)(v), sampled

    def __post_init__(self):
        grid = product_grid(self.base_grid, self.fiber_grid)
        for f in (self.u, self.v, self.tr_top_u, self.tr_bot_v):
            if f is not None and f.grid != grid:
                raise ValueError("fields must live on the base × fiber grid")
        if np.min(self.u.values) <= 0 or np.min(self.v.values) <= 0:
            raise ValueError("warping functions u and v must be positive")

    @property
    def p(self) -> int:
        return self.base_grid.dim

    @property
    def n(self) -> int:
        return self.fiber_grid.dim

    @property
    def grid(self) -> TorusGrid:
        return self.u.grid


def _partial_laplacian(arr, grid, axes):
    out = np.zeros_like(arr)
    for ax in axes:
        h = grid.spacing[ax]
        out += (np.roll(arr, 1, ax) - 2.0 * arr + np.roll(arr, -1, ax)) / (h * h)
    return out


def _partial_grad_dot(a, b, grid, axes):
    out = np.zeros_like(a)
    for ax in axes:
        h = grid.spacing[ax]
        da = (np.roll(a, -1, ax) - np.roll(a, 1, ax)) / (2 * h)
        db = (np.roll(b, -1, ax) - np.roll(b, 1, ax)) / (2 * h)
        out += da * db
    return out


def leaf_laplacian(f: np.ndarray, conf: np.ndarray, grid: TorusGrid, axes) -> np.ndarray:
    """Laplacian along ``axes`` for the metric conf² · flat, dimension k = len(axes).

    Δ f = conf⁻² (Δ_flat f + (k - 2) ⟨∇ log conf, ∇ f⟩).
    """
    k = len(axes)
    lap = _partial_laplacian(f, grid, axes)
    if k != 2:
        lap = lap + (k - 2) * _partial_grad_dot(np.log(conf), f, grid, axes)
    return lap / conf ** 2


def twisted_smix(spec: TwistedProductSpec, variant: str = "display") -> ScalarField:
    """Mixed scalar curvature of the doubly-twisted product.

    display:    S̄ = -n Δ⊤u/u + n u (tr𝔗⊤)(u) - p Δ⊥v/v + p v (tr𝔗⊥)(v)
    u_squared:  S̄/n · u = -Δ⊤u - βu + u² (tr𝔗⊤)(u) with β = (p/n)(Δ⊥v/v - v (tr𝔗⊥)(v))
    Both are evaluated literally; they agree identically.
    """
    if variant not in TORSION_VARIANTS:
        raise ValueError(f"variant must be one of {TORSION_VARIANTS}")
    g = spec.grid
    u, v = spec.u.shaped, spec.v.shaped
    if u.min() < MIN_WARP or v.min() < MIN_WARP:
        raise ValueError("warping function below 1e-12")
    p, n = spec.p, spec.n
    base_axes = tuple(range(p))
    fib_axes = tuple(range(p, p + n))
    lap_top_u = leaf_laplacian(u, v, g, base_axes)
    lap_bot_v = leaf_laplacian(v, u, g, fib_axes)
    tt = 0.0 if spec.tr_top_u is None else spec.tr_top_u.shaped
    tb = 0.0 if spec.tr_bot_v is None else spec.tr_bot_v.shaped
    if variant == "display":
        s = -n * lap_top_u / u + n * u * tt - p * lap_bot_v / v + p * v * tb
    else:
        beta = (p / n) * (lap_bot_v / v - v * tb)
        s = n * (-lap_top_u - beta * u + u * u * tt) / u
    return ScalarField(g, s.reshape(-1))


# ---------------------------------------------------------------------------
# eigen-product identity


@dataclass
class EigenproductResult:
    deviation: float  # max |S̄mix/n - λ0_ref| with λ0_ref the continuum estimate
    discrete_deviation: float  # max |S̄mix/n - λ0| with λ0 of the same grid
    reference_lambda0: float
    lambda0: float
    discretization_error: float

    @property
    def within_bound(self) -> bool:
        return self.deviation < 5.0 * self.discretization_error + 1e-12

    def to_dict(self) -> dict:
        return {"deviation": self.deviation, "discrete_deviation": self.discrete_deviation,
                "reference_lambda0": self.reference_lambda0, "lambda0": self.lambda0,
                "discretization_error": self.discretization_error,
                "within_bound": self.within_bound}


def continuum_lambda0(beta: ScalarField, spectral: SpectralResult | None = None) -> tuple:
    """Richardson estimate of the continuum λ0 from grids N and 2N.

    Returns (estimate, |λ0_N - estimate|).  β is Fourier-resampled to 2N.
    """
    if spectral is None:
        spectral = ground_state(beta)
    fine = ground_state(resample(beta, [2 * n for n in beta.grid.points]))
    est = (4.0 * fine.lambda0 - spectral.lambda0) / 3.0
    return est, abs(spectral.lambda0 - est)


def verify_eigenproduct(beta: ScalarField, spectral: SpectralResult, n: int = 1,
                        fiber_points: int = 8, reference_lambda0: float | None = None,
                        residual_tol: float = 1e-6) -> EigenproductResult:
    """Build B ×(1, e0) F with fiber torsion absorbing β and compare S̄mix/n with λ0.

    With v ≡ 1, tr𝔗⊤ = 0 and (tr𝔗⊥)(v) = -(n/p) β, the mixed curvature reduces
    to S̄mix/n = (-Δe0 - βe0)/e0, constant λ0 on the leaf.
    """
    if spectral.residual > residual_tol:
        raise ValueError(f"eigen residual {spectral.residual:.2e} is too large to certify")
    base = beta.grid
    fiber = TorusGrid.uniform(fiber_points, dim=n)
    u = broadcast_base(spectral.ground_state, fiber)
    v = ScalarField.constant(u.grid, 1.0)
    tb = broadcast_base(beta * (-float(n) / base.dim), fiber)
    spec = TwistedProductSpec(base, fiber, u, v, None, tb)
    s = twisted_smix(spec).values / n
    if reference_lambda0 is None:
        reference_lambda0, disc = continuum_lambda0(beta, spectral)
    else:
        disc = abs(spectral.lambda0 - reference_lambda0)
    return EigenproductResult(float(np.max(np.abs(s - reference_lambda0))),
                              float(np.max(np.abs(s - spectral.lambda0))),
                              float(reference_lambda0), spectral.lambda0, float(disc))
