"""Stationary solutions: Newton refinement, stability gap and uniqueness probing."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import kernels
from .cubic import RootLadder
from .errors import ConvergenceError
from .flow import EvolutionConfig, evolve
from .grid import ScalarField, field_to_dict, resample, same_grid
from .spectral import ground_state, laplacian_matrix

MAX_HALVINGS = 30


@dataclass
class StationarySolution:
    u_star: ScalarField
    elliptic_residual: float
    ratio_bounds: tuple
    linearization_gap: float
    iterations: int = 0
    history: list = field(default_factory=list)

    def to_dict(self, include_field: bool = True) -> dict:
        d = {"residual": self.elliptic_residual, "ratio_bounds": list(self.ratio_bounds),
             "gap": self.linearization_gap, "iterations": self.iterations,
             "history": self.history}
        if include_field:
            d["field"] = field_to_dict(self.u_star)
        return d


def _residual(u, co, grid):
    return kernels.rhs(u, *co, grid.shape, grid.spacing)


def linearization_gap(u_star: ScalarField, beta, psi1, psi2, psi3) -> float:
    """Least eigenvalue of -Δ - ∂u f(u*, x)."""
    d = kernels.reaction_du(u_star.values, beta.values, psi1.values, psi2.values, psi3.values)
    return ground_state(ScalarField(u_star.grid, d)).lambda0


def solve_stationary(beta: ScalarField, psi1: ScalarField, psi2: ScalarField,
                     psi3: ScalarField, u_seed: ScalarField, tol: float = 1e-11,
                     e0: ScalarField | None = None, max_iter: int = 60) -> StationarySolution:
    """Damped Newton on Δu + f(u) = 0 from a positive seed."""
    grid = same_grid(beta, psi1, psi2, psi3, u_seed)
    if all(np.all(f.values == 0) for f in (psi1, psi2, psi3)):
        raise ValueError("the equation is linear (Ψ1 = Ψ2 = Ψ3 = 0); positive solutions exist "
                         "only when Φ equals λ0 and are multiples of the ground state e0; "
                         "use spectral.ground_state instead")
    if np.min(u_seed.values) <= 0:
        raise ValueError("seed must be strictly positive")
    co = tuple(np.ascontiguousarray(f.values) for f in (beta, psi1, psi2, psi3))
    L = laplacian_matrix(grid).tocsc()
    u = np.array(u_seed.values, dtype=float)
    G = _residual(u, co, grid)
    r = float(np.max(np.abs(G)))
    hist = [r]
    it = 0
    while r >= tol:
        if it >= max_iter:
            raise ConvergenceError(f"Newton did not converge in {max_iter} iterations "
                                   f"(residual {r:.3e})")
        J = (L + sp.diags(kernels.reaction_du(u, *co))).tocsc()
        try:
            step = spla.splu(J).solve(-G)
        except RuntimeError as exc:
            raise ConvergenceError("singular Jacobian; the instance is marginal") from exc
        if not np.all(np.isfinite(step)):
            raise ConvergenceError("singular Jacobian; the instance is marginal")
        lam = 1.0
        for _ in range(MAX_HALVINGS + 1):
            cand = u + lam * step
            if cand.min() > 0:
                Gc = _residual(cand, co, grid)
                rc = float(np.max(np.abs(Gc)))
                if rc < r:
                    break
            lam *= 0.5
        else:
            if r < 1e3 * tol:
                # rounding floor reached just above tol
                break
            raise ConvergenceError(f"line search failed at residual {r:.3e}; "
                                   "the seed is outside any basin")
        u, G, r = cand, Gc, rc
        hist.append(r)
        it += 1
    us = ScalarField(grid, u)
    if e0 is None:
        e0 = ground_state(beta).ground_state
    w = u / e0.values
    gap = linearization_gap(us, beta, psi1, psi2, psi3)
    return StationarySolution(us, r, (float(w.min()), float(w.max())), gap, it, hist)


def certify_stability(sol: StationarySolution, beta, psi1, psi2, psi3,
                      tol: float = 1e-9) -> float:
    """Linearization gap at u*; positive means exponentially stable."""
    if not sol.elliptic_residual < tol:
        raise ValueError(f"residual {sol.elliptic_residual:.2e} is above {tol:.0e}")
    return linearization_gap(sol.u_star, beta, psi1, psi2, psi3)


def doubled_grid_residual(sol: StationarySolution, beta, psi1, psi2, psi3) -> float:
    """‖Δu + f(u)‖∞ of u* and the coefficients Fourier-resampled to twice the points."""
    pts = [2 * n for n in sol.u_star.grid.points]
    fs = [resample(f, pts) for f in (sol.u_star, beta, psi1, psi2, psi3)]
    g = fs[0].grid
    return float(np.max(np.abs(_residual(fs[0].values, tuple(f.values for f in fs[1:]), g))))


# ---------------------------------------------------------------------------
# uniqueness probing


def random_seeds(e0: ScalarField, lo: float, hi: float, n: int, seed: int = 0,
                 modes: int = 4) -> list[ScalarField]:
    """Smooth random fields with u/e0 strictly inside (lo, hi)."""
    rng = np.random.default_rng(seed)
    grid = e0.grid
    coords = grid.coords()
    out = []
    for _ in range(n):
        s = np.zeros(grid.shape)
        for ax, x in enumerate(coords):
            L = grid.periods[ax]
            for k in range(1, modes + 1):
                a, b = rng.standard_normal(2) / k
                s = s + a * np.cos(2 * np.pi * k * x / L) + b * np.sin(2 * np.pi * k * x / L)
        s = s.reshape(-1)
        s = (s - s.min()) / (np.ptp(s) + 1e-300)
        a, b = sorted(rng.uniform(0.05, 0.95, 2))
        w = lo + (hi - lo) * (a + (b - a) * s)
        out.append(ScalarField(grid, w * e0.values))
    return out


@dataclass
class ProbeReport:
    n_seeds: int
    converged: int
    out_of_basin: list
    max_pairwise: float
    agree: bool
    tol: float
    limits: list = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {"n_seeds": self.n_seeds, "converged": self.converged,
                "out_of_basin": self.out_of_basin, "max_pairwise": self.max_pairwise,
                "agree": self.agree, "tol": self.tol}


def _probe_one(args):
    beta, psi1, psi2, psi3, seed_field, cfg, e0 = args
    u, tr = evolve(beta, psi1, psi2, psi3, seed_field, cfg)
    if tr.terminal in ("blow_down", "blow_up") or u is None:
        return tr.terminal, None
    try:
        sol = solve_stationary(beta, psi1, psi2, psi3, u, e0=e0)
    except ConvergenceError:
        return "newton_failed", None
    return "converged", sol.u_star.values


def uniqueness_probe(beta, psi1, psi2, psi3, ladder: RootLadder, e0: ScalarField,
                     n_seeds: int = 10, seed: int = 0, cfg: EvolutionConfig | None = None,
                     seeds: list | None = None, tol: float = 1e-6, upper_cap: float = 3.0,
                     workers: int = 1) -> ProbeReport:
    """Evolve then Newton-refine from many seeds in the basin; all limits should agree.

    Seeds default to random smooth fields with u/e0 inside the regime's
    uniqueness window; unbounded windows are capped at upper_cap·y2⁺.
    """
    if cfg is None:
        cfg = EvolutionConfig(dt_initial=1e-2, t_end=60.0, snapshot_stride=10, store_fields=False)
    if seeds is None:
        lo, hi = ladder.basin()
        if not math.isfinite(hi):
            hi = upper_cap * ladder.y2_plus
        if lo <= 0:
            lo = ladder.y2_minus / upper_cap
        seeds = random_seeds(e0, lo, hi, n_seeds, seed)
    jobs = [(beta, psi1, psi2, psi3, s, cfg, e0) for s in seeds]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_probe_one, jobs))
    else:
        results = [_probe_one(j) for j in jobs]
    limits = [v for tag, v in results if v is not None]
    outside = [i for i, (tag, v) in enumerate(results) if v is None]
    d = 0.0
    for i in range(len(limits)):
        for j in range(i + 1, len(limits)):
            d = max(d, float(np.max(np.abs(limits[i] - limits[j]))))
    agree = bool(d < tol and not outside)
    return ProbeReport(len(seeds), len(limits), outside, d, agree, tol, limits)
