"""Schrödinger operator H = -Δ - β on a torus grid and its ground state."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConvergenceError, NonPositiveError
from .grid import ScalarField, delta_ratio, field_to_dict, inner_l2

DENSE_LIMIT = 4096


@dataclass(frozen=True)
class SpectralResult:
    lambda0: float
    ground_state: ScalarField
    residual: float
    delta_e0: float
    gap: float
    method: str = "dense"

    def to_dict(self, include_field: bool = True) -> dict:
        d = {
            "lambda0": self.lambda0,
            "residual": self.residual,
            "delta_e0": self.delta_e0,
            "gap": self.gap,
            "method": self.method,
        }
        if include_field:
            d["ground_state"] = field_to_dict(self.ground_state)
        return d


def _circulant_second_difference(n: int, h: float) -> sp.csr_matrix:
    d = sp.diags([np.full(n - 1, 1.0), np.full(n, -2.0), np.full(n - 1, 1.0)], [-1, 0, 1],
                 shape=(n, n), format="lil")
    d[0, n - 1] = 1.0
    d[n - 1, 0] = 1.0
    return (d.tocsr() / (h * h)).tocsr()


def laplacian_matrix(grid) -> sp.csr_matrix:
    """Sparse periodic Laplacian matching grid.laplacian on flattened fields."""
    mats = [_circulant_second_difference(n, h) for n, h in zip(grid.points, grid.spacing)]
    if grid.dim == 1:
        return mats[0]
    nx, ny = grid.points
    return (sp.kron(mats[0], sp.identity(ny)) + sp.kron(sp.identity(nx), mats[1])).tocsr()


def assemble_operator(beta: ScalarField, dense: bool = False):
    """Matrix of u -> -Δu - βu acting on flattened fields."""
    H = (-laplacian_matrix(beta.grid) - sp.diags(beta.values)).tocsr()
    return H.toarray() if dense else H


def _finish(beta, vals, vecs, method):
    grid = beta.grid
    lam0 = float(vals[0])
    v = vecs[:, 0]
    v = v * np.sign(v[np.argmax(np.abs(v))])
    v = v / np.sqrt(np.dot(v, v) * grid.cell_volume)
    if np.min(v) <= 0.0:
        raise NonPositiveError(
            "ground state has a non-positive entry; the grid is too coarse for this potential")
    e0 = ScalarField(grid, v)
    H = assemble_operator(beta)
    r = H @ v - lam0 * v
    residual = float(np.sqrt(np.dot(r, r) * grid.cell_volume))
    gap = float(vals[1] - vals[0]) if len(vals) > 1 else float("nan")
    return SpectralResult(lam0, e0, residual, delta_ratio(e0), gap, method)


def _dense(beta):
    H = assemble_operator(beta, dense=True)
    vals, vecs = sla.eigh(H, subset_by_index=[0, 1])
    return vals, vecs


def _inverse_iteration(beta, tol, max_iter):
    grid = beta.grid
    H = assemble_operator(beta)
    b = beta.values
    # H >= -max β, so this shift makes H + σ positive definite
    sigma = float(np.max(b)) + 1e-2 * (1.0 + float(np.ptp(b)))
    lu = spla.splu((H + sigma * sp.identity(grid.size)).tocsc())
    vals, vecs = [], []
    for k in range(2):
        rng = np.random.default_rng(12345 + k)
        v = np.ones(grid.size) + (0.0 if k == 0 else 1.0) * rng.standard_normal(grid.size)
        for prev in vecs:
            v -= np.dot(prev, v) * prev
        v /= np.linalg.norm(v)
        lam = np.inf
        for _ in range(max_iter):
            w = lu.solve(v)
            for prev in vecs:
                w -= np.dot(prev, w) * prev
            w /= np.linalg.norm(w)
            Hw = H @ w
            lam_new = float(np.dot(w, Hw))
            res = np.linalg.norm(Hw - lam_new * w) * np.sqrt(grid.cell_volume)
            v = w
            if res < tol and abs(lam_new - lam) < tol:
                lam = lam_new
                break
            lam = lam_new
        else:
            raise ConvergenceError(f"inverse iteration did not converge in {max_iter} steps")
        vals.append(lam)
        vecs.append(v)
    return np.array(vals), np.column_stack(vecs)


def ground_state(beta: ScalarField, tol: float = 1e-8, method: str = "auto",
                 max_iter: int = 5000) -> SpectralResult:
    """Least eigenpair of H = -Δ - β with e0 > 0 and unit L2 norm.

    Dense symmetric solve up to DENSE_LIMIT unknowns, inverse iteration above.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if method == "auto":
        method = "dense" if beta.grid.size <= DENSE_LIMIT else "inverse"
    if method == "dense":
        vals, vecs = _dense(beta)
    elif method == "inverse":
        vals, vecs = _inverse_iteration(beta, 0.1 * tol, max_iter)
    else:
        raise ValueError(f"unknown method {method!r}")
    res = _finish(beta, vals, vecs, method)
    if res.residual > tol:
        raise ConvergenceError(f"eigen residual {res.residual:.3e} exceeds tol {tol:.1e}")
    return res


def shifted_solve(beta: ScalarField, shift: float, rhs: ScalarField,
                  lambda0: float | None = None) -> ScalarField:
    """Solve (H + shift) u = rhs."""
    if lambda0 is None:
        lambda0 = ground_state(beta).lambda0
    if abs(lambda0 + shift) <= 1e-8:
        raise ValueError(f"shift {shift} is too close to -lambda0 = {-lambda0}")
    A = (assemble_operator(beta) + shift * sp.identity(beta.grid.size)).tocsc()
    u = spla.splu(A).solve(rhs.values)
    rel = np.linalg.norm(A @ u - rhs.values) / max(np.linalg.norm(rhs.values), 1e-300)
    if rel >= 1e-10:
        # one step of iterative refinement before giving up
        u = u + spla.splu(A).solve(rhs.values - A @ u)
        rel = np.linalg.norm(A @ u - rhs.values) / max(np.linalg.norm(rhs.values), 1e-300)
        if rel >= 1e-10:
            raise ConvergenceError(f"shifted solve residual {rel:.2e}")
    return ScalarField(beta.grid, u)


def rayleigh_quotient(beta: ScalarField, u: ScalarField) -> float:
    H = assemble_operator(beta)
    return float(np.dot(u.values, H @ u.values) * u.grid.cell_volume / inner_l2(u, u))
