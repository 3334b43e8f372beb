"""Parabolic flow ∂t u = Δu + βu + Ψ1/u - Ψ2/u³ + Ψ3 u³ on a periodic grid.

The default scheme is the ARS(4,4,3) additive Runge-Kutta pair: diffusion
implicit (diagonalized by the FFT), reaction explicit.  Classical RK4 under
the diffusive CFL bound is kept as a cross-check.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import kernels
from .cubic import RootLadder, barrier_params
from .errors import GridMismatchError
from .grid import ScalarField, laplacian_array, same_grid
from .ode import OdeParams, integrate, log_linear_fit
from .spectral import laplacian_matrix

SCHEMES = ("imex", "explicit")
BLOW_UP = 1e6
RESIDUAL_TOL = 1e-10
SNAPSHOT_TOL = 1e-11
MAX_HALVINGS = 14
MAX_REL_CHANGE = 0.25

# ARS(4,4,3): implicit and explicit tableaux, stiffly accurate
_A_IMP = np.array([
    [0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, 0.5, 0.0, 0.0, 0.0],
    [0.0, 1 / 6, 0.5, 0.0, 0.0],
    [0.0, -0.5, 0.5, 0.5, 0.0],
    [0.0, 1.5, -1.5, 0.5, 0.5],
])
_A_EXP = np.array([
    [0.0, 0.0, 0.0, 0.0, 0.0],
    [0.5, 0.0, 0.0, 0.0, 0.0],
    [11 / 18, 1 / 18, 0.0, 0.0, 0.0],
    [5 / 6, -5 / 6, 0.5, 0.0, 0.0],
    [0.25, 1.75, 0.75, -1.75, 0.0],
])
_GAMMA = 0.5


@dataclass
class EvolutionConfig:
    dt_initial: float = 1e-3
    t_end: float = 20.0
    scheme: str = "imex"
    snapshot_stride: int = 50
    positivity_floor: float = 1e-10
    stop_on_converge: bool = True
    stop_on_exit: bool = True
    store_fields: bool = True

    def __post_init__(self):
        if not self.dt_initial > 0:
            raise ValueError("dt_initial must be positive")
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")
        if int(self.snapshot_stride) < 1:
            raise ValueError("snapshot_stride must be >= 1")

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass
class EvolutionTrace:
    times: list
    sup_distances_to_limit: list
    ratio_min_max: list
    invariant_set_flags: list
    residuals: list
    terminal: str
    scheme: str
    dt: float
    steps: int
    band: tuple | None = None
    snapshots: np.ndarray | None = None
    u_star: ScalarField | None = None
    e0: ScalarField | None = None
    extras: dict = field(default_factory=dict)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "sup_dist", "min_ratio", "max_ratio", "in_set", "residual"])
            for i, t in enumerate(self.times):
                lo, hi = self.ratio_min_max[i]
                flag = self.invariant_set_flags[i] if self.invariant_set_flags else ""
                w.writerow([repr(float(t)), repr(float(self.sup_distances_to_limit[i])),
                            repr(float(lo)), repr(float(hi)), flag,
                            repr(float(self.residuals[i]))])

    def summary(self) -> dict:
        return {"terminal": self.terminal, "scheme": self.scheme, "dt": self.dt,
                "steps": self.steps, "t_final": float(self.times[-1]),
                "snapshots": len(self.times),
                "all_in_set": bool(all(self.invariant_set_flags)) if self.invariant_set_flags else None}


# ---------------------------------------------------------------------------
# steppers


def _symbol(grid) -> np.ndarray:
    """Eigenvalues of the periodic second-difference Laplacian on the rfftn layout."""
    parts = []
    for ax, (n, h) in enumerate(zip(grid.points, grid.spacing)):
        k = np.arange(n // 2 + 1) if ax == grid.dim - 1 else np.arange(n)
        parts.append(-(4.0 / h ** 2) * np.sin(np.pi * k / n) ** 2)
    return sum(np.meshgrid(*parts, indexing="ij")) if grid.dim > 1 else parts[0]


class _Imex:
    def __init__(self, grid, coeffs, dt):
        self.grid, self.co, self.dt = grid, coeffs, dt
        self.shape = grid.shape
        self.sym = _symbol(grid)
        self.inv = 1.0 / (1.0 - dt * _GAMMA * self.sym)

    def _lap(self, u):
        return laplacian_array(u.reshape(self.shape), self.grid.spacing).reshape(-1)

    def _solve(self, rhs):
        s = self.shape
        ax = tuple(range(len(s)))
        return np.fft.irfftn(np.fft.rfftn(rhs.reshape(s), axes=ax) * self.inv, s=s, axes=ax).reshape(-1)

    def step(self, u, floor):
        dt = self.dt
        L = [self._lap(u)]
        F = [kernels.reaction(u, *self.co)]
        for i in range(1, 5):
            r = u.copy()
            for j in range(i):
                if _A_IMP[i, j]:
                    r += (dt * _A_IMP[i, j]) * L[j]
                if _A_EXP[i, j]:
                    r += (dt * _A_EXP[i, j]) * F[j]
            Y = self._solve(r)
            if not np.all(np.isfinite(Y)):
                raise FloatingPointError("non-finite value in IMEX stage")
            if Y.min() <= floor or Y.max() > BLOW_UP:
                return Y, False
            if i == 4:
                return Y, True
            # the stage equation Y = r + dt γ ΔY gives ΔY without another stencil pass
            L.append((Y - r) / (dt * _GAMMA))
            F.append(kernels.reaction(Y, *self.co))


class _Explicit:
    def __init__(self, grid, coeffs, dt):
        self.grid, self.co, self.dt = grid, coeffs, dt
        self.shape, self.spacing = grid.shape, grid.spacing

    def _f(self, u):
        return kernels.rhs(u, *self.co, self.shape, self.spacing)

    def step(self, u, floor):
        dt = self.dt
        k1 = self._f(u)
        stages = [k1]
        for c in (0.5, 0.5, 1.0):
            y = u + c * dt * stages[-1]
            if not np.all(np.isfinite(y)):
                raise FloatingPointError("non-finite value in RK4 stage")
            if y.min() <= floor or y.max() > BLOW_UP:
                return y, False
            stages.append(self._f(y))
        k1, k2, k3, k4 = stages
        return u + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4), True


def _heads_to_blow_up(u, du) -> bool:
    """Compare the linearized time for the minimum to reach zero with the
    time for the maximum to reach the blow-up cap."""
    i, j = int(np.argmin(u)), int(np.argmax(u))
    t_down = u[i] / -du[i] if du[i] < 0 else math.inf
    t_up = (BLOW_UP - u[j]) / du[j] if du[j] > 0 else math.inf
    return t_up < t_down


def explicit_dt_limit(grid) -> float:
    return min(grid.spacing) ** 2 / (2.0 * grid.dim)


# ---------------------------------------------------------------------------
# evolution


def residual_sup(u, beta, psi1, psi2, psi3, grid) -> float:
    """‖Δu + f(u)‖∞, the stationary residual."""
    r = kernels.rhs(u, beta.values, psi1.values, psi2.values, psi3.values, grid.shape,
                    grid.spacing)
    return float(np.max(np.abs(r)))


def evolve(beta: ScalarField, psi1: ScalarField, psi2: ScalarField, psi3: ScalarField,
           u0: ScalarField, cfg: EvolutionConfig, *, e0: ScalarField | None = None,
           band: tuple | None = None, limit: ScalarField | None = None):
    """Time-step the flow from u0.  Returns (u_final, trace).

    ``band = (lo, hi)`` monitors u/e0 ∈ [lo, hi] (needs ``e0``).  Distances in the
    trace are measured to ``limit`` when given, else to the final state.
    """
    grid = same_grid(beta, psi1, psi2, psi3, u0)
    if e0 is not None:
        same_grid(e0, u0)
    if band is not None and e0 is None:
        raise ValueError("band monitoring needs e0")
    if np.min(u0.values) <= 0:
        raise ValueError("u0 must be strictly positive")
    if limit is not None and limit.grid != grid:
        raise GridMismatchError("limit lives on a different grid")
    co = tuple(np.ascontiguousarray(f.values) for f in (beta, psi1, psi2, psi3))
    dt = float(cfg.dt_initial)
    if cfg.scheme == "explicit":
        dt = min(dt, explicit_dt_limit(grid))
    n_steps = max(1, int(math.ceil(cfg.t_end / dt - 1e-9)))
    dt = cfg.t_end / n_steps
    make = _Imex if cfg.scheme == "imex" else _Explicit
    stepper = make(grid, co, dt)
    fine = {}

    def guarded(stp, u):
        v, ok = stp.step(u, cfg.positivity_floor)
        # a large relative jump means the step is not resolving the reaction
        return v, ok and float(np.max(np.abs(v - u) / u)) <= MAX_REL_CHANGE

    def refined_step(u):
        # a stage leaving (floor, cap) is retried on 2, 4, ... substeps; near a
        # singularity the reaction is stiff and a large step can overshoot through zero
        for k in range(1, MAX_HALVINGS + 1):
            m = 2 ** k
            if k not in fine:
                fine[k] = make(grid, co, dt / m)
            v, ok = u, True
            for _ in range(m):
                v, ok = guarded(fine[k], v)
                if not ok:
                    break
            if ok:
                return v, True
        return v, False

    ev = None if e0 is None else e0.values

    times, ratios, flags, res, snaps = [], [], [], [], []

    def record(t, u):
        times.append(t)
        if ev is not None:
            w = u / ev
            lo, hi = float(w.min()), float(w.max())
        else:
            lo, hi = float(u.min()), float(u.max())
        ratios.append((lo, hi))
        if band is not None:
            flags.append(bool(band[0] <= lo and hi <= band[1]))
        res.append(residual_sup(u, beta, psi1, psi2, psi3, grid))
        snaps.append(u.copy())

    u = np.array(u0.values, dtype=float)
    record(0.0, u)
    terminal = "max_time"
    step = 0
    for step in range(1, n_steps + 1):
        u_new, ok = guarded(stepper, u)
        if not ok:
            u_new, ok = refined_step(u)
        t = step * dt
        if not ok and _heads_to_blow_up(u, kernels.rhs(u, *co, grid.shape, grid.spacing)):
            terminal = "blow_up"
            record(t, u)
            break
        if not ok or u_new.min() <= cfg.positivity_floor:
            # the non-positive state is not a valid snapshot; keep it only for the report
            u = u_new
            terminal = "blow_down"
            break
        if not np.all(np.isfinite(u_new)):
            raise FloatingPointError(f"NaN or inf at t = {t}")
        u = u_new
        if u.max() > BLOW_UP:
            terminal = "blow_up"
            record(t, u)
            break
        if step % cfg.snapshot_stride == 0 or step == n_steps:
            prev = snaps[-1]
            record(t, u)
            if band is not None and not flags[-1] and cfg.stop_on_exit:
                terminal = "left_invariant_set"
                break
            if (res[-1] < RESIDUAL_TOL and float(np.max(np.abs(u - prev))) < SNAPSHOT_TOL):
                terminal = "converged"
                if cfg.stop_on_converge:
                    break
    if terminal == "max_time" and res and res[-1] < RESIDUAL_TOL:
        terminal = "converged"

    if terminal == "blow_down":
        u_final = None
    else:
        u_final = ScalarField(grid, u)
    snaps_arr = np.array(snaps)
    ref = limit.values if limit is not None else (u if u_final is not None else None)
    if ref is not None:
        dists = [float(np.max(np.abs(s - ref))) for s in snaps_arr]
    else:
        dists = [math.nan] * len(snaps_arr)
    trace = EvolutionTrace(times, dists, ratios, flags, res, terminal, cfg.scheme, dt, step,
                           band, snaps_arr if cfg.store_fields else None,
                           u_final if terminal == "converged" else None, e0)
    if terminal == "blow_down":
        trace.extras["min_value"] = float(np.min(u))
        trace.extras["t_terminal"] = step * dt
    return u_final, trace


def evolve_coefficients(coeffs, u0: ScalarField, cfg: EvolutionConfig, **kw):
    """evolve() with the fields of a Coefficients bundle (β = β⊤ + Φ)."""
    return evolve(coeffs.beta, coeffs.psi1, coeffs.psi2, coeffs.psi3, u0, cfg, **kw)


# ---------------------------------------------------------------------------
# diagnostics


@dataclass
class SandwichResult:
    holds: bool
    violations: int
    max_violation: float
    lower: np.ndarray
    upper: np.ndarray

    def to_dict(self) -> dict:
        return {"holds": self.holds, "violations": self.violations,
                "max_violation": self.max_violation}


def _barrier_path(params, y0, times):
    t_end = float(times[-1])
    if t_end <= 0:
        return np.array([y0])
    run = integrate(OdeParams(*params), y0, t_end, t_eval=np.asarray(times[1:], dtype=float))
    out = np.full(len(times), np.nan)
    out[: len(run.y)] = run.y
    return out


def sandwich_check(trace: EvolutionTrace, ladder: RootLadder, e0: ScalarField, eps: float,
                   eta: float, tol: float = 1e-7) -> SandwichResult:
    """Compare u/e0 at every snapshot with the barrier ODE solutions.

    The lower barrier starts at y2⁻ - eps and follows y' = φ₋(y), the upper one
    starts at y2⁺ + eta and follows y' = φ₊(y).
    """
    if trace.snapshots is None:
        raise ValueError("trace has no stored snapshots")
    if trace.e0 is not None and trace.e0.grid != e0.grid:
        raise GridMismatchError("e0 grid differs from the trace")
    try:
        lo_p, hi_p = barrier_params(ladder.regime, ladder.lambda0, ladder.envelopes)
    except (KeyError, ValueError) as exc:
        raise ValueError(f"no barriers for regime {ladder.regime}") from exc
    y_lo0 = ladder.y2_minus - eps
    y_hi0 = ladder.y2_plus + eta
    w0 = trace.snapshots[0] / e0.values
    if y_lo0 <= 0 or w0.min() < y_lo0 - tol or w0.max() > y_hi0 + tol:
        raise ValueError("u0/e0 is outside the band [y2- - eps, y2+ + eta]")
    times = np.asarray(trace.times, dtype=float)
    lower = _barrier_path(lo_p, y_lo0, times)
    upper = _barrier_path(hi_p, y_hi0, times)
    viol = 0
    worst = 0.0
    for k, snap in enumerate(trace.snapshots):
        w = snap / e0.values
        below = float(lower[k] - w.min()) if np.isfinite(lower[k]) else 0.0
        above = float(w.max() - upper[k]) if np.isfinite(upper[k]) else 0.0
        worst = max(worst, below, above)
        if below > tol * max(1.0, abs(lower[k])) or above > tol * max(1.0, abs(upper[k])):
            viol += 1
    return SandwichResult(viol == 0, viol, worst, lower, upper)


def fit_decay_rate(trace: EvolutionTrace, floor: float | None = None) -> tuple[float, float]:
    """(rate, R²) of the sup-distance decay over the final decade above the noise floor."""
    if trace.terminal != "converged":
        raise ValueError(f"trace terminal is {trace.terminal!r}, not converged")
    d = np.asarray(trace.sup_distances_to_limit)
    if floor is None:
        ustar = trace.u_star.values if trace.u_star is not None else trace.snapshots[-1]
        floor = 1e-8 * max(1.0, float(np.max(np.abs(ustar))))
    return log_linear_fit(trace.times, d, floor)


def shrink_time(trace: EvolutionTrace, lo: float, hi: float) -> float | None:
    """First snapshot time after which u/e0 stays in [lo, hi]."""
    t1 = None
    for t, (a, b) in zip(trace.times, trace.ratio_min_max):
        inside = lo <= a and b <= hi
        if inside and t1 is None:
            t1 = t
        elif not inside:
            t1 = None
    return t1


def order_preserved(trace_u: EvolutionTrace, trace_v: EvolutionTrace, tol: float = 1e-9) -> bool:
    """u0 ≤ v0 should give u(t) ≤ v(t) at every shared snapshot."""
    n = min(len(trace_u.times), len(trace_v.times))
    for k in range(n):
        if np.any(trace_u.snapshots[k] > trace_v.snapshots[k] + tol):
            return False
    return True


@dataclass
class DuhamelResult:
    discrepancy: float
    kernel_min: float
    row_sum_error: float

    def to_dict(self) -> dict:
        return {"discrepancy": self.discrepancy, "kernel_min": self.kernel_min,
                "row_sum_error": self.row_sum_error}


DUHAMEL_LIMIT = 512


def verify_duhamel(beta: ScalarField, psi1: ScalarField, psi2: ScalarField, psi3: ScalarField,
                   u0: ScalarField, t: float, dt: float = 1e-4) -> DuhamelResult:
    """Compare the time-stepped solution with the variation-of-constants formula.

    u(t) = e^{tΔh} u0 + ∫0^t e^{(t-τ)Δh} f(u(τ)) dτ, the τ integral by the trapezoid
    rule on the stepper's own time levels.
    """
    grid = same_grid(beta, psi1, psi2, psi3, u0)
    if grid.size > DUHAMEL_LIMIT:
        raise ValueError(f"grid has {grid.size} points; the dense check allows {DUHAMEL_LIMIT}")
    cfg = EvolutionConfig(dt_initial=dt, t_end=t, scheme="imex", snapshot_stride=1,
                          stop_on_converge=False)
    u_t, trace = evolve(beta, psi1, psi2, psi3, u0, cfg)
    if u_t is None:
        raise ValueError("evolution lost positivity")
    taus = np.asarray(trace.times)
    co = (beta.values, psi1.values, psi2.values, psi3.values)
    F = np.array([kernels.reaction(s, *co) for s in trace.snapshots])
    Lh = laplacian_matrix(grid).toarray()
    lam, Q = np.linalg.eigh(Lh)
    w = np.full(len(taus), trace.dt)
    w[0] = w[-1] = 0.5 * trace.dt
    G = F @ Q  # projections of f(u(τk)) on the eigenbasis, one row per level
    decay = np.exp(np.outer(t - taus, lam))
    integral = Q @ np.sum(w[:, None] * decay * G, axis=0)
    free = Q @ (np.exp(t * lam) * (Q.T @ u0.values))
    recon = free + integral
    H = sla.expm(t * Lh)
    return DuhamelResult(float(np.max(np.abs(recon - u_t.values))), float(H.min()),
                         float(np.max(np.abs(H.sum(axis=1) - 1.0))))
