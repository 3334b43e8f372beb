"""Scalar comparison ODE y' = f(y) = β y + Ψ1/y - Ψ2/y³ + Ψ3 y³ = P(y²)/y³."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .cubic import roots_cubic

Y_LOW = 1e-8
Y_HIGH = 1e6
MARGINAL_TOL = 1e-10
CONVERGED_TOL = 1e-10
TERMINALS = ("converged", "blow_down", "blow_up", "max_time")


@dataclass(frozen=True)
class OdeParams:
    beta: float
    psi1: float
    psi2: float
    psi3: float

    @classmethod
    def from_lambda0(cls, lambda0, psi1, psi2, psi3) -> "OdeParams":
        return cls(-float(lambda0), float(psi1), float(psi2), float(psi3))

    @property
    def cubic(self) -> tuple[float, float, float, float]:
        """P(z) = Ψ3 z³ + β z² + Ψ1 z - Ψ2."""
        return self.psi3, self.beta, self.psi1, -self.psi2

    def f(self, y):
        y = np.asarray(y, dtype=float)
        return self.beta * y + self.psi1 / y - self.psi2 / y ** 3 + self.psi3 * y ** 3

    def fprime(self, y):
        y = np.asarray(y, dtype=float)
        return self.beta - self.psi1 / y ** 2 + 3.0 * self.psi2 / y ** 4 + 3.0 * self.psi3 * y ** 2

    def to_dict(self) -> dict:
        return {"beta": self.beta, "psi1": self.psi1, "psi2": self.psi2, "psi3": self.psi3}


@dataclass(frozen=True)
class StationaryPoint:
    y: float
    slope: float
    stability: str  # stable | unstable | marginal


def stationary_points(params: OdeParams) -> list[StationaryPoint]:
    """Positive roots y = √z of P with their stability."""
    try:
        an = roots_cubic(*params.cubic)
    except ValueError:
        return []
    out = []
    for z in an.positive_roots():
        y = math.sqrt(z)
        if out and abs(y - out[-1].y) <= 1e-10 * max(1.0, y):
            continue
        s = float(params.fprime(y))
        # a double root of P is a tangency of f; its computed slope carries root noise
        if abs(s) <= MARGINAL_TOL or (an.repeated and abs(s) <= 1e-6):
            tag = "marginal"
        else:
            tag = "stable" if s < 0 else "unstable"
        out.append(StationaryPoint(y, s, tag))
    return out


@dataclass
class OdeRun:
    params: OdeParams
    y0: float
    t_end: float
    t: np.ndarray
    y: np.ndarray
    terminal: str
    y_star: float | None = None
    steps: int = 0

    @property
    def y_final(self) -> float:
        return float(self.y[-1])

    def terminal_record(self) -> dict:
        return {"terminal": self.terminal, "y_star": self.y_star, "t_final": float(self.t[-1]),
                "y_final": self.y_final, "steps": self.steps, "y0": self.y0,
                "t_end": self.t_end, "params": self.params.to_dict()}

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "y"])
            for a, b in zip(self.t, self.y):
                w.writerow([repr(float(a)), repr(float(b))])

    def write_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.terminal_record(), fh, indent=2)


def integrate(params: OdeParams, y0: float, t_end: float, t_eval=None, rtol: float = 1e-10,
              atol: float = 1e-12, max_steps: int = 1_000_000) -> OdeRun:
    """Adaptive Dormand-Prince integration with positivity-preserving step rejection."""
    if not y0 > 0:
        raise ValueError("y0 must be positive")
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    te = None if t_eval is None else np.ascontiguousarray(t_eval, dtype=float)
    ts, ys, status, steps = kernels.ode_dopri(params.beta, params.psi1, params.psi2, params.psi3,
                                              y0, t_end, rtol, atol, te, Y_LOW, Y_HIGH, max_steps)
    y_star = None
    if status == 1:
        terminal = "blow_down"
    elif status == 2:
        terminal = "blow_up"
    elif status == 3:
        raise ArithmeticError("step size underflow with f = 0")
    else:
        terminal = "max_time"
        yf = float(ys[-1])
        if abs(float(params.f(yf))) < CONVERGED_TOL and float(params.fprime(yf)) < 0:
            terminal = "converged"
            cands = [p.y for p in stationary_points(params) if p.stability == "stable"]
            y_star = min(cands, key=lambda r: abs(r - yf)) if cands else yf
    return OdeRun(params, float(y0), float(t_end), ts, ys, terminal, y_star, int(steps))


def log_linear_fit(t, dist, floor: float = 0.0, min_points: int = 10) -> tuple[float, float]:
    """Exponential rate and R² from a log-linear fit over the last decade of decay.

    ``dist`` is a distance to the limit.  Samples at or below ``floor`` are
    dropped; the fit then uses the trailing run of samples within one decade
    of the smallest remaining distance.
    """
    t = np.asarray(t, dtype=float)
    d = np.asarray(dist, dtype=float)
    keep = d > floor
    t, d = t[keep], d[keep]
    if len(d) < min_points:
        raise ValueError(f"only {len(d)} samples above the noise floor")
    outside = np.nonzero(d > 10.0 * d.min())[0]
    start = outside[-1] + 1 if len(outside) else 0
    tt, ld = t[start:], np.log(d[start:])
    if len(tt) < min_points:
        raise ValueError(f"only {len(tt)} samples in the last decade of decay")
    slope, icept = np.polyfit(tt, ld, 1)
    fit = slope * tt + icept
    ss_tot = float(np.sum((ld - ld.mean()) ** 2))
    r2 = 1.0 - float(np.sum((ld - fit) ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return float(-slope), r2
