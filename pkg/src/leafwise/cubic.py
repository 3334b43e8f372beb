"""Polynomial machinery: cubic roots and discriminants, root bounds,
envelope coefficients, root ladders and resultant sweeps.

Envelope cubics are written in z = y², so a positive root z gives y = √z.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import HypothesisError, NonPositiveError, TranscriptionError
from .grid import ScalarField

TIE_TOL = 1e-10


# ---------------------------------------------------------------------------
# cubic basics


def discriminant_cubic(a3: float, a2: float, a1: float, a0: float) -> float:
    """Discriminant of a3 z³ + a2 z² + a1 z + a0."""
    return (a2 * a2 * a1 * a1 - 4.0 * a3 * a1 ** 3 - 4.0 * a2 ** 3 * a0
            - 27.0 * a3 * a3 * a0 * a0 + 18.0 * a3 * a2 * a1 * a0)


def polyval(coeffs: Sequence[float], z):
    """Horner evaluation, coefficients in descending order."""
    acc = 0.0 * z
    for c in coeffs:
        acc = acc * z + c
    return acc


@dataclass(frozen=True)
class CubicAnalysis:
    a3: float
    a2: float
    a1: float
    a0: float
    discriminant: float
    real_roots: tuple[float, ...]
    complex_pair: bool
    repeated: bool = False

    @property
    def coeffs(self) -> tuple[float, float, float, float]:
        return (self.a3, self.a2, self.a1, self.a0)

    def positive_roots(self) -> tuple[float, ...]:
        return tuple(r for r in self.real_roots if r > 0)

    def __call__(self, z):
        return polyval(self.coeffs, z)


def _polish(coeffs, r):
    """One safeguarded Newton step: kept only if it lowers |P|."""
    p = polyval(coeffs, r)
    dp = polyval(np.polyder(np.asarray(coeffs, dtype=float)), r)
    if dp == 0.0 or not math.isfinite(p):
        return r
    cand = r - p / dp
    if abs(polyval(coeffs, cand)) < abs(p):
        return cand
    return r


def _quadratic_roots(a, b, c):
    if a == 0.0:
        if b == 0.0:
            return ()
        return (-c / b,)
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return ()
    s = math.sqrt(disc)
    # stable form: avoid cancellation in -b ± s
    q = -0.5 * (b + math.copysign(s, b)) if b != 0.0 else -0.5 * s
    if q == 0.0:
        return (0.0, 0.0)
    r1, r2 = q / a, c / q
    return tuple(sorted((r1, r2)))


def _cubic_real_roots(a3, a2, a1, a0, disc):
    b, c, d = a2 / a3, a1 / a3, a0 / a3
    p = c - b * b / 3.0
    q = 2.0 * b ** 3 / 27.0 - b * c / 3.0 + d
    shift = -b / 3.0
    if disc >= 0.0 and p < 0.0 and (2.0 * math.sqrt(-p / 3.0)) ** 3 > 0.0:
        A = 2.0 * math.sqrt(-p / 3.0)
        cos3 = max(-1.0, min(1.0, -4.0 * q / A ** 3))
        phi = math.acos(cos3) / 3.0
        roots = [A * math.cos(phi - 2.0 * k * math.pi / 3.0) + shift for k in range(3)]
        return sorted(roots)
    if (p == 0.0 and q == 0.0) or disc >= 0.0 and p < 0.0:
        # p underflows: the three roots coincide to working precision
        return [shift] * 3
    # one real root (Cardano)
    inner = q * q / 4.0 + p ** 3 / 27.0
    s = math.sqrt(max(inner, 0.0))
    u = np.cbrt(-q / 2.0 + s)
    v = np.cbrt(-q / 2.0 - s)
    return [float(u + v) + shift]


def roots_cubic(a3: float, a2: float, a1: float, a0: float) -> CubicAnalysis:
    """Sorted real roots of a3 z³ + a2 z² + a1 z + a0 (lower degree if a3 = 0)."""
    a3, a2, a1, a0 = float(a3), float(a2), float(a1), float(a0)
    if a3 == 0.0 and a2 == 0.0 and a1 == 0.0 and a0 == 0.0:
        raise ValueError("all coefficients are zero")
    coeffs = (a3, a2, a1, a0)
    disc = discriminant_cubic(*coeffs)
    if a3 != 0.0:
        roots = _cubic_real_roots(a3, a2, a1, a0, disc)
    else:
        roots = list(_quadratic_roots(a2, a1, a0))
    roots = sorted(_polish(coeffs, r) for r in roots)
    repeated = any(abs(roots[i + 1] - roots[i]) <= TIE_TOL * (1.0 + abs(roots[i]))
                   for i in range(len(roots) - 1))
    degree = 3 if a3 != 0.0 else (2 if a2 != 0.0 else 1)
    complex_pair = len(roots) + 2 <= degree
    return CubicAnalysis(a3, a2, a1, a0, disc, tuple(roots), complex_pair, repeated)


def trig_roots_depressed(p: float, q: float) -> tuple[float, float, float]:
    """Roots μ1 ≥ μ2 ≥ μ3 of μ³ + pμ + q in the three-real-root case."""
    if p >= 0.0:
        raise ValueError("trigonometric form needs p < 0")
    A = 2.0 * math.sqrt(-p / 3.0)
    c = -4.0 * q / A ** 3
    if abs(c) > 1.0 + 1e-12:
        raise ValueError(f"cos(3φ) = {c:.6g} outside [-1, 1]: only one real root")
    phi = math.acos(max(-1.0, min(1.0, c))) / 3.0
    two_pi_3 = 2.0 * math.pi / 3.0
    return (A * math.cos(phi), A * math.cos(phi - two_pi_3), A * math.cos(phi + two_pi_3))


def c_of_z(z: float) -> float:
    """C(z) = -(5832 z² + 540 z - 1)/(216 z + 1)^{3/2} on [0, 1/27]."""
    if not (-1e-15 <= z <= 1.0 / 27.0 + 1e-15):
        raise ValueError(f"z = {z} outside [0, 1/27]")
    return -(5832.0 * z * z + 540.0 * z - 1.0) / (216.0 * z + 1.0) ** 1.5


def maclaurin_bound(coeffs: Sequence[float]) -> float:
    """Upper bound 1 + (B/a0)^{1/m} for the positive roots.

    ``coeffs`` are in descending order with a0 > 0 leading; m is the index of
    the first negative coefficient and B the largest |negative coefficient|.
    Returns math.inf when no coefficient is negative (no positive roots).
    """
    c = [float(x) for x in coeffs]
    if not c or c[0] <= 0.0:
        raise ValueError("leading coefficient must be positive")
    neg = [i for i, x in enumerate(c) if x < 0.0]
    if not neg:
        return math.inf
    m = neg[0]
    B = max(-c[i] for i in neg)
    return 1.0 + (B / c[0]) ** (1.0 / m)


def positivity_criterion_a3(coeffs: Sequence[float]) -> bool:
    """Constant term beats the summed negative coefficients (descending order).

    When true the polynomial is positive on [0, 1].
    """
    c = [float(x) for x in coeffs]
    neg = sum(-x for x in c[:-1] if x < 0.0)
    return c[-1] > neg


# ---------------------------------------------------------------------------
# regimes and envelopes


class RegimeTag(str, Enum):
    A = "A"
    B = "B"
    C1 = "C1"
    C2 = "C2"
    C3 = "C3"
    DEGENERATE = "DEGENERATE"


def _signs(v):
    a = np.atleast_1d(np.asarray(v.values if isinstance(v, ScalarField) else v, dtype=float))
    return bool(np.all(a > 0)), bool(np.all(a < 0)), bool(np.all(a == 0))


def classify_regime(psi3, psi2, beta_eff: float) -> RegimeTag:
    """Regime from the signs of Ψ3, Ψ2 and the effective linear coefficient.

    ``beta_eff`` is β for constant data and -λ0 for fields.
    """
    pos3, neg3, zero3 = _signs(psi3)
    _, _, zero2 = _signs(psi2)
    if pos3:
        return RegimeTag.A
    if neg3:
        return RegimeTag.B
    if zero3:
        if zero2:
            return RegimeTag.C3
        if beta_eff < 0:
            return RegimeTag.C1
        if beta_eff > 0:
            return RegimeTag.C2
    return RegimeTag.DEGENERATE


@dataclass(frozen=True)
class EnvelopeSet:
    """Ψk± = max/min over the leaf of |Ψk| e0^{-2k} (k = 1, 2) and |Ψ3| e0²."""

    psi1_minus: float
    psi1_plus: float
    psi2_minus: float
    psi2_plus: float
    psi3_minus: float
    psi3_plus: float

    @classmethod
    def constant(cls, psi1: float, psi2: float, psi3: float) -> "EnvelopeSet":
        a, b, c = abs(psi1), abs(psi2), abs(psi3)
        return cls(a, a, b, b, c, c)

    @property
    def delta3(self) -> float:
        return self.psi3_plus - self.psi3_minus

    @property
    def collapsed(self) -> bool:
        return (self.psi1_minus == self.psi1_plus and self.psi2_minus == self.psi2_plus
                and self.psi3_minus == self.psi3_plus)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def envelope_coefficients(psi1: ScalarField, psi2: ScalarField, psi3: ScalarField,
                          e0: ScalarField) -> EnvelopeSet:
    e = e0.values
    if np.min(e) <= 0:
        raise NonPositiveError("e0 must be positive")
    t1 = np.abs(psi1.values) * e ** -2
    t2 = np.abs(psi2.values) * e ** -4
    t3 = np.abs(psi3.values) * e ** 2
    return EnvelopeSet(float(t1.min()), float(t1.max()), float(t2.min()), float(t2.max()),
                       float(t3.min()), float(t3.max()))


# ---------------------------------------------------------------------------
# envelope polynomials (in z = y²), per regime


def envelope_polynomials(regime: RegimeTag, lambda0: float, env: EnvelopeSet) -> dict:
    """Coefficient tuples (a3, a2, a1, a0) of y⁴·φ± and y⁴·(∂yφ)± in z = y².

    Keys: phi_plus, phi_minus, dphi_plus, dphi_minus.  In regime C1 the
    derivative entry is the derivative of the lower envelope φ-.
    """
    L = float(lambda0)
    e = env
    if regime == RegimeTag.A:
        return {
            "phi_plus": (e.psi3_plus, -L, e.psi1_plus, -e.psi2_minus),
            "phi_minus": (e.psi3_minus, -L, e.psi1_minus, -e.psi2_plus),
            "dphi_plus": (3 * e.psi3_plus, -L, -e.psi1_minus, 3 * e.psi2_plus),
            "dphi_minus": (3 * e.psi3_minus, -L, -e.psi1_plus, 3 * e.psi2_minus),
        }
    if regime == RegimeTag.B:
        return {
            "phi_plus": (-e.psi3_minus, -L, -e.psi1_minus, -e.psi2_minus),
            "phi_minus": (-e.psi3_plus, -L, -e.psi1_plus, -e.psi2_plus),
            "dphi_plus": (-3 * e.psi3_minus, -L, e.psi1_plus, 3 * e.psi2_plus),
            "dphi_minus": (-3 * e.psi3_plus, -L, e.psi1_minus, 3 * e.psi2_minus),
        }
    if regime in (RegimeTag.C1, RegimeTag.C3):
        return {
            "phi_plus": (0.0, -L, e.psi1_plus, -e.psi2_minus),
            "phi_minus": (0.0, -L, e.psi1_minus, -e.psi2_plus),
            "dphi_minus": (0.0, -L, -e.psi1_minus, 3 * e.psi2_plus),
        }
    raise HypothesisError(f"no envelope ladder for regime {regime.value}", check="regime")


def barrier_params(regime: RegimeTag, lambda0: float, env: EnvelopeSet):
    """(lower, upper) comparison-ODE coefficients (beta, psi1, psi2, psi3).

    The ODE is y' = beta y + psi1/y - psi2/y³ + psi3 y³; lower is φ-, upper φ+.
    """
    L = float(lambda0)
    e = env
    if regime == RegimeTag.A:
        return ((-L, e.psi1_minus, e.psi2_plus, e.psi3_minus),
                (-L, e.psi1_plus, e.psi2_minus, e.psi3_plus))
    if regime == RegimeTag.B:
        return ((-L, -e.psi1_plus, e.psi2_plus, -e.psi3_plus),
                (-L, -e.psi1_minus, e.psi2_minus, -e.psi3_minus))
    if regime in (RegimeTag.C1, RegimeTag.C3):
        return ((-L, e.psi1_minus, e.psi2_plus, 0.0),
                (-L, e.psi1_plus, e.psi2_minus, 0.0))
    raise HypothesisError(f"no barriers for regime {regime.value}", check="regime")


def _pos_y(coeffs) -> list[float]:
    """Positive roots in y of a polynomial in z = y² (zero roots dropped)."""
    c = list(coeffs)
    # strip factors of z so that roots at z = 0 are not reported
    while len(c) > 1 and c[-1] == 0.0:
        c = c[:-1]
    c = [0.0] * (4 - len(c)) + c
    if all(x == 0.0 for x in c):
        return []
    an = roots_cubic(*c)
    return [math.sqrt(z) for z in an.real_roots if z > 0.0]


def _dphi_value(coeffs, y):
    """(∂yφ)(y) = P(y²)/y⁴ for a derivative cubic."""
    return polyval(coeffs, y * y) / y ** 4


CHAINS = {
    RegimeTag.A: ["y3+", "y3-", "y5+", "y2-", "y2+", "y4-", "y1+", "y1-"],
    "A_reduced": ["y2-", "y2+", "y4-", "y1+", "y1-"],
    RegimeTag.B: ["y1+", "y1-", "y3+", "y2-", "y2+"],
    "B_reduced": ["y3+", "y2-", "y2+"],
    RegimeTag.C1: ["y1+", "y1-", "y3-", "y2-", "y2+"],
    RegimeTag.C3: ["y2-", "y2+"],
}


@dataclass
class RootLadder:
    regime: RegimeTag
    lambda0: float
    roots_minus: dict
    roots_plus: dict
    chain: list
    ordering_verified: bool
    degenerate: bool
    mu_plus: float | None
    sigma: float | None = None
    tau: float | None = None
    envelopes: EnvelopeSet | None = None
    notes: list = field(default_factory=list)

    def get(self, name: str) -> float:
        """Look up a root by its name, e.g. 'y2-' or 'y4+'."""
        table = self.roots_minus if name.endswith("-") else self.roots_plus
        return table[name[:-1]]

    @property
    def y2_minus(self) -> float:
        return self.roots_minus["y2"]

    @property
    def y2_plus(self) -> float:
        return self.roots_plus["y2"]

    def basin(self) -> tuple[float, float]:
        """The uniqueness set as an interval of u/e0 values."""
        if self.regime == RegimeTag.A:
            lo = self.roots_minus.get("y3", 0.0)
            return lo, self.roots_plus["y1"]
        if self.regime in (RegimeTag.B, RegimeTag.C1):
            return self.roots_minus.get("y1", 0.0), math.inf
        return 0.0, math.inf

    def chain_values(self) -> list[tuple[str, float]]:
        return [(n, self.get(n)) for n in self.chain]

    def to_dict(self) -> dict:
        return {
            "regime": self.regime.value,
            "lambda0": self.lambda0,
            "roots_minus": self.roots_minus,
            "roots_plus": self.roots_plus,
            "chain": self.chain,
            "ordering_verified": self.ordering_verified,
            "degenerate": self.degenerate,
            "mu_plus": self.mu_plus,
            "sigma": self.sigma,
            "tau": self.tau,
        }


def _strict_chain(values: list[float]) -> tuple[bool, bool]:
    """(strictly increasing, has ties within TIE_TOL)."""
    strict, tie = True, False
    for a, b in zip(values, values[1:]):
        if abs(b - a) <= TIE_TOL * (1.0 + abs(a)):
            tie = True
            strict = False
        elif b < a:
            strict = False
    return strict, tie


def max_dphi_on(coeffs, lo: float, hi: float) -> float:
    """Exact max over [lo, hi] of g(y) = P(y²)/y⁴ for a derivative cubic.

    Critical points solve c z³ + a z - 2b = 0 in z = y² where
    g = -λ0 - a y⁻² + b y⁻⁴ + c y².
    """
    a3, a2, a1, a0 = coeffs
    c, a, b = a3, -a1, a0
    cands = [lo, hi]
    crit = (c, 0.0, a, -2.0 * b)
    if any(x != 0.0 for x in crit):
        try:
            for z in roots_cubic(*crit).real_roots:
                if z > 0 and lo < math.sqrt(z) < hi:
                    cands.append(math.sqrt(z))
        except ValueError:
            pass
    return max(_dphi_value(coeffs, y) for y in cands)


def root_ladder(regime, lambda0: float, envelopes: EnvelopeSet, sigma: float | None = None,
                tau: float | None = None, frac: float = 0.1) -> RootLadder:
    """Named envelope roots, their ordering, and the rate bound μ⁺.

    sigma and tau default to ``frac`` times their admissible ranges.
    Raises HypothesisError naming the violated condition when required
    roots are missing.
    """
    regime = RegimeTag(regime)
    L = float(lambda0)
    env = envelopes
    if regime == RegimeTag.C2:
        raise HypothesisError("regime C2 has no stable stationary root (needs lambda0 > 0)",
                              check="lambda0_positive")
    if regime == RegimeTag.DEGENERATE:
        raise HypothesisError("coefficient signs do not select a regime", check="regime")
    if regime == RegimeTag.A and L <= 0:
        raise HypothesisError("regime A needs lambda0 > 0", check="lambda0_positive")
    if regime == RegimeTag.B and L >= 0:
        raise HypothesisError("regime B needs lambda0 < 0", check="lambda0_negative")
    if regime in (RegimeTag.C1, RegimeTag.C3) and L <= 0:
        raise HypothesisError("regime C needs lambda0 > 0", check="lambda0_positive")
    if regime == RegimeTag.C1 and not L < env.psi1_minus ** 2 / (4.0 * env.psi2_plus):
        raise HypothesisError("lambda0 above (Psi1-)^2/(4 Psi2+)", check="lambda0_c1_window")

    polys = envelope_polynomials(regime, L, env)
    rp = _pos_y(polys["phi_plus"])
    rm = _pos_y(polys["phi_minus"])
    plus: dict = {}
    minus: dict = {}
    notes: list = []
    mu = None
    chain_key = regime

    if regime == RegimeTag.A:
        reduced = env.psi2_plus == 0.0
        want = 2 if reduced else 3
        if len(rp) != want or len(rm) != want:
            raise HypothesisError(
                f"envelope cubics lack {want} positive roots (lambda0 outside the admissible window)",
                check="lambda0_in_window")
        dp = _pos_y(polys["dphi_plus"])
        dm = _pos_y(polys["dphi_minus"])
        dwant = 1 if reduced else 2
        if len(dp) != dwant or len(dm) != dwant:
            raise HypothesisError("derivative envelopes lack positive roots",
                                  check="envelope_cubic_smallness")
        if reduced:
            plus.update(y2=rp[0], y1=rp[1], y4=dp[0])
            minus.update(y2=rm[0], y1=rm[1], y4=dm[0])
            chain_key = "A_reduced"
            lo_edge = 0.0
        else:
            plus.update(y3=rp[0], y2=rp[1], y1=rp[2], y5=dp[0], y4=dp[1])
            minus.update(y3=rm[0], y2=rm[1], y1=rm[2], y5=dm[0], y4=dm[1])
            lo_edge = plus["y5"]
        smax = minus["y2"] - lo_edge
        tmax = plus["y4"] - plus["y2"]
        if smax > 0 and tmax > 0:
            sigma = frac * smax if sigma is None else sigma
            tau = frac * tmax if tau is None else tau
            if not (0 < sigma < smax and 0 < tau < tmax):
                raise ValueError(f"sigma must lie in (0, {smax:g}) and tau in (0, {tmax:g})")
            mu = -max_dphi_on(polys["dphi_plus"], minus["y2"] - sigma, plus["y2"] + tau)
        else:
            notes.append("rate window empty: y2- <= y5+ or y4+ <= y2+")

    elif regime == RegimeTag.B:
        dp = _pos_y(polys["dphi_plus"])
        dm = _pos_y(polys["dphi_minus"])
        if len(rp) == 0 or len(rm) == 0 or len(rp) != len(rm):
            raise HypothesisError("envelope cubics lack positive roots (lambda0 not below -Kbar)",
                                  check="lambda0_below_kbar")
        if len(rp) >= 2:
            plus.update(y1=rp[0], y2=rp[-1])
            minus.update(y1=rm[0], y2=rm[-1])
        else:
            plus.update(y2=rp[0])
            minus.update(y2=rm[0])
            chain_key = "B_reduced"
        if len(dp) != 1 or len(dm) != 1:
            raise HypothesisError("derivative envelopes do not have a single positive root",
                                  check="lambda0_below_kbar")
        plus["y3"] = dp[0]
        minus["y3"] = dm[0]
        smax = minus["y2"] - plus["y3"]
        if smax > 0:
            sigma = frac * smax if sigma is None else sigma
            if not 0 < sigma < smax:
                raise ValueError(f"sigma must lie in (0, {smax:g})")
            mu = -_dphi_value(polys["dphi_plus"], minus["y2"] - sigma)
        else:
            notes.append("rate window empty: y2- <= y3+")

    elif regime == RegimeTag.C1:
        if len(rp) != 2 or len(rm) != 2:
            raise HypothesisError("envelope quadratics lack two positive roots",
                                  check="lambda0_c1_window")
        dm = _pos_y(polys["dphi_minus"])
        plus.update(y1=rp[0], y2=rp[1])
        minus.update(y1=rm[0], y2=rm[1], y3=dm[0])
        smax = minus["y2"] - minus["y3"]
        if smax > 0:
            sigma = frac * smax if sigma is None else sigma
            if not 0 < sigma < smax:
                raise ValueError(f"sigma must lie in (0, {smax:g})")
            mu = min(abs(_dphi_value(polys["dphi_minus"], minus["y2"] - sigma)), L)
        else:
            notes.append("rate window empty: y2- <= y3-")

    else:  # C3: φ± = -λ0 y + Ψ1±/y
        plus["y2"] = math.sqrt(env.psi1_plus / L)
        minus["y2"] = math.sqrt(env.psi1_minus / L)
        mu = L

    chain = CHAINS[chain_key]
    lad = RootLadder(regime, L, minus, plus, chain, False, False, mu, sigma, tau, env, notes)
    strict, tie = _strict_chain([v for _, v in lad.chain_values()])
    lad.ordering_verified = strict
    lad.degenerate = tie or env.collapsed
    if mu is not None and mu <= 0:
        notes.append("mu_plus is not positive")
    return lad


# ---------------------------------------------------------------------------
# discriminant window in lambda0 (regime A)


def discriminant_in_lambda(theta1: float, theta2: float, theta3: float) -> tuple:
    """Coefficients in λ of the discriminant of θ3 z³ - λ z² + θ1 z - θ2."""
    return (-4.0 * theta2, theta1 ** 2, 18.0 * theta1 * theta2 * theta3,
            -theta3 * (4.0 * theta1 ** 3 + 27.0 * theta2 ** 2 * theta3))


def depressed_pq(theta1: float, theta2: float, theta3: float) -> tuple[float, float]:
    """p, q of the depressed discriminant cubic after λ = μ + θ1²/(12 θ2)."""
    p = -theta1 * (theta1 ** 3 + 216.0 * theta2 ** 2 * theta3) / (48.0 * theta2 ** 2)
    q = -(theta1 ** 6 - 540.0 * theta2 ** 2 * theta3 * theta1 ** 3
          - 5832.0 * theta2 ** 4 * theta3 ** 2) / (864.0 * theta2 ** 3)
    return p, q


def lambda_window(theta1: float, theta2: float, theta3: float) -> tuple[float, float]:
    """(λ-, λ+): the interval of λ where θ3 z³ - λ z² + θ1 z - θ2 has three positive roots."""
    p, q = depressed_pq(theta1, theta2, theta3)
    mu1, mu2, _ = trig_roots_depressed(p, q)
    s = theta1 ** 2 / (12.0 * theta2)
    return mu2 + s, mu1 + s


@dataclass(frozen=True)
class WindowBounds:
    z_plus: float
    z_minus: float
    phi_plus: float
    phi_minus: float
    p_plus: float
    p_minus: float
    A_plus: float
    A_minus: float
    mu1_minus: float
    mu2_plus: float
    lower: float  # conservative lower end of the admissible λ0 window
    upper: float  # conservative upper end
    separation_lhs: float
    separation_rhs: float

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def window_bounds(env: EnvelopeSet) -> WindowBounds:
    """Envelope-uniform bounds on the λ0 window from the trigonometric roots."""
    e = env
    z_p = e.psi3_plus * e.psi2_plus ** 2 / e.psi1_minus ** 3
    z_m = e.psi3_minus * e.psi2_minus ** 2 / e.psi1_plus ** 3
    phi_p = math.acos(c_of_z(z_p)) / 3.0
    phi_m = math.acos(c_of_z(z_m)) / 3.0
    p_p = -e.psi1_minus * (e.psi1_minus ** 3 + 216.0 * e.psi2_minus ** 2 * e.psi3_minus) / (
        48.0 * e.psi2_plus ** 2)
    p_m = -e.psi1_plus * (e.psi1_plus ** 3 + 216.0 * e.psi2_plus ** 2 * e.psi3_plus) / (
        48.0 * e.psi2_minus ** 2)
    A_p = 2.0 * math.sqrt(-p_m / 3.0)
    A_m = 2.0 * math.sqrt(-p_p / 3.0)
    mu1_m = A_m * math.cos(phi_p)
    c2 = math.cos(phi_p - 2.0 * math.pi / 3.0)
    mu2_p = (A_p if c2 > 0 else A_m) * c2
    s_hi = e.psi1_plus ** 2 / (12.0 * e.psi2_minus)
    s_lo = e.psi1_minus ** 2 / (12.0 * e.psi2_plus)
    return WindowBounds(z_p, z_m, phi_p, phi_m, p_p, p_m, A_p, A_m, mu1_m, mu2_p,
                        mu2_p + s_hi, mu1_m + s_lo, s_hi - s_lo, mu1_m - mu2_p)


# ---------------------------------------------------------------------------
# resultants


def sylvester_matrix(p: Sequence[float], q: Sequence[float]) -> np.ndarray:
    """Sylvester matrix of two polynomials given in descending order (formal degrees)."""
    m, n = len(p) - 1, len(q) - 1
    S = np.zeros((m + n, m + n))
    for i in range(n):
        S[i, i : i + m + 1] = p
    for i in range(m):
        S[n + i, i : i + n + 1] = q
    return S


def sylvester_resultant(p: Sequence[float], q: Sequence[float]) -> float:
    return float(np.linalg.det(sylvester_matrix(p, q)))


@dataclass(frozen=True)
class ResultantSweep:
    name: str
    coeffs: tuple  # descending in t
    generic_coeffs: tuple
    min_value: float
    argmin: float

    @property
    def positive(self) -> bool:
        return self.min_value > 0

    def to_dict(self) -> dict:
        return {"name": self.name, "coeffs": list(self.coeffs),
                "generic_coeffs": list(self.generic_coeffs),
                "min_value": self.min_value, "argmin": self.argmin}


def _generic_family(P, Qa, Qb, norm, degree):
    """Fit the t-polynomial norm·Res(P, (1-t)Qa + t Qb) from degree+1 samples."""
    ts = np.linspace(0.0, 1.0, degree + 1)
    vals = []
    for t in ts:
        Q = [(1 - t) * a + t * b for a, b in zip(Qa, Qb)]
        vals.append(norm * sylvester_resultant(P, Q))
    V = np.vander(ts, degree + 1)
    return tuple(np.linalg.solve(V, np.array(vals)))


def _min_on_unit(coeffs) -> tuple[float, float]:
    c = np.asarray(coeffs, dtype=float)
    ts = list(np.linspace(0.0, 1.0, 1001))
    if len(c) >= 3:
        d = np.polyder(c)
        for r in np.roots(d) if np.any(d != 0) else []:
            if abs(r.imag) < 1e-12 and 0.0 <= r.real <= 1.0:
                ts.append(float(r.real))
    ts = np.array(ts)
    v = np.polyval(c, ts)
    i = int(np.argmin(v))
    return float(v[i]), float(ts[i])


def _compare(name, closed, generic, rtol=1e-8):
    closed = np.asarray(closed, dtype=float)
    generic = np.asarray(generic, dtype=float)
    scale = max(np.max(np.abs(closed)), np.max(np.abs(generic)), 1e-300)
    err = np.max(np.abs(closed - generic)) / scale
    if err > rtol:
        raise TranscriptionError(
            f"{name}: closed form and Sylvester resultant differ (relative {err:.2e})")


def _strip_z(*polys):
    """Drop common trailing zero coefficients (the factor z when Ψ2 ≡ 0)."""
    out = [list(p) for p in polys]
    while all(len(p) > 1 and p[-1] == 0.0 for p in out):
        out = [p[:-1] for p in out]
    return out


def resultant_sweep_R1(lambda0: float, env: EnvelopeSet, rtol: float = 1e-8) -> ResultantSweep:
    """Regime A: separation of φ- roots from the derivative family, lower side."""
    L, e = float(lambda0), env
    d3 = e.delta3
    P = (e.psi3_minus, -L, e.psi1_minus, -e.psi2_plus)
    Qa = (3 * e.psi3_minus, -L, -e.psi1_minus, 3 * e.psi2_plus)
    Qb = (3 * e.psi3_plus, -L, -e.psi1_minus, 3 * e.psi2_plus)
    if e.psi2_plus == 0.0:
        # reduced case: no printed closed form, generic route only
        P, Qa, Qb = _strip_z(P, Qa, Qb)
        gen = _generic_family(P, Qa, Qb, -1.0 / e.psi1_minus, len(P) - 1)
        mn, arg = _min_on_unit(gen)
        return ResultantSweep("R1", gen, gen, mn, arg)
    D = discriminant_cubic(*P)
    closed = (
        -27.0 * d3 ** 3 * e.psi2_plus ** 2,
        18.0 * d3 ** 2 * (4 * e.psi1_minus * e.psi2_plus * L - e.psi1_minus ** 3
                          - 9 * e.psi2_plus ** 2 * e.psi3_minus),
        12.0 * d3 * D,
        8.0 * e.psi3_minus * D,
    )
    gen = _generic_family(P, Qa, Qb, -1.0 / e.psi2_plus, 3)
    _compare("R1", closed, gen, rtol)
    mn, arg = _min_on_unit(closed)
    return ResultantSweep("R1", closed, gen, mn, arg)


def resultant_sweep_R2(lambda0: float, env: EnvelopeSet, rtol: float = 1e-8) -> ResultantSweep:
    """Regime A: separation of φ+ roots from the derivative family, upper side."""
    L, e = float(lambda0), env
    d3 = e.delta3
    if e.psi2_minus == 0.0 and e.psi2_plus == 0.0:
        # reduced quadratic form for Ψ2 ≡ 0, normalized by -1/Ψ1+
        P = (e.psi3_plus, -L, e.psi1_plus)
        Qa = (3 * e.psi3_plus, -L, -e.psi1_plus)
        Qb = (3 * e.psi3_minus, -L, -e.psi1_plus)
        g = L * L - 4.0 * e.psi1_plus * e.psi3_plus
        closed = (-9.0 * d3 ** 2 * e.psi1_plus, -6.0 * d3 * g, 4.0 * e.psi3_plus * g)
        gen = _generic_family(P, Qa, Qb, -1.0 / e.psi1_plus, 2)
        _compare("R2 (reduced)", closed, gen, rtol)
        mn, arg = _min_on_unit(closed)
        return ResultantSweep("R2", closed, gen, mn, arg)
    P = (e.psi3_plus, -L, e.psi1_plus, -e.psi2_minus)
    Qa = (3 * e.psi3_plus, -L, -e.psi1_plus, 3 * e.psi2_minus)
    Qb = (3 * e.psi3_minus, -L, -e.psi1_plus, 3 * e.psi2_minus)
    D = discriminant_cubic(*P)
    closed = (
        27.0 * d3 ** 3 * e.psi2_minus ** 2,
        18.0 * d3 ** 2 * (4 * e.psi1_plus * e.psi2_minus * L - e.psi1_plus ** 3
                          - 9 * e.psi2_minus ** 2 * e.psi3_plus),
        -12.0 * d3 * D,
        8.0 * e.psi3_plus * D,
    )
    gen = _generic_family(P, Qa, Qb, -1.0 / e.psi2_minus, 3)
    _compare("R2", closed, gen, rtol)
    mn, arg = _min_on_unit(closed)
    return ResultantSweep("R2", closed, gen, mn, arg)


def resultant_sweep_R3(lambda0: float, env: EnvelopeSet, rtol: float = 1e-8) -> ResultantSweep:
    """Regime B: separation of φ- roots from the derivative family.

    With Ψ1 ≡ Ψ2 ≡ 0 the resultant is linear: -3 δ3 t + 2 Ψ3+.
    """
    L, e = float(lambda0), env
    d3 = e.delta3
    if e.psi1_plus == 0.0 and e.psi2_plus == 0.0:
        closed = (-3.0 * d3, 2.0 * e.psi3_plus)
        P = (-e.psi3_plus, -L)
        Qa = (-3 * e.psi3_plus, -L)
        Qb = (-3 * e.psi3_minus, -L)
        gen = _generic_family(P, Qa, Qb, -1.0 / L, 1)
        _compare("R3 (linear)", closed, gen, rtol)
        mn, arg = _min_on_unit(closed)
        return ResultantSweep("R3", closed, gen, mn, arg)
    P = (-e.psi3_plus, -L, -e.psi1_plus, -e.psi2_plus)
    Qa = (-3 * e.psi3_plus, -L, e.psi1_plus, 3 * e.psi2_plus)
    Qb = (-3 * e.psi3_minus, -L, e.psi1_plus, 3 * e.psi2_plus)
    if e.psi2_plus == 0.0:
        P, Qa, Qb = _strip_z(P, Qa, Qb)
        gen = _generic_family(P, Qa, Qb, 1.0 / e.psi1_plus, len(P) - 1)
        mn, arg = _min_on_unit(gen)
        return ResultantSweep("R3", gen, gen, mn, arg)
    D = discriminant_cubic(*P)
    closed = (
        27.0 * d3 ** 3 * e.psi2_plus ** 2,
        -18.0 * d3 ** 2 * (4 * e.psi1_plus * e.psi2_plus * (-L) + e.psi1_plus ** 3
                           + 9 * e.psi2_plus ** 2 * e.psi3_plus),
        -12.0 * d3 * D,
        8.0 * e.psi3_plus * D,
    )
    # the printed form carries the opposite sign convention to R1/R2
    gen = _generic_family(P, Qa, Qb, 1.0 / e.psi2_plus, 3)
    _compare("R3", closed, gen, rtol)
    mn, arg = _min_on_unit(closed)
    return ResultantSweep("R3", closed, gen, mn, arg)
