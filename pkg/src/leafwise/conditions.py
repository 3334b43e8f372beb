"""Hypothesis checks with numeric margins and admissible Φ intervals.

Every check stores lhs, rhs and a margin that is positive exactly when the
inequality holds.  Theorem ids:

    leaf                existence on a compact leaf, cases 1-3
    leaf_integrable     same with integrable normal bundle, cases 1-3
    fibred              existence and uniqueness on a closed foliated manifold, cases 1-2
    fibred_integrable   same with integrable normal bundle, cases 1-3
    pseudo_riemannian   torsion-free case with Ψ3 ≡ 0
    attractor           one-point attractor certificates, case = regime A, B, C1, C3
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cubic import (EnvelopeSet, RegimeTag, discriminant_cubic, envelope_coefficients,
                    resultant_sweep_R1, resultant_sweep_R2, resultant_sweep_R3, window_bounds)
from .errors import TranscriptionError
from .grid import ScalarField, delta_ratio
from .model import Coefficients

THEOREMS = ("leaf", "leaf_integrable", "fibred", "fibred_integrable", "pseudo_riemannian",
            "attractor")
K2_GROUPINGS = ("as_printed", "grouped")


@dataclass
class Check:
    name: str
    lhs: float
    rhs: float
    passed: bool
    margin: float
    description: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "lhs": _num(self.lhs), "rhs": _num(self.rhs),
                "pass": bool(self.passed), "margin": _num(self.margin)}


def _num(x):
    x = float(x)
    if math.isnan(x):
        return None
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


@dataclass
class ConditionReport:
    theorem: str
    case: str
    checks: list
    phi_interval: tuple | None
    extras: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failing(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "theorem": self.theorem,
            "case": self.case,
            "checks": [c.to_dict() for c in self.checks],
            "phi_interval": None if self.phi_interval is None
            else [_num(self.phi_interval[0]), _num(self.phi_interval[1])],
            "extras": self.extras,
        }


# ---------------------------------------------------------------------------
# individual inequalities


def _less(name, lhs, rhs, desc=""):
    """lhs < rhs."""
    return Check(name, lhs, rhs, bool(lhs < rhs), rhs - lhs, desc)


def _greater(name, lhs, rhs, desc=""):
    """lhs > rhs."""
    return Check(name, lhs, rhs, bool(lhs > rhs), lhs - rhs, desc)


def _sign(name, f, want):
    v = f.values if isinstance(f, ScalarField) else np.atleast_1d(float(f))
    lo, hi = float(np.min(v)), float(np.max(v))
    if want == "positive":
        return Check(name, lo, 0.0, lo > 0, lo)
    if want == "negative":
        return Check(name, hi, 0.0, hi < 0, -hi)
    if want == "nonnegative":
        return Check(name, lo, 0.0, lo >= 0, lo)
    # zero
    m = max(abs(lo), abs(hi))
    return Check(name, m, 0.0, m == 0.0, -m)


def field_cubic_smallness(coeffs: Coefficients, delta_e0: float) -> Check:
    """27 max Ψ2² · max|Ψ3| / min|Ψ1|³ < δ⁸(e0)."""
    p1 = float(np.min(np.abs(coeffs.psi1.values)))
    p2 = float(np.max(coeffs.psi2.values ** 2))
    p3 = float(np.max(np.abs(coeffs.psi3.values)))
    lhs = 27.0 * p2 * p3 / p1 ** 3 if p1 > 0 else math.inf
    return _less("field_cubic_smallness", lhs, delta_e0 ** 8)


def field_psi3_flatness(coeffs: Coefficients, delta_e0: float) -> Check:
    """δ(|Ψ3|) δ²(e0) > 1/3."""
    a = np.abs(coeffs.psi3.values)
    d3 = float(a.min() / a.max()) if a.max() > 0 else 0.0
    return _greater("field_psi3_flatness", d3 * delta_e0 ** 2, 1.0 / 3.0)


def raw_bounds(coeffs: Coefficients) -> dict:
    """ψi± = max/min over the leaf of |Ψi|."""
    out = {}
    for i, f in ((1, coeffs.psi1), (2, coeffs.psi2), (3, coeffs.psi3)):
        a = np.abs(f.values)
        out[f"psi{i}_plus"] = float(a.max())
        out[f"psi{i}_minus"] = float(a.min())
    return out


def k1_value(coeffs: Coefficients) -> float:
    r = raw_bounds(coeffs)
    p1, p2, p3, q2 = r["psi1_plus"], r["psi2_plus"], r["psi3_plus"], r["psi2_minus"]
    return p3 * max(18.0 * p1 * p2, 4.0 * p1 ** 3 + 27.0 * p2 ** 2 * p3) / (4.0 * q2)


def k2_value(coeffs: Coefficients, grouping: str = "as_printed") -> float:
    """Uniqueness constant for the negative-cubic fibred case.

    ``as_printed`` reads the second operand literally,
    27 ψ3+ (ψ2+)² (ψ3+)² + 3 (ψ3-)² + (ψ1+)³ (ψ3+ + 3ψ3-)²;
    ``grouped`` reads 27 ψ3+ (ψ2+)² ((ψ3+)² + 3 (ψ3-)²) + (ψ1+)³ (ψ3+ + 3ψ3-)².
    """
    if grouping not in K2_GROUPINGS:
        raise ValueError(f"unknown K2 grouping {grouping!r}")
    r = raw_bounds(coeffs)
    p1, p2 = r["psi1_plus"], r["psi2_plus"]
    s3p, s3m = r["psi3_plus"], r["psi3_minus"]
    first = 36.0 * p1 * p2 * s3m * (s3m + s3p)
    if grouping == "as_printed":
        second = 27.0 * s3p * p2 ** 2 * s3p ** 2 + 3.0 * s3m ** 2 + p1 ** 3 * (s3p + 3 * s3m) ** 2
    else:
        second = 27.0 * s3p * p2 ** 2 * (s3p ** 2 + 3.0 * s3m ** 2) + p1 ** 3 * (s3p + 3 * s3m) ** 2
    return max(first, second) / (8.0 * p2 * (3.0 * s3m - s3p))


def kbar_value(env: EnvelopeSet) -> float:
    e = env
    B = max(18.0 * e.psi1_plus * e.psi2_plus,
            4.0 * e.psi1_plus ** 3 + 27.0 * e.psi2_plus ** 2 * e.psi3_plus)
    return 1.0 + math.sqrt(B * e.psi3_plus / (4.0 * e.psi2_minus))


def k_uniqueness_value(env: EnvelopeSet) -> float:
    e = env
    num = max(36.0 * e.psi1_plus * e.psi2_plus * e.psi3_minus * (e.psi3_minus + e.psi3_plus),
              27.0 * e.psi3_plus * e.psi2_plus ** 2 * (e.psi3_plus ** 2 + 3.0 * e.psi3_minus ** 2)
              + e.psi1_plus ** 3 * (e.psi3_plus + 3.0 * e.psi3_minus) ** 2)
    return num / (8.0 * e.psi2_plus * (3.0 * e.psi3_minus - e.psi3_plus))


def envelope_cubic_smallness(env: EnvelopeSet) -> Check:
    """(Ψ1-)³ > 27 (Ψ2+)² Ψ3+."""
    return _greater("envelope_cubic_smallness", env.psi1_minus ** 3,
                    27.0 * env.psi2_plus ** 2 * env.psi3_plus)


def envelope_psi3_spread(env: EnvelopeSet) -> Check:
    """3 Ψ3- > Ψ3+."""
    return _greater("envelope_psi3_spread", 3.0 * env.psi3_minus, env.psi3_plus)


def lambda0_below_kbar(lambda0: float, env: EnvelopeSet) -> Check:
    """λ0 < -K̄."""
    return _less("lambda0_below_kbar", lambda0, -kbar_value(env))


def lambda0_uniqueness_bound(lambda0: float, env: EnvelopeSet) -> Check:
    """-λ0 > 1 + √K (needs 3Ψ3- > Ψ3+ for K to be defined)."""
    if not 3.0 * env.psi3_minus > env.psi3_plus:
        return Check("lambda0_uniqueness_bound", -lambda0, math.inf, False, -math.inf)
    return _greater("lambda0_uniqueness_bound", -lambda0, 1.0 + math.sqrt(k_uniqueness_value(env)))


def lambda0_c1_window(lambda0: float, env: EnvelopeSet) -> Check:
    """0 < λ0 < (Ψ1-)²/(4 Ψ2+)."""
    rhs = env.psi1_minus ** 2 / (4.0 * env.psi2_plus) if env.psi2_plus > 0 else math.inf
    margin = min(lambda0, rhs - lambda0)
    return Check("lambda0_c1_window", lambda0, rhs, bool(margin > 0), margin)


def delta3_resultant_bound(lambda0: float, env: EnvelopeSet) -> Check:
    """δ3² ≤ min{1, first, second}, a sufficient condition for R1, R2 > 0."""
    e, L = env, lambda0
    d_minus = discriminant_cubic(e.psi3_minus, -L, e.psi1_minus, -e.psi2_plus)
    d_plus = discriminant_cubic(e.psi3_plus, -L, e.psi1_plus, -e.psi2_minus)
    first = 8.0 * e.psi3_minus * d_minus / (
        27.0 * e.psi2_plus ** 2
        + 18.0 * (4 * e.psi1_minus * e.psi2_plus * L + e.psi1_minus ** 3
                  + 9 * e.psi2_plus ** 2 * e.psi3_minus))
    second = (3.0 * e.psi3_minus - e.psi3_plus) * d_plus / (
        9.0 * (4 * e.psi1_plus * e.psi2_minus * L + e.psi1_plus ** 3
               + 9 * e.psi2_minus ** 2 * e.psi3_plus))
    rhs = min(1.0, first, second)
    lhs = e.delta3 ** 2
    return Check("delta3_resultant_bound", lhs, rhs, bool(lhs <= rhs), rhs - lhs)


def window_checks(lambda0: float, env: EnvelopeSet) -> tuple[list, dict]:
    """Separation of the λ window bounds and membership of λ0."""
    try:
        wb = window_bounds(env)
    except ValueError as exc:
        bad = Check("lambda_window_separation", math.nan, math.nan, False, -math.inf, str(exc))
        inside = Check("lambda0_in_window", lambda0, math.nan, False, -math.inf)
        return [bad, inside], {}
    sep = _less("lambda_window_separation", wb.separation_lhs, wb.separation_rhs)
    margin = min(lambda0 - wb.lower, wb.upper - lambda0)
    inside = Check("lambda0_in_window", lambda0, wb.upper, bool(margin > 0), margin)
    return [sep, inside], {"window": wb.to_dict()}


def reduced_positive_cubic_bound(lambda0: float, env: EnvelopeSet) -> Check:
    """Ψ2 ≡ 0 with Ψ3 > 0: λ0² > Ψ1+(3Ψ3- + Ψ3+)²/(2(3Ψ3- - Ψ3+))."""
    e = env
    den = 2.0 * (3.0 * e.psi3_minus - e.psi3_plus)
    rhs = e.psi1_plus * (3.0 * e.psi3_minus + e.psi3_plus) ** 2 / den if den > 0 else math.inf
    return _greater("lambda0_reduced_bound", lambda0 ** 2, rhs)


def envelope_checks(regime, lambda0: float, env: EnvelopeSet) -> tuple[list, dict]:
    """Attractor hypotheses that depend only on λ0 and the envelopes.

    Sign conditions on the fields are not included.
    """
    regime = RegimeTag(regime)
    lam, checks, extras = float(lambda0), [], {}
    if regime == RegimeTag.A:
        if env.psi2_plus == 0.0:
            checks += [envelope_psi3_spread(env), reduced_positive_cubic_bound(lam, env)]
        else:
            checks += [envelope_cubic_smallness(env), envelope_psi3_spread(env)]
            wc, wx = window_checks(lam, env)
            checks += wc
            extras.update(wx)
            checks.append(delta3_resultant_bound(lam, env))
    elif regime == RegimeTag.B:
        if env.psi2_minus > 0:
            checks += [lambda0_below_kbar(lam, env), envelope_psi3_spread(env),
                       lambda0_uniqueness_bound(lam, env)]
            extras["kbar"] = kbar_value(env)
            if 3.0 * env.psi3_minus > env.psi3_plus:
                extras["k_uniqueness"] = k_uniqueness_value(env)
        else:
            checks.append(envelope_psi3_spread(env))
    elif regime == RegimeTag.C1:
        checks.append(lambda0_c1_window(lam, env))
    elif regime == RegimeTag.C3:
        checks.append(_greater("lambda0_positive", lam, 0.0))
    return checks, extras


# ---------------------------------------------------------------------------
# Φ intervals


def _interval(coeffs: Coefficients, lo_off: float, hi_off: float) -> tuple[float, float] | None:
    """Constant-Φ interval from pointwise bounds -β⊤ + lo_off < Φ < -β⊤ + hi_off."""
    mb = -coeffs.beta_top.values
    lo = float(np.max(mb)) + lo_off
    hi = float(np.min(mb)) + hi_off
    if not lo < hi:
        return None
    return lo, hi


def _phi_check(coeffs: Coefficients, lo_off: float, hi_off: float) -> Check:
    phi = coeffs.phi.values if isinstance(coeffs.phi, ScalarField) else float(coeffs.phi)
    mb = -coeffs.beta_top.values
    dist_lo = np.min(phi - (mb + lo_off)) if math.isfinite(lo_off) else math.inf
    dist_hi = np.min((mb + hi_off) - phi) if math.isfinite(hi_off) else math.inf
    margin = float(min(dist_lo, dist_hi))
    return Check("phi_in_interval", float(np.mean(phi)), margin, bool(margin > 0), margin)


def _c_integrable_offset(coeffs: Coefficients, delta_e0: float) -> float:
    p1 = float(np.max(coeffs.psi1.values))
    s_min = float(np.min(coeffs.psi3.values))
    s_max = float(np.max(coeffs.psi3.values))
    den = 3.0 * s_min - s_max
    if den <= 0:
        return math.nan
    return -delta_e0 ** -2 * math.sqrt(p1) * (3.0 * s_min + s_max) / (math.sqrt(2.0) * math.sqrt(den))


def _c_zero_cubic_offset(coeffs: Coefficients, delta_e0: float) -> float:
    p1 = float(np.min(coeffs.psi1.values ** 2))
    p2 = float(np.max(coeffs.psi2.values))
    return -delta_e0 ** 4 * p1 / (4.0 * p2) if p2 > 0 else -math.inf


# ---------------------------------------------------------------------------
# main entry


def _auto_case(theorem, coeffs):
    s3 = coeffs.psi3.values
    if np.all(s3 > 0):
        return "1"
    if np.all(s3 < 0):
        return "2" if theorem in ("leaf", "leaf_integrable", "fibred_integrable") else "1"
    return "3" if theorem in ("leaf", "leaf_integrable", "fibred_integrable") else "2"


def check_conditions(theorem_id: str, spectral, envelopes: EnvelopeSet | None = None,
                     geometry=None, *, coefficients: Coefficients | None = None,
                     case: str | None = None, lambda0: float | None = None,
                     k2_grouping: str = "as_printed", with_phi: bool = True) -> ConditionReport:
    """Evaluate the hypotheses of ``theorem_id`` and its admissible Φ interval.

    ``spectral`` supplies e0 and λ0 (λ0 may be overridden, e.g. for the
    β⊤ convention with constant Φ).  Coefficients come from ``coefficients``
    or are derived from ``geometry``.
    """
    if theorem_id not in THEOREMS:
        raise ValueError(f"unknown theorem id {theorem_id!r}; expected one of {THEOREMS}")
    if coefficients is None:
        if geometry is None:
            raise ValueError("need coefficients or geometry")
        from .geometry import coefficients_from_geometry

        coefficients = coefficients_from_geometry(geometry)
    co = coefficients
    e0 = spectral.ground_state
    d_e0 = spectral.delta_e0
    lam = spectral.lambda0 if lambda0 is None else float(lambda0)
    if envelopes is None:
        envelopes = envelope_coefficients(co.psi1, co.psi2, co.psi3, e0)
    env = envelopes
    checks: list[Check] = []
    extras: dict = {"lambda0": lam, "delta_e0": d_e0, "envelopes": env.to_dict()}
    interval = None

    if theorem_id == "attractor":
        regime = RegimeTag(case) if case is not None else co.regime(lam)
        case = regime.value
        if regime == RegimeTag.A:
            checks += [_sign("psi3_positive", co.psi3, "positive"),
                       _sign("psi1_positive", co.psi1, "positive"),
                       _sign("psi2_nonnegative", co.psi2, "nonnegative"),
                       _greater("lambda0_positive", lam, 0.0)]
            ec, ex = envelope_checks(regime, lam, env)
            checks += ec
            extras.update(ex)
            for fn in (resultant_sweep_R1, resultant_sweep_R2):
                try:
                    extras[fn.__name__[-2:]] = fn(lam, env).to_dict()
                except (TranscriptionError, ZeroDivisionError, ValueError) as exc:
                    extras[fn.__name__[-2:]] = {"error": str(exc)}
        elif regime == RegimeTag.B:
            checks += [_sign("psi3_negative", co.psi3, "negative"),
                       _sign("psi1_negative", co.psi1, "negative"),
                       _sign("psi2_nonnegative", co.psi2, "nonnegative"),
                       _less("lambda0_negative", lam, 0.0)]
            ec, ex = envelope_checks(regime, lam, env)
            checks += ec
            extras.update(ex)
            try:
                extras["R3"] = resultant_sweep_R3(lam, env).to_dict()
            except (TranscriptionError, ZeroDivisionError, ValueError) as exc:
                extras["R3"] = {"error": str(exc)}
        elif regime == RegimeTag.C1:
            checks += [_sign("psi3_zero", co.psi3, "zero"),
                       _sign("psi1_positive", co.psi1, "positive"),
                       _sign("psi2_positive", co.psi2, "positive")]
            checks += envelope_checks(regime, lam, env)[0]
        elif regime == RegimeTag.C3:
            checks += [_sign("psi3_zero", co.psi3, "zero"),
                       _sign("psi2_zero", co.psi2, "zero"),
                       _sign("psi1_positive", co.psi1, "positive"),
                       _greater("lambda0_positive", lam, 0.0)]
        else:
            checks.append(Check("regime_supported", 0.0, 0.0, False, -1.0,
                                f"regime {regime.value} has no attractor"))
        return ConditionReport("attractor", case, checks, None, extras)

    case = str(case) if case is not None else _auto_case(theorem_id, co)
    checks.append(_sign("psi2_nonnegative", co.psi2, "nonnegative"))
    lo_off = hi_off = math.nan

    if theorem_id == "leaf":
        checks.append(_sign("psi2_positive", co.psi2, "positive"))
        if case == "1":
            checks += [_sign("psi3_positive", co.psi3, "positive"),
                       _sign("psi1_positive", co.psi1, "positive"),
                       field_cubic_smallness(co, d_e0)]
            lo_off, hi_off = -math.inf, 0.0
        elif case == "2":
            checks += [_sign("psi3_negative", co.psi3, "negative"),
                       _sign("psi1_negative", co.psi1, "negative")]
            k1 = k1_value(co)
            extras["K1"] = k1
            lo_off, hi_off = 1.0 + d_e0 ** -4 * math.sqrt(k1), math.inf
        elif case == "3":
            checks += [_sign("psi3_zero", co.psi3, "zero"),
                       _sign("psi1_positive", co.psi1, "positive")]
            lo_off, hi_off = _c_zero_cubic_offset(co, d_e0), 0.0
    elif theorem_id in ("leaf_integrable", "fibred_integrable"):
        checks.append(_sign("psi2_zero", co.psi2, "zero"))
        if case == "1":
            checks += [_sign("psi3_positive", co.psi3, "positive"),
                       _sign("psi1_positive", co.psi1, "positive"),
                       field_cubic_smallness(co, d_e0),
                       _greater("field_psi3_spread", 3.0 * float(np.min(co.psi3.values)),
                                float(np.max(co.psi3.values)))]
            lo_off, hi_off = -math.inf, _c_integrable_offset(co, d_e0)
        elif case == "2":
            checks += [_sign("psi3_negative", co.psi3, "negative"),
                       _sign("psi1_zero", co.psi1, "zero"),
                       field_psi3_flatness(co, d_e0)]
            lo_off, hi_off = 0.0, math.inf
        elif case == "3":
            checks += [_sign("psi3_zero", co.psi3, "zero"),
                       _sign("psi1_positive", co.psi1, "positive")]
            lo_off, hi_off = -math.inf, 0.0
    elif theorem_id == "fibred":
        checks.append(_sign("psi2_positive", co.psi2, "positive"))
        if case == "1":
            checks += [_sign("psi3_negative", co.psi3, "negative"),
                       _sign("psi1_negative", co.psi1, "negative"),
                       field_psi3_flatness(co, d_e0)]
            k2 = k2_value(co, k2_grouping)
            extras["K2"] = k2
            extras["k2_grouping"] = k2_grouping
            lo_off = 1.0 + d_e0 ** -4 * math.sqrt(k2) if k2 >= 0 else math.nan
            hi_off = math.inf
        elif case == "2":
            checks += [_sign("psi3_zero", co.psi3, "zero"),
                       _sign("psi1_positive", co.psi1, "positive")]
            lo_off, hi_off = _c_zero_cubic_offset(co, d_e0), 0.0
    elif theorem_id == "pseudo_riemannian":
        case = "1"
        checks += [_sign("psi3_zero", co.psi3, "zero"),
                   _sign("psi2_positive", co.psi2, "positive"),
                   _sign("psi1_positive", co.psi1, "positive")]
        if geometry is not None:
            h = float(np.min(geometry.h_top_sq.values ** 2))
            t = float(np.max(geometry.t_bot_sq.values))
            lo_off = -d_e0 ** 4 * h / (4.0 * geometry.n * t) if t > 0 else -math.inf
        else:
            lo_off = _c_zero_cubic_offset(co, d_e0)
        hi_off = 0.0

    if math.isnan(lo_off) and math.isnan(hi_off):
        raise ValueError(f"unknown case {case!r} for theorem {theorem_id!r}")
    extras["phi_offsets"] = [_num(lo_off), _num(hi_off)]
    ok = all(c.passed for c in checks)
    if ok and not (math.isnan(lo_off) or math.isnan(hi_off)):
        interval = _interval(co, lo_off, hi_off)
        if with_phi:
            checks.append(_phi_check(co, lo_off, hi_off))
    return ConditionReport(theorem_id, case, checks, interval, extras)
