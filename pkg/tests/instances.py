"""Random envelope instances per regime, shared by unit and acceptance tests."""

import dataclasses
import math

import numpy as np

from leafwise.conditions import envelope_checks
from leafwise.cubic import EnvelopeSet, lambda_window


def _spread(rng, c, s):
    return c * (1 - rng.uniform(0, s)), c * (1 + rng.uniform(0, s))


def candidate(regime, rng):
    """One random (lambda0, envelopes) pair near the admissible region of ``regime``."""
    if regime == "A":
        p1 = rng.uniform(1, 5)
        p3 = rng.uniform(0.2, 2)
        p2 = math.sqrt(p1 ** 3 / (27 * p3)) * rng.uniform(0.2, 0.8)
        lo, hi = lambda_window(p1, p2, p3)
        lam = lo + (hi - lo) * rng.uniform(0.3, 0.7)
        s = 0.02
        return lam, EnvelopeSet(*_spread(rng, p1, s), *_spread(rng, p2, s), *_spread(rng, p3, s))
    if regime == "B":
        p1, p2, p3 = rng.uniform(0.2, 3), rng.uniform(0.2, 2), rng.uniform(0.2, 2)
        s = 0.05
        env = EnvelopeSet(*_spread(rng, p1, s), *_spread(rng, p2, s), *_spread(rng, p3, s))
        return -rng.uniform(3, 30), env
    if regime == "C1":
        p1, p2 = rng.uniform(0.5, 4), rng.uniform(0.1, 2)
        env = EnvelopeSet(*_spread(rng, p1, 0.05), *_spread(rng, p2, 0.05), 0.0, 0.0)
        return rng.uniform(0.05, 0.95) * env.psi1_minus ** 2 / (4 * env.psi2_plus), env
    raise ValueError(regime)


def admissible(regime, rng, count, max_tries=100_000):
    """``count`` random instances on which every envelope hypothesis passes."""
    out = []
    for _ in range(max_tries):
        lam, env = candidate(regime, rng)
        checks, _ = envelope_checks(regime, lam, env)
        if all(c.passed for c in checks):
            out.append((lam, env))
            if len(out) == count:
                return out
    raise RuntimeError(f"could not draw {count} admissible {regime} instances")


# independent oracles for the hypotheses that can be broken one at a time


def oracle_c1_window(lam, env):
    return 0 < lam < env.psi1_minus ** 2 / (4 * env.psi2_plus)


def oracle_below_kbar(lam, env):
    p1, p2, p3, q2 = env.psi1_plus, env.psi2_plus, env.psi3_plus, env.psi2_minus
    big = max(18 * p1 * p2, 4 * p1 ** 3 + 27 * p2 ** 2 * p3)
    return lam < -(1 + math.sqrt(big * p3 / (4 * q2)))


def _positive_z_roots(c):
    return sum(1 for r in np.roots(c) if abs(r.imag) < 1e-9 and r.real > 0)


def oracle_three_roots(lam, env):
    """Both envelope cubics of the positive-cubic regime have three positive roots."""
    e = env
    lower = [e.psi3_minus, -lam, e.psi1_minus, -e.psi2_plus]
    upper = [e.psi3_plus, -lam, e.psi1_plus, -e.psi2_minus]
    return _positive_z_roots(lower) == 3 and _positive_z_roots(upper) == 3


def _disc_from_roots(c):
    """Discriminant a^4 Π (ri - rj)² from numerically found roots."""
    r = np.roots(c)
    prod = 1.0 + 0j
    for i in range(3):
        for j in range(i + 1, 3):
            prod *= (r[i] - r[j]) ** 2
    return float((c[0] ** 4 * prod).real)


def oracle_delta3(lam, env):
    e = env
    d_lo = _disc_from_roots([e.psi3_minus, -lam, e.psi1_minus, -e.psi2_plus])
    d_hi = _disc_from_roots([e.psi3_plus, -lam, e.psi1_plus, -e.psi2_minus])
    first = 8 * e.psi3_minus * d_lo / (
        27 * e.psi2_plus ** 2 + 18 * (4 * e.psi1_minus * e.psi2_plus * lam + e.psi1_minus ** 3
                                      + 9 * e.psi2_plus ** 2 * e.psi3_minus))
    second = (3 * e.psi3_minus - e.psi3_plus) * d_hi / (
        9 * (4 * e.psi1_plus * e.psi2_minus * lam + e.psi1_plus ** 3
             + 9 * e.psi2_minus ** 2 * e.psi3_plus))
    return (e.psi3_plus - e.psi3_minus) ** 2 <= min(1.0, first, second)


def _bump_psi3_plus(lam, env, r):
    return lam, dataclasses.replace(env, psi3_plus=env.psi3_plus * r.uniform(1.0, 1.3))


TARGETS = {
    "A": ("delta3_resultant_bound", _bump_psi3_plus, oracle_delta3),
    "B": ("lambda0_below_kbar", lambda lam, env, r: (lam * r.uniform(0.0, 1.0), env),
          oracle_below_kbar),
    "C1": ("lambda0_c1_window", lambda lam, env, r: (lam * r.uniform(1.0, 5.0), env),
           oracle_c1_window),
}


def single_violations(regime, rng, count, max_tries=20_000):
    """Perturbed admissible instances on which the oracle says the target fails.

    The perturbation touches one quantity.  Other checks that depend on it may
    fail as well, so callers keep the instances where they still pass.
    """
    name, perturb, oracle = TARGETS[regime]
    base = admissible(regime, rng, 50)
    out = []
    for i in range(max_tries):
        lam, env = base[i % len(base)]
        lam2, env2 = perturb(lam, env, rng)
        if oracle(lam2, env2):
            continue
        out.append((name, lam2, env2))
        if len(out) == count:
            return out
    raise RuntimeError(f"no single violations found for {regime}")
