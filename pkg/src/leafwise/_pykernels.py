"""Pure-Python versions of the compiled kernels (same signatures, same arithmetic)."""

import math

import numpy as np


def reaction(u, beta, p1, p2, p3):
    inv = 1.0 / u
    inv3 = inv * inv * inv
    return beta * u + p1 * inv - p2 * inv3 + p3 * u * u * u


def reaction_du(u, beta, p1, p2, p3):
    inv2 = 1.0 / (u * u)
    return beta - p1 * inv2 + 3.0 * p2 * inv2 * inv2 + 3.0 * p3 * u * u


def rhs_1d(u, beta, p1, p2, p3, inv_h2):
    lap = (np.roll(u, 1) - 2.0 * u + np.roll(u, -1)) * inv_h2
    return lap + reaction(u, beta, p1, p2, p3)


def rhs_2d(u, beta, p1, p2, p3, nx, ny, inv_hx2, inv_hy2):
    a = u.reshape(nx, ny)
    lap = ((np.roll(a, 1, 0) - 2.0 * a + np.roll(a, -1, 0)) * inv_hx2
           + (np.roll(a, 1, 1) - 2.0 * a + np.roll(a, -1, 1)) * inv_hy2)
    return lap.reshape(-1) + reaction(u, beta, p1, p2, p3)


def _f(y, b, p1, p2, p3):
    inv = 1.0 / y
    return b * y + p1 * inv - p2 * inv * inv * inv + p3 * y * y * y


def _ok(v):
    return v > 0 and math.isfinite(v)


def ode_dopri(b, p1, p2, p3, y0, t_end, rtol, atol, t_eval, y_low, y_high, max_steps):
    """Integrate y' = b y + p1/y - p2/y^3 + p3 y^3 from (0, y0).

    Returns (ts, ys, status, nsteps); status 0 reached t_end, 1 blow-down,
    2 blow-up, 3 step underflow, 4 step cap.
    """
    t, y = 0.0, float(y0)
    steps, ie, status = 0, 0, 0
    dense = t_eval is not None
    ts_out, ys_out = [0.0], [y]
    if dense:
        te = np.ascontiguousarray(t_eval, dtype=float)
        ne = te.shape[0]
        while ie < ne and te[ie] <= 0.0:
            ie += 1
    else:
        ne = 0
    k1 = _f(y, b, p1, p2, p3)
    h = min(0.01 * (abs(y) + 1e-3) / (abs(k1) + 1e-12), t_end)
    h = max(h, 1e-12)
    while t < t_end:
        if steps >= max_steps:
            status = 4
            break
        tstop = t_end
        if dense and ie < ne and te[ie] < tstop:
            tstop = float(te[ie])
        if t + h > tstop:
            h = tstop - t
        hmin = 1e-14 * max(1.0, abs(t))
        if h < hmin and tstop - t > hmin:
            status = 1 if k1 < 0 else (2 if k1 > 0 else 3)
            break
        ys = y + h * (0.2 * k1)
        if not _ok(ys):
            h *= 0.25
            continue
        k2 = _f(ys, b, p1, p2, p3)
        ys = y + h * (3.0 / 40.0 * k1 + 9.0 / 40.0 * k2)
        if not _ok(ys):
            h *= 0.25
            continue
        k3 = _f(ys, b, p1, p2, p3)
        ys = y + h * (44.0 / 45.0 * k1 - 56.0 / 15.0 * k2 + 32.0 / 9.0 * k3)
        if not _ok(ys):
            h *= 0.25
            continue
        k4 = _f(ys, b, p1, p2, p3)
        ys = y + h * (19372.0 / 6561.0 * k1 - 25360.0 / 2187.0 * k2
                      + 64448.0 / 6561.0 * k3 - 212.0 / 729.0 * k4)
        if not _ok(ys):
            h *= 0.25
            continue
        k5 = _f(ys, b, p1, p2, p3)
        ys = y + h * (9017.0 / 3168.0 * k1 - 355.0 / 33.0 * k2 + 46732.0 / 5247.0 * k3
                      + 49.0 / 176.0 * k4 - 5103.0 / 18656.0 * k5)
        if not _ok(ys):
            h *= 0.25
            continue
        k6 = _f(ys, b, p1, p2, p3)
        ynew = y + h * (35.0 / 384.0 * k1 + 500.0 / 1113.0 * k3 + 125.0 / 192.0 * k4
                        - 2187.0 / 6784.0 * k5 + 11.0 / 84.0 * k6)
        if not _ok(ynew):
            h *= 0.25
            continue
        k7 = _f(ynew, b, p1, p2, p3)
        err = h * (71.0 / 57600.0 * k1 - 71.0 / 16695.0 * k3 + 71.0 / 1920.0 * k4
                   - 17253.0 / 339200.0 * k5 + 22.0 / 525.0 * k6 - 1.0 / 40.0 * k7)
        sc = atol + rtol * max(abs(y), abs(ynew))
        err = abs(err) / sc
        if err <= 1.0:
            t = tstop if t + h >= tstop else t + h
            y = ynew
            k1 = k7
            steps += 1
            if dense:
                if ie < ne and t >= te[ie]:
                    ts_out.append(t)
                    ys_out.append(y)
                    ie += 1
            else:
                ts_out.append(t)
                ys_out.append(y)
            if y < y_low:
                status = 1
                break
            if y > y_high:
                status = 2
                break
            fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
        else:
            fac = max(0.2, 0.9 * err ** -0.2)
        h *= fac
    if dense and status != 0 and ts_out[-1] != t:
        ts_out.append(t)
        ys_out.append(y)
    return np.array(ts_out), np.array(ys_out), status, steps
