# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: reaction term, explicit right-hand side, scalar
Dormand-Prince integrator for y' = P(y^2)/y^3.

Every function mirrors _pykernels exactly (same arithmetic order).
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, fmax, fmin, pow, isfinite

cnp.import_array()


def reaction(const double[::1] u, const double[::1] beta, const double[::1] p1,
             const double[::1] p2, const double[::1] p3):
    cdef Py_ssize_t i, n = u.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    cdef double ui, inv, inv3
    for i in range(n):
        ui = u[i]
        inv = 1.0 / ui
        inv3 = inv * inv * inv
        o[i] = beta[i] * ui + p1[i] * inv - p2[i] * inv3 + p3[i] * ui * ui * ui
    return out


def reaction_du(const double[::1] u, const double[::1] beta, const double[::1] p1,
                const double[::1] p2, const double[::1] p3):
    cdef Py_ssize_t i, n = u.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    cdef double ui, inv2
    for i in range(n):
        ui = u[i]
        inv2 = 1.0 / (ui * ui)
        o[i] = beta[i] - p1[i] * inv2 + 3.0 * p2[i] * inv2 * inv2 + 3.0 * p3[i] * ui * ui
    return out


def rhs_1d(const double[::1] u, const double[::1] beta, const double[::1] p1,
           const double[::1] p2, const double[::1] p3, double inv_h2):
    cdef Py_ssize_t i, n = u.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    cdef double ui, inv, inv3, lap
    for i in range(n):
        ui = u[i]
        lap = (u[(i - 1 + n) % n] - 2.0 * ui + u[(i + 1) % n]) * inv_h2
        inv = 1.0 / ui
        inv3 = inv * inv * inv
        o[i] = lap + (beta[i] * ui + p1[i] * inv - p2[i] * inv3 + p3[i] * ui * ui * ui)
    return out


def rhs_2d(const double[::1] u, const double[::1] beta, const double[::1] p1,
           const double[::1] p2, const double[::1] p3, Py_ssize_t nx, Py_ssize_t ny,
           double inv_hx2, double inv_hy2):
    cdef Py_ssize_t i, j, k, n = nx * ny
    out = np.empty(n)
    cdef double[::1] o = out
    cdef double ui, inv, inv3, lap
    for i in range(nx):
        for j in range(ny):
            k = i * ny + j
            ui = u[k]
            lap = ((u[((i - 1 + nx) % nx) * ny + j] - 2.0 * ui + u[((i + 1) % nx) * ny + j]) * inv_hx2
                   + (u[i * ny + (j - 1 + ny) % ny] - 2.0 * ui + u[i * ny + (j + 1) % ny]) * inv_hy2)
            inv = 1.0 / ui
            inv3 = inv * inv * inv
            o[k] = lap + (beta[k] * ui + p1[k] * inv - p2[k] * inv3 + p3[k] * ui * ui * ui)
    return out


cdef inline double _f(double y, double b, double p1, double p2, double p3) nogil:
    cdef double inv = 1.0 / y
    return b * y + p1 * inv - p2 * inv * inv * inv + p3 * y * y * y


def ode_dopri(double b, double p1, double p2, double p3, double y0, double t_end,
              double rtol, double atol, t_eval, double y_low, double y_high,
              Py_ssize_t max_steps):
    """Integrate y' = b y + p1/y - p2/y^3 + p3 y^3 from (0, y0).

    Returns (ts, ys, status, nsteps); status 0 reached t_end, 1 blow-down,
    2 blow-up, 3 step underflow, 4 step cap.
    """
    cdef double t = 0.0, y = y0, h, hmin, err, sc, ynew, fac, tnext, tstop
    cdef double k1, k2, k3, k4, k5, k6, k7, ys
    cdef Py_ssize_t steps = 0, ie = 0, ne
    cdef int status = 0, dense = t_eval is not None
    cdef double[::1] te
    ts_out = [0.0]
    ys_out = [y0]
    if dense:
        te = np.ascontiguousarray(t_eval, dtype=float)
        ne = te.shape[0]
        while ie < ne and te[ie] <= 0.0:
            ie += 1
    else:
        ne = 0
    k1 = _f(y, b, p1, p2, p3)
    h = fmin(0.01 * (fabs(y) + 1e-3) / (fabs(k1) + 1e-12), t_end)
    h = fmax(h, 1e-12)
    while t < t_end:
        if steps >= max_steps:
            status = 4
            break
        tstop = t_end
        if dense and ie < ne and te[ie] < tstop:
            tstop = te[ie]
        if t + h > tstop:
            h = tstop - t
        hmin = 1e-14 * fmax(1.0, fabs(t))
        if h < hmin and tstop - t > hmin:
            if k1 < 0:
                status = 1
            elif k1 > 0:
                status = 2
            else:
                status = 3
            break
        ys = y + h * (0.2 * k1)
        if not (ys > 0 and isfinite(ys)):
            h *= 0.25
            continue
        k2 = _f(ys, b, p1, p2, p3)
        ys = y + h * (3.0 / 40.0 * k1 + 9.0 / 40.0 * k2)
        if not (ys > 0 and isfinite(ys)):
            h *= 0.25
            continue
        k3 = _f(ys, b, p1, p2, p3)
        ys = y + h * (44.0 / 45.0 * k1 - 56.0 / 15.0 * k2 + 32.0 / 9.0 * k3)
        if not (ys > 0 and isfinite(ys)):
            h *= 0.25
            continue
        k4 = _f(ys, b, p1, p2, p3)
        ys = y + h * (19372.0 / 6561.0 * k1 - 25360.0 / 2187.0 * k2
                      + 64448.0 / 6561.0 * k3 - 212.0 / 729.0 * k4)
        if not (ys > 0 and isfinite(ys)):
            h *= 0.25
            continue
        k5 = _f(ys, b, p1, p2, p3)
        ys = y + h * (9017.0 / 3168.0 * k1 - 355.0 / 33.0 * k2 + 46732.0 / 5247.0 * k3
                      + 49.0 / 176.0 * k4 - 5103.0 / 18656.0 * k5)
        if not (ys > 0 and isfinite(ys)):
            h *= 0.25
            continue
        k6 = _f(ys, b, p1, p2, p3)
        ynew = y + h * (35.0 / 384.0 * k1 + 500.0 / 1113.0 * k3 + 125.0 / 192.0 * k4
                        - 2187.0 / 6784.0 * k5 + 11.0 / 84.0 * k6)
        if not (ynew > 0 and isfinite(ynew)):
            h *= 0.25
            continue
        k7 = _f(ynew, b, p1, p2, p3)
        err = h * (71.0 / 57600.0 * k1 - 71.0 / 16695.0 * k3 + 71.0 / 1920.0 * k4
                   - 17253.0 / 339200.0 * k5 + 22.0 / 525.0 * k6 - 1.0 / 40.0 * k7)
        sc = atol + rtol * fmax(fabs(y), fabs(ynew))
        err = fabs(err) / sc
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
            if err == 0.0:
                fac = 5.0
            else:
                fac = fmin(5.0, fmax(0.2, 0.9 * pow(err, -0.2)))
        else:
            fac = fmax(0.2, 0.9 * pow(err, -0.2))
        h *= fac
    if dense and (status != 0) and ts_out[len(ts_out) - 1] != t:
        ts_out.append(t)
        ys_out.append(y)
    return np.array(ts_out), np.array(ys_out), status, steps
