"""Compiled RK4 kernels for the autonomous ODE u'' = c3 u^-3 + alpha u - |u|^(p-2) u.

c3 = a^2 / M^2 carries the nonlocal mass M; c3 = 0 gives the local
(Dirichlet-limit) equation.
"""

import numba
import numpy as np

_jit = numba.njit(cache=True, nogil=True, error_model="numpy", fastmath=False)

STATUS_FOUND = 0
STATUS_NONE = 1
STATUS_NONPOSITIVE = 2

EVENT_CRITICAL = 0
EVENT_ZERO = 1


@_jit
def _force(u, c3, alpha, p):
    f = alpha * u - np.abs(u) ** (p - 2.0) * u
    if c3 != 0.0:
        f += c3 / (u * u * u)
    return f


@_jit
def _step(u, v, h, c3, alpha, p):
    k1u = v
    k1v = _force(u, c3, alpha, p)
    k2u = v + 0.5 * h * k1v
    k2v = _force(u + 0.5 * h * k1u, c3, alpha, p)
    k3u = v + 0.5 * h * k2v
    k3v = _force(u + 0.5 * h * k2u, c3, alpha, p)
    k4u = v + h * k3v
    k4v = _force(u + h * k3u, c3, alpha, p)
    return (
        u + h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u),
        v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
    )


@_jit
def path(lam, c3, alpha, p, h, n_steps):
    """Fixed-step trajectory from u(0) = lam, u'(0) = 0.

    Returns (u, v, first index with u <= 0 or -1).
    """
    u = np.empty(n_steps + 1)
    v = np.empty(n_steps + 1)
    u[0] = lam
    v[0] = 0.0
    bad = -1
    for i in range(n_steps):
        u[i + 1], v[i + 1] = _step(u[i], v[i], h, c3, alpha, p)
        if bad < 0 and c3 != 0.0 and u[i + 1] <= 0.0:
            bad = i + 1
            for j in range(i + 2, n_steps + 1):
                u[j] = np.nan
                v[j] = np.nan
            break
    return u, v, bad


@_jit
def path_until(lam, c3, alpha, p, h, s_max, kind):
    """Trajectory stopped at the first node past a sign change of u' (kind 0) or u (kind 1).

    Returns (u, v, status) truncated to the nodes actually computed.
    """
    nmax = int(np.ceil(s_max / h))
    u = np.empty(nmax + 1)
    v = np.empty(nmax + 1)
    u[0] = lam
    v[0] = 0.0
    status = STATUS_NONE
    n = nmax
    for i in range(nmax):
        u[i + 1], v[i + 1] = _step(u[i], v[i], h, c3, alpha, p)
        if kind == EVENT_CRITICAL:
            if c3 != 0.0 and u[i + 1] <= 0.0:
                status = STATUS_NONPOSITIVE
                n = i + 1
                break
            if i > 0 and v[i + 1] * v[i] <= 0.0 and v[i] != 0.0:
                status = STATUS_FOUND
                n = i + 1
                break
        else:
            if u[i + 1] * u[i] <= 0.0:
                status = STATUS_FOUND
                n = i + 1
                break
    return u[: n + 1], v[: n + 1], status


@_jit
def _refine(u, v, h, c3, alpha, p, kind):
    """Bisection on the sub-step m in (0, h] for the sign change of v (kind 0) or u (kind 1)."""
    lo = 0.0
    hi = h
    ref = v if kind == EVENT_CRITICAL else u
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        um, vm = _step(u, v, mid, c3, alpha, p)
        val = vm if kind == EVENT_CRITICAL else um
        if val * ref > 0.0:
            lo = mid
        else:
            hi = mid
    m = 0.5 * (lo + hi)
    um, vm = _step(u, v, m, c3, alpha, p)
    return m, um


@_jit
def first_event(lam, c3, alpha, p, h, s_max, kind):
    """Location of the first critical point (kind 0) or zero (kind 1) of u.

    Returns (s_event, integral of u^-2 over [0, s_event], status).  The
    integral uses the trapezoid rule on the RK4 nodes plus the final partial
    step; it is only formed for kind 0.
    """
    nmax = int(np.ceil(s_max / h))
    u = lam
    v = 0.0
    s = 0.0
    acc = 0.0
    for i in range(nmax):
        un, vn = _step(u, v, h, c3, alpha, p)
        if kind == EVENT_CRITICAL:
            if c3 != 0.0 and un <= 0.0:
                return s + h, np.inf, STATUS_NONPOSITIVE
            if i > 0 and vn * v <= 0.0 and v != 0.0:
                m, um = _refine(u, v, h, c3, alpha, p, kind)
                acc += 0.5 * m * (1.0 / (u * u) + 1.0 / (um * um))
                return s + m, acc, STATUS_FOUND
            acc += 0.5 * h * (1.0 / (u * u) + 1.0 / (un * un))
        else:
            if un * u <= 0.0:
                m, um = _refine(u, v, h, c3, alpha, p, kind)
                return s + m, 0.0, STATUS_FOUND
        u = un
        v = vn
        s += h
    return np.inf, acc, STATUS_NONE


@_jit
def scan_events(lams, c3, alpha, p, h, s_max, kind):
    """first_event over an array of initial heights."""
    out = np.empty(lams.size)
    for i in range(lams.size):
        s, _, status = first_event(lams[i], c3, alpha, p, h, s_max, kind)
        out[i] = s if status == STATUS_FOUND else (np.inf if status == STATUS_NONE else np.nan)
    return out
