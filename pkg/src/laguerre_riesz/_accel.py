"""Hot loops for the orthonormal Laguerre recurrence.

Every kernel works in the variable ``u = x**2`` and evaluates the
Laguerre functions

    phi_n^a(x) = sqrt(2 n! / Gamma(n+a+1)) L_n^a(u) exp(-u/2)

through the symmetric three-term recurrence

    sqrt((n+1)(n+a+1)) psi_{n+1} = (2n+a+1-u) psi_n - sqrt(n(n+a)) psi_{n-1}

carrying a per-point log scale so that neither ``exp(-u/2)`` nor the
polynomial growth can under/overflow for large ``u``.

Two implementations exist: numba ``@njit`` loops (per point) and a
vectorised numpy path (per degree).  ``LAGUERRE_RIESZ_BACKEND`` selects
between them (``numba`` or ``numpy``); the default is numba when it
imports.
"""

import math
import os

import numpy as np

_BIG = 1e150
_SMALL = 1e-150
_LOG_BIG = math.log(_BIG)

try:  # pragma: no cover - exercised implicitly
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False


def _choose_backend():
    requested = os.environ.get("LAGUERRE_RIESZ_BACKEND", "").strip().lower()
    if requested in ("numpy", "python", "off", "0"):
        return "numpy"
    if requested == "numba" and not HAVE_NUMBA:
        raise ImportError("LAGUERRE_RIESZ_BACKEND=numba but numba is not importable")
    return "numba" if HAVE_NUMBA else "numpy"


BACKEND = _choose_backend()


def _log_start(a, u):
    return 0.5 * math.log(2.0) - 0.5 * u - 0.5 * math.lgamma(a + 1.0)


# ---------------------------------------------------------------------------
# numpy reference path
# ---------------------------------------------------------------------------


def _np_start(a, u):
    logs = 0.5 * math.log(2.0) - 0.5 * u - 0.5 * math.lgamma(a + 1.0)
    return np.ones_like(u), np.zeros_like(u), logs


def _np_rescale(cur, prev, logs):
    big = np.abs(cur) > _BIG
    if big.any():
        cur[big] *= _SMALL
        prev[big] *= _SMALL
        logs[big] += _LOG_BIG
    return big


def coefficients(n, a):
    """Per-degree recurrence constants (diag, off/scale, 1/scale) for k < n."""
    k = np.arange(n, dtype=np.float64)
    inv = 1.0 / np.sqrt((k + 1.0) * (k + a + 1.0))
    off = np.sqrt(np.maximum(k * (k + a), 0.0)) * inv
    return (2.0 * k + a + 1.0), off, inv


def _np_step(k, coef, u, cur, prev):
    diag, off, inv = coef
    return (diag[k] - u) * inv[k] * cur - off[k] * prev, cur


def phi_last_np(n, a, u):
    u = np.asarray(u, dtype=np.float64)
    cur, prev, logs = _np_start(a, u)
    coef = coefficients(n, a)
    for k in range(n):
        cur, prev = _np_step(k, coef, u, cur, prev)
        _np_rescale(cur, prev, logs)
    with np.errstate(under="ignore", over="ignore"):
        return cur * np.exp(logs)


def phi_table_np(nmax, a, u):
    u = np.asarray(u, dtype=np.float64)
    out = np.empty((nmax + 1,) + u.shape)
    cur, prev, logs = _np_start(a, u)
    coef = coefficients(nmax, a)
    with np.errstate(under="ignore", over="ignore"):
        out[0] = cur * np.exp(logs)
        for k in range(nmax):
            cur, prev = _np_step(k, coef, u, cur, prev)
            _np_rescale(cur, prev, logs)
            out[k + 1] = cur * np.exp(logs)
    return out


def christoffel_np(order, a, u):
    """sum_{k<order} phi_k(x)^2 at u = x^2."""
    u = np.asarray(u, dtype=np.float64)
    cur, prev, logs = _np_start(a, u)
    acc = np.ones_like(u)  # in units of exp(2*logs)
    coef = coefficients(order - 1, a)
    for k in range(order - 1):
        cur, prev = _np_step(k, coef, u, cur, prev)
        big = np.abs(cur) > _BIG
        if big.any():
            cur[big] *= _SMALL
            prev[big] *= _SMALL
            acc[big] *= _SMALL * _SMALL
            logs[big] += _LOG_BIG
        acc += cur * cur
    with np.errstate(under="ignore", over="ignore"):
        return acc * np.exp(2.0 * logs)


def pair_np(n, a, u):
    """Mantissas of (psi_n, psi_{n-1}) sharing one scale; only ratios are meaningful."""
    u = np.asarray(u, dtype=np.float64)
    cur, prev, logs = _np_start(a, u)
    coef = coefficients(n, a)
    for k in range(n):
        cur, prev = _np_step(k, coef, u, cur, prev)
        _np_rescale(cur, prev, logs)
    return cur, prev


# ---------------------------------------------------------------------------
# numba path
# ---------------------------------------------------------------------------

if HAVE_NUMBA:
    _jit = numba.njit(cache=True, nogil=True)

    # degree-outer / point-inner so the point loop vectorises; the log
    # scale is refreshed every 8 degrees (one step grows by < 1e5 for the
    # arguments used here, so 1e150 * 1e40 stays finite)

    @_jit
    def _nb_init(a, u):
        m = u.shape[0]
        cur = np.ones(m)
        prev = np.zeros(m)
        logs = 0.5 * math.log(2.0) - 0.5 * u - 0.5 * math.lgamma(a + 1.0)
        return cur, prev, logs

    @_jit
    def _nb_advance(k, u, cur, prev, diag, off, inv):
        d = diag[k]
        o = off[k]
        iv = inv[k]
        for i in range(u.shape[0]):
            nxt = (d - u[i]) * iv * cur[i] - o * prev[i]
            prev[i] = cur[i]
            cur[i] = nxt

    @_jit
    def _nb_rescale(cur, prev, logs, acc):
        for i in range(cur.shape[0]):
            if abs(cur[i]) > _BIG or abs(prev[i]) > _BIG:
                cur[i] *= _SMALL
                prev[i] *= _SMALL
                logs[i] += _LOG_BIG
                acc[i] *= _SMALL * _SMALL

    @_jit
    def _phi_last_nb(n, a, u, diag, off, inv):
        cur, prev, logs = _nb_init(a, u)
        dummy = np.zeros(u.shape[0])
        for k in range(n):
            _nb_advance(k, u, cur, prev, diag, off, inv)
            if (k & 7) == 7 or k == n - 1:
                _nb_rescale(cur, prev, logs, dummy)
        out = np.empty(u.shape[0])
        for i in range(u.shape[0]):
            out[i] = cur[i] * math.exp(logs[i])
        return out

    @_jit
    def _phi_table_nb(nmax, a, u, diag, off, inv):
        m = u.shape[0]
        cur, prev, logs = _nb_init(a, u)
        dummy = np.zeros(m)
        out = np.empty((nmax + 1, m))
        sc = np.empty(m)  # exp(logs), refreshed only when a point is rescaled
        for i in range(m):
            sc[i] = math.exp(logs[i])
            out[0, i] = sc[i]
        for k in range(nmax):
            _nb_advance(k, u, cur, prev, diag, off, inv)
            if (k & 7) == 7:
                for i in range(m):
                    if abs(cur[i]) > _BIG or abs(prev[i]) > _BIG:
                        cur[i] *= _SMALL
                        prev[i] *= _SMALL
                        logs[i] += _LOG_BIG
                        sc[i] = math.exp(logs[i])
            row = out[k + 1]
            for i in range(m):
                row[i] = cur[i] * sc[i]
        return out

    @_jit
    def _christoffel_nb(order, a, u, diag, off, inv):
        m = u.shape[0]
        cur, prev, logs = _nb_init(a, u)
        acc = np.ones(m)  # in units of exp(2*logs)
        for k in range(order - 1):
            _nb_advance(k, u, cur, prev, diag, off, inv)
            _nb_rescale(cur, prev, logs, acc)  # squares must not overflow
            for i in range(m):
                acc[i] += cur[i] * cur[i]
        out = np.empty(m)
        for i in range(m):
            out[i] = acc[i] * math.exp(2.0 * logs[i])
        return out

    @_jit
    def _pair_nb(n, a, u, diag, off, inv):
        cur, prev, logs = _nb_init(a, u)
        dummy = np.zeros(u.shape[0])
        for k in range(n):
            _nb_advance(k, u, cur, prev, diag, off, inv)
            if (k & 7) == 7 or k == n - 1:
                _nb_rescale(cur, prev, logs, dummy)
        return cur, prev


def _flat(u):
    u = np.asarray(u, dtype=np.float64)
    return np.ascontiguousarray(u.reshape(-1)), u.shape


def phi_last(n, a, u, backend=None):
    """phi_n^a at x = sqrt(u), elementwise over ``u``."""
    backend = backend or BACKEND
    flat, shape = _flat(u)
    if backend == "numba":
        return _phi_last_nb(int(n), float(a), flat, *coefficients(int(n), float(a))).reshape(shape)
    return phi_last_np(int(n), float(a), flat).reshape(shape)


def phi_table(nmax, a, u, backend=None):
    """Array of shape ``(nmax+1,) + u.shape`` holding phi_0..phi_nmax."""
    backend = backend or BACKEND
    flat, shape = _flat(u)
    if backend == "numba":
        out = _phi_table_nb(int(nmax), float(a), flat, *coefficients(int(nmax), float(a)))
    else:
        out = phi_table_np(int(nmax), float(a), flat)
    return out.reshape((nmax + 1,) + shape)


def christoffel(order, a, u, backend=None):
    backend = backend or BACKEND
    flat, shape = _flat(u)
    if backend == "numba":
        return _christoffel_nb(int(order), float(a), flat, *coefficients(max(int(order) - 1, 0), float(a))).reshape(shape)
    return christoffel_np(int(order), float(a), flat).reshape(shape)


def pair(n, a, u, backend=None):
    backend = backend or BACKEND
    flat, shape = _flat(u)
    if backend == "numba":
        c, p = _pair_nb(int(n), float(a), flat, *coefficients(int(n), float(a)))
    else:
        c, p = pair_np(int(n), float(a), flat)
    return c.reshape(shape), p.reshape(shape)
