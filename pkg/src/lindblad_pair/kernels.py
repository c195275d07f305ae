"""Hot numeric kernels: fixed-step RK4 for affine ODEs and a small dense solve.

Each kernel exists twice. The ``*_loops`` functions are written as explicit
scalar loops and compiled with numba when available; the ``*_numpy`` functions
are the vectorized fallback. :data:`BACKEND` (from ``LINDBLAD_PAIR_BACKEND``)
decides which pair the public wrappers dispatch to. Both paths are
deterministic; they may differ from each other in the last few ulps because
matrix-vector products are summed in a different order.
"""

import math

import numpy as np

from ._backend import BACKEND, HAS_NUMBA, njit

__all__ = [
    "BACKEND",
    "HAS_NUMBA",
    "rk4_affine",
    "rk4_affine_numba",
    "rk4_affine_numpy",
    "rk4_step",
    "solve",
    "solve_numba",
    "solve_numpy",
    "sample_count",
]

# relative pivot threshold for declaring a matrix singular
PIVOT_RTOL = 1e-12


def sample_count(n_steps, stride):
    """Number of stored samples for ``n_steps`` steps at decimation ``stride``.

    Step 0 is always stored, then every ``stride``-th step, and the final step
    even when it is not a multiple of ``stride``.
    """
    count = n_steps // stride + 1
    if n_steps % stride:
        count += 1
    return count


def _rk4_affine_loops(m, c, x0, dt, n_full, last_dt, stride, out):
    n = x0.shape[0]
    x = x0.copy()
    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    tmp = np.empty(n)
    n_steps = n_full + (1 if last_dt > 0.0 else 0)
    for i in range(n):
        out[0, i] = x[i]
    row = 1
    for step in range(1, n_steps + 1):
        h = dt if step <= n_full else last_dt
        for i in range(n):
            acc = c[i]
            for j in range(n):
                acc += m[i, j] * x[j]
            k1[i] = acc
        for i in range(n):
            tmp[i] = x[i] + 0.5 * h * k1[i]
        for i in range(n):
            acc = c[i]
            for j in range(n):
                acc += m[i, j] * tmp[j]
            k2[i] = acc
        for i in range(n):
            tmp[i] = x[i] + 0.5 * h * k2[i]
        for i in range(n):
            acc = c[i]
            for j in range(n):
                acc += m[i, j] * tmp[j]
            k3[i] = acc
        for i in range(n):
            tmp[i] = x[i] + h * k3[i]
        for i in range(n):
            acc = c[i]
            for j in range(n):
                acc += m[i, j] * tmp[j]
            k4[i] = acc
        finite = True
        for i in range(n):
            x[i] = x[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            if not math.isfinite(x[i]):
                finite = False
        if not finite:
            return step
        if step % stride == 0 or step == n_steps:
            for i in range(n):
                out[row, i] = x[i]
            row += 1
    return -1


def rk4_affine_numpy(m, c, x0, dt, n_full, last_dt, stride, out):
    """Vectorized RK4 for ``x' = m @ x + c``; same contract as the numba kernel.

    Fills ``out`` with the decimated samples and returns the 1-based index of
    the first step that produced a non-finite state, or -1.
    """
    x = np.array(x0, dtype=float)
    n_steps = n_full + (1 if last_dt > 0.0 else 0)
    out[0] = x
    row = 1
    # overflow is reported through the return value
    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(1, n_steps + 1):
            h = dt if step <= n_full else last_dt
            k1 = m @ x + c
            k2 = m @ (x + 0.5 * h * k1) + c
            k3 = m @ (x + 0.5 * h * k2) + c
            k4 = m @ (x + h * k3) + c
            x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if not np.all(np.isfinite(x)):
                return step
            if step % stride == 0 or step == n_steps:
                out[row] = x
                row += 1
    return -1


rk4_affine_numba = njit(_rk4_affine_loops)


def rk4_affine(m, c, x0, dt, n_full, last_dt=0.0, stride=1, backend=None):
    """Integrate ``x' = m @ x + c`` with classical RK4.

    Takes ``n_full`` steps of size ``dt`` followed by one step of ``last_dt``
    when that is positive. Returns ``(samples, bad_step)``.
    """
    m = np.ascontiguousarray(m, dtype=np.float64)
    c = np.ascontiguousarray(c, dtype=np.float64)
    x0 = np.ascontiguousarray(x0, dtype=np.float64)
    n_steps = n_full + (1 if last_dt > 0.0 else 0)
    out = np.full((sample_count(n_steps, stride), x0.shape[0]), np.nan)
    backend = backend or BACKEND
    if backend == "numba" and HAS_NUMBA:
        bad = rk4_affine_numba(m, c, x0, float(dt), int(n_full), float(last_dt), int(stride), out)
    else:
        bad = rk4_affine_numpy(m, c, x0, float(dt), int(n_full), float(last_dt), int(stride), out)
    return out, int(bad)


def rk4_step(m, c, x, h):
    """One RK4 step; used by the adaptive driver, which is not hot."""
    k1 = m @ x + c
    k2 = m @ (x + 0.5 * h * k1) + c
    k3 = m @ (x + 0.5 * h * k2) + c
    k4 = m @ (x + h * k3) + c
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _solve_loops(a, b, x):
    # Gaussian elimination with partial pivoting; returns 0 on success, 1 if singular.
    n = b.shape[0]
    scale = 0.0
    for i in range(n):
        for j in range(n):
            if abs(a[i, j]) > scale:
                scale = abs(a[i, j])
    if scale == 0.0:
        return 1
    tol = PIVOT_RTOL * scale
    for k in range(n - 1):
        p = k
        best = abs(a[k, k])
        for i in range(k + 1, n):
            if abs(a[i, k]) > best:
                best = abs(a[i, k])
                p = i
        if best <= tol:
            return 1
        if p != k:
            for j in range(n):
                t = a[k, j]
                a[k, j] = a[p, j]
                a[p, j] = t
            t = b[k]
            b[k] = b[p]
            b[p] = t
        for i in range(k + 1, n):
            if a[i, k] != 0.0:
                f = a[i, k] / a[k, k]
                for j in range(k + 1, n):
                    a[i, j] -= f * a[k, j]
                a[i, k] = 0.0
                b[i] -= f * b[k]
    if abs(a[n - 1, n - 1]) <= tol:
        return 1
    for k in range(n - 1, -1, -1):
        acc = b[k]
        for j in range(k + 1, n):
            acc -= a[k, j] * x[j]
        x[k] = acc / a[k, k]
    return 0


def solve_numpy(a, b, x):
    """Vectorized partial-pivot elimination; same contract as the numba kernel."""
    n = b.shape[0]
    scale = np.abs(a).max()
    if scale == 0.0:
        return 1
    tol = PIVOT_RTOL * scale
    for k in range(n - 1):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        if abs(a[p, k]) <= tol:
            return 1
        if p != k:
            a[[k, p]] = a[[p, k]]
            b[[k, p]] = b[[p, k]]
        f = a[k + 1:, k] / a[k, k]
        a[k + 1:, k:] -= np.outer(f, a[k, k:])
        b[k + 1:] -= f * b[k]
    if abs(a[n - 1, n - 1]) <= tol:
        return 1
    for k in range(n - 1, -1, -1):
        x[k] = (b[k] - a[k, k + 1:] @ x[k + 1:]) / a[k, k]
    return 0


solve_numba = njit(_solve_loops)


def solve(a, b, backend=None):
    """Solve ``a @ x = b``. Returns ``x`` or ``None`` when ``a`` is singular."""
    a = np.array(a, dtype=np.float64, order="C")
    b = np.array(b, dtype=np.float64)
    x = np.zeros_like(b)
    backend = backend or BACKEND
    if backend == "numba" and HAS_NUMBA:
        status = solve_numba(a, b, x)
    else:
        status = solve_numpy(a, b, x)
    return None if status else x
