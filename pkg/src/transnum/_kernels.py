"""Hot numeric kernels: orbit accumulation and grid sups.

Every kernel is written as a plain scalar loop so the same source runs two
ways: compiled with numba.njit (default when numba is importable) or as
ordinary Python. Set TRANSNUM_NO_NUMBA=1 to force the interpreted path; the
higher-level modules then prefer vectorized numpy where the computation
allows it (grids) and fall back to these loops where it does not (orbits,
which are inherently sequential).

Built-in map families are encoded as (code, params) pairs so the kernels
stay monomorphic:

  code 0  rigid translation        params = v[0..n)
  code 1  integer affine           params = M row-major (n*n), then v (n)
  code 2  circle + sine nudge      params = (omega, k)
  code 3  sine shear of T^2        params = (eps,)
  code 4  skew translation of T^2  params = (omega, d, c0, a1, b1, ..., ad, bd)

For code 4 the second coordinate advances by the trigonometric polynomial
c(x) = c0 + sum_k (a_k cos 2*pi*k*x + b_k sin 2*pi*k*x).
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised via env flag instead
    numba = None
    _HAVE_NUMBA = False

JIT_ENABLED = _HAVE_NUMBA and os.environ.get("TRANSNUM_NO_NUMBA", "") not in (
    "1",
    "true",
    "yes",
)


def _maybe_jit(fn):
    if JIT_ENABLED:
        return numba.njit(cache=True)(fn)
    return fn


RIGID = 0
AFFINE = 1
CIRCLE_SINE = 2
SINE_SHEAR = 3
SKEW = 4

TWO_PI = 2.0 * np.pi


def _eval_step_impl(code, params, x, y):
    """Write the lifted image of x (cover coordinates) into y."""
    n = x.shape[0]
    if code == 0:
        for j in range(n):
            y[j] = x[j] + params[j]
    elif code == 1:
        for i in range(n):
            s = 0.0
            for j in range(n):
                s += params[i * n + j] * x[j]
            y[i] = s + params[n * n + i]
    elif code == 2:
        y[0] = x[0] + params[0] + params[1] * np.sin(TWO_PI * x[0]) / TWO_PI
    elif code == 3:
        y[0] = x[0] + params[0] * np.sin(TWO_PI * x[1])
        y[1] = x[1]
    else:
        y[0] = x[0] + params[0]
        d = int(params[1])
        c = params[2]
        for k in range(1, d + 1):
            ang = TWO_PI * k * x[0]
            c += params[1 + 2 * k] * np.cos(ang) + params[2 + 2 * k] * np.sin(ang)
        y[1] = x[1] + c


def _orbit_chunk_impl(code, params, avec, shift, x, x0, start_index, count, s0, return_tol, found_return):
    """Advance the base orbit `count` steps, accumulating fiber displacement.

    x is the current reduced base point (mutated in place), s0 the running
    displacement sum. Per-step increment is <a, g(x)-x> + shift. Tracks the
    first index q (1-based, global) with sup-metric torus distance from x0
    at most return_tol; -1 while none found. Returns (sums, s, first_return)
    where sums[i] is the running total after global step start_index+i+1.
    """
    n = x.shape[0]
    sums = np.empty(count)
    y = np.empty(n)
    s = s0
    first_return = found_return
    for i in range(count):
        _eval_step(code, params, x, y)
        acc = shift
        for j in range(n):
            acc += avec[j] * (y[j] - x[j])
        s += acc
        sums[i] = s
        for j in range(n):
            x[j] = y[j] % 1.0
            if x[j] >= 1.0:  # -tiny % 1.0 rounds to 1.0
                x[j] = 0.0
        if first_return < 0:
            d = 0.0
            for j in range(n):
                dj = abs(x[j] - x0[j])
                if dj > 0.5:
                    dj = 1.0 - dj
                if dj > d:
                    d = dj
            if d <= return_tol:
                first_return = start_index + i + 1
    return sums, s, first_return


def _grid_sup_abs_rho_impl(code, params, avec, shift, m, n):
    """max |<a, g(x)-x> + shift| over the corner grid (i_1/m, ..., i_n/m)."""
    x = np.empty(n)
    y = np.empty(n)
    best = 0.0
    total = 1
    for _ in range(n):
        total *= m
    for flat in range(total):
        r = flat
        for j in range(n):
            x[j] = (r % m) / m
            r //= m
        _eval_step(code, params, x, y)
        acc = shift
        for j in range(n):
            acc += avec[j] * (y[j] - x[j])
        if acc < 0.0:
            acc = -acc
        if acc > best:
            best = acc
    return best


_eval_step = _maybe_jit(_eval_step_impl)
_orbit_chunk = _maybe_jit(_orbit_chunk_impl)
_grid_sup_abs_rho = _maybe_jit(_grid_sup_abs_rho_impl)

# Interpreted twins, kept importable regardless of the env flag so the
# benchmark (and the equivalence tests) can compare both paths in-process.
_eval_step_py = _eval_step_impl
_orbit_chunk_py = _orbit_chunk_impl
_grid_sup_abs_rho_py = _grid_sup_abs_rho_impl


def orbit_chunk(code, params, avec, shift, x, x0, start_index, count, s0, return_tol, found_return):
    return _orbit_chunk(
        code, params, avec, shift, x, x0, start_index, count, s0, return_tol, found_return
    )


def grid_sup_abs_rho(code, params, avec, shift, m, n):
    return _grid_sup_abs_rho(code, params, avec, shift, m, n)


def warmup():
    """Compile the kernels on a tiny input (no-op on the interpreted path)."""
    params = np.array([0.5])
    avec = np.array([1.0])
    x = np.array([0.0])
    orbit_chunk(RIGID, params, avec, 0.0, x, np.array([0.0]), 0, 2, 0.0, 1e-10, -1)
    grid_sup_abs_rho(RIGID, params, avec, 0.0, 4, 1)
