"""Jitted fixed-step integration loops.

The network is passed as an edge list: agent ``rows[e]`` listens to
``cols[e]`` with weight ``c0[e] + cs[e]*sin(tau) + cc[e]*cos(tau)`` where
``tau = t - tshift``. Damping uses the same per-agent trig form.

:func:`kernel` compiles one loop per flag combination ``(model, method,
varying, damped, pairs)``. ``pairs`` is set when every edge ``(i, j)``
stands for the symmetric pair, so each flow is computed once and applied
with both signs. Each variant is a copy of the plain functions below whose
globals carry the flags, so numba folds the branches away (about twice as
fast as runtime flags). Unlike closures, such copies can be cached on disk
under their own names, which avoids a multi-second compile per process.

On autonomous pieces (constant weights, no damping) a full-size step that
leaves ``z`` bitwise unchanged proves every later full-size step in the
piece does the same, so the loop jumps ahead and only writes the samples.
The output is identical to stepping through.
"""
import types
from functools import lru_cache

import numpy as np
from numba import njit

SINGLE = 0
DOUBLE = 1
EULER = 0
RK4 = 1

OK = 0
NONFINITE = 1

# placeholders, replaced per variant by kernel()
MODEL = SINGLE
METHOD = RK4
VARYING = DAMPED = PAIRS = False


def _rhs(t, z, rows, cols, c0, cs, cc, tshift, levels, d0, ds, dc, y, out):
    n = levels.shape[0]
    sn = np.sin(t - tshift) if VARYING or DAMPED else 0.0
    cn = np.cos(t - tshift) if VARYING or DAMPED else 0.0
    off = 0 if MODEL == SINGLE else n
    for i in range(n):
        v = z[off + i]
        s = levels[i]
        y[i] = s if v > s else (-s if v < -s else v)
    if MODEL == SINGLE:
        for i in range(n):
            out[i] = 0.0
        for e in range(rows.shape[0]):
            i = rows[e]
            j = cols[e]
            w = c0[e] + cs[e] * sn + cc[e] * cn if VARYING else c0[e]
            f = w * (y[j] - y[i])
            out[i] += f
            if PAIRS:
                out[j] -= f
        if DAMPED:
            for i in range(n):
                out[i] -= (d0[i] + ds[i] * sn + dc[i] * cn) * z[i]
    else:
        for i in range(n):
            out[i] = z[n + i]
            out[n + i] = 0.0
        for e in range(rows.shape[0]):
            i = rows[e]
            j = cols[e]
            w = c0[e] + cs[e] * sn + cc[e] * cn if VARYING else c0[e]
            f = w * ((z[j] - z[i]) + (y[j] - y[i]))
            out[n + i] += f
            if PAIRS:
                out[n + j] -= f


rhs = _rhs  # rebound to the jitted variant inside each kernel namespace


def _advance(z, t_start, t_stop, dt, rows, cols, c0, cs, cc, tshift, levels, d0, ds, dc,
            stride, step_count, out_t, out_z, n_rec):
    m = z.shape[0]
    k1 = np.empty(m)
    k2 = np.empty(m)
    k3 = np.empty(m)
    k4 = np.empty(m)
    tmp = np.empty(m)
    y = np.empty(levels.shape[0])
    n_steps = max(1, int(np.ceil((t_stop - t_start) / dt - 1e-9)))
    k = 0
    while k < n_steps:
        t = t_start + k * dt
        if k == n_steps - 1:
            h = t_stop - t
            t_next = t_stop
        else:
            h = dt
            t_next = t_start + (k + 1) * dt
        moved = False
        rhs(t, z, rows, cols, c0, cs, cc, tshift, levels, d0, ds, dc, y, k1)
        if METHOD == EULER:
            for i in range(m):
                new = z[i] + h * k1[i]
                moved = moved or new != z[i]
                z[i] = new
        else:
            for i in range(m):
                tmp[i] = z[i] + 0.5 * h * k1[i]
            rhs(t + 0.5 * h, tmp, rows, cols, c0, cs, cc, tshift, levels, d0, ds, dc, y, k2)
            for i in range(m):
                tmp[i] = z[i] + 0.5 * h * k2[i]
            rhs(t + 0.5 * h, tmp, rows, cols, c0, cs, cc, tshift, levels, d0, ds, dc, y, k3)
            for i in range(m):
                tmp[i] = z[i] + h * k3[i]
            rhs(t + h, tmp, rows, cols, c0, cs, cc, tshift, levels, d0, ds, dc, y, k4)
            for i in range(m):
                new = z[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
                moved = moved or new != z[i]
                z[i] = new
        # x * 0 is NaN exactly when x is NaN or infinite
        probe = 0.0
        for i in range(m):
            probe += z[i] * 0.0
        if probe != 0.0:
            return step_count, n_rec, NONFINITE, t_next
        step_count += 1
        if step_count % stride == 0:
            out_t[n_rec] = t_next
            for i in range(m):
                out_z[n_rec, i] = z[i]
            n_rec += 1
        k += 1
        skip = 0
        if not (VARYING or DAMPED) and not moved and k < n_steps - 1:
            # fixed point: replay steps k .. n_steps - 2 (all full-size)
            skip = n_steps - 1 - k
        if skip > 0:
            first = stride - step_count % stride
            for q in range(first, skip + 1, stride):
                out_t[n_rec] = t_start + (k + q) * dt
                for i in range(m):
                    out_z[n_rec, i] = z[i]
                n_rec += 1
            step_count += skip
            k += skip
    return step_count, n_rec, OK, t_stop


def _specialise(fn, name, namespace):
    copy = types.FunctionType(fn.__code__, namespace, name, fn.__defaults__)
    copy.__qualname__ = name
    return copy


@lru_cache(maxsize=None)
def kernel(model, method, varying, damped, pairs=False):
    """Return ``advance(z, t_start, t_stop, dt, rows, cols, c0, cs, cc, tshift,
    levels, d0, ds, dc, stride, step_count, out_t, out_z, n_rec)``.

    ``advance`` integrates ``z`` in place up to exactly ``t_stop`` (the last
    step is shortened) and records every ``stride``-th global step. It
    returns ``(step_count, n_rec, status, t_fail)``.
    """
    tag = f"{model}{method}{int(varying)}{int(damped)}{int(pairs)}"
    namespace = dict(globals(), MODEL=model, METHOD=method, VARYING=bool(varying),
                     DAMPED=bool(damped), PAIRS=bool(pairs))
    namespace["rhs"] = njit(inline="always", cache=True, error_model="numpy")(
        _specialise(_rhs, f"_rhs_{tag}", namespace))
    return njit(cache=True, error_model="numpy")(_specialise(_advance, f"_advance_{tag}", namespace))
