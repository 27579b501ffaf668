"""Pure-numpy Euler-Maruyama stepper, vectorized across paths.

One step from radius ``r`` (``r = |x|``, junction at ``r = 1``):

* ``dt = max(dt_min, min(dt_base r^(2 + growth), (r - 1)^2 / 4))``, cut to land
  on ``t_max``;
* Euler-Maruyama in the natural scale ``y = r^(2-d)``, which solves the
  driftless ``dy = sqrt(2) (d - 2) r^(1-d) dW``: ``y' = y + sigma sqrt(dt) z``
  with ``sigma^2 = 2 (d - 2)^2 r^(2-2d)``, mapped back to ``r'``.  Each step
  preserves ``E[y]``, so exit probabilities carry no drift bias;
* a crossing of ``r = 1`` (``y = 1``) is either an endpoint beyond it
  (``r'`` reflected to ``2 - r'``) or a Brownian-bridge excursion, accepted
  with probability ``exp(-2 (1 - y)(1 - y') / (sigma^2 dt))``;
* on a crossing: ``kill`` stops the path at the interpolated crossing time,
  ``glue`` draws a fresh side with probability 1/2 each, ``reflect`` does
  nothing more.

Path ``i`` draws step ``k`` from one Philox4x32-10 block with key ``seed``
and counter ``(k, i_lo, i_hi, 0)``: two uniforms feed a Box-Muller normal,
one the bridge test, one the side choice.  Paths are therefore independent
of chunking and of the backend.
"""
from __future__ import annotations

import numpy as np

BACKEND = "numpy"

_MASK = np.uint64(0xFFFFFFFF)
_M0, _M1 = np.uint64(0xD2511F53), np.uint64(0xCD9E8D57)
_W0, _W1 = 0x9E3779B9, 0xBB67AE85
_INV_2_32 = 2.0**-32


def philox4x32_block(c0, c1, c2, c3, k0, k1):
    """Philox4x32-10 on arrays of 32-bit words (held in uint64)."""
    c0, c1, c2, c3 = (np.asarray(c, dtype=np.uint64) for c in (c0, c1, c2, c3))
    k0, k1 = int(k0), int(k1)
    for i in range(10):
        if i > 0:
            k0 = (k0 + _W0) & 0xFFFFFFFF
            k1 = (k1 + _W1) & 0xFFFFFFFF
        p0 = _M0 * c0
        p1 = _M1 * c2
        c0, c1, c2, c3 = (p1 >> np.uint64(32)) ^ c1 ^ np.uint64(k0), p1 & _MASK, \
            (p0 >> np.uint64(32)) ^ c3 ^ np.uint64(k1), p0 & _MASK
    return c0, c1, c2, c3


def philox4x32(c0, c1, c2, c3, k0, k1):
    """One Philox4x32-10 block (for known-answer tests)."""
    return tuple(int(v) for v in philox4x32_block(c0, c1, c2, c3, k0, k1))


def run_paths(d, r0, side0, n_paths, path_offset, seed, dt_base, dt_min, boundary, r_escape, t_max,
              max_steps, growth=0.0):
    """Simulate ``n_paths`` radial paths; boundary 0 reflect, 1 kill, 2 glue."""
    n = int(n_paths)
    seed = int(seed)
    k0, k1 = seed & 0xFFFFFFFF, (seed >> 32) & 0xFFFFFFFF
    pid = np.uint64(path_offset) + np.arange(n, dtype=np.uint64)
    c1, c2 = pid & _MASK, pid >> np.uint64(32)
    c3 = np.zeros(n, dtype=np.uint64)
    side = np.full(n, side0, dtype=np.int8)
    r = np.full(n, float(r0))
    y = np.full(n, np.exp((2.0 - float(d)) * np.log(float(r0))))
    t = np.zeros(n)
    status = np.zeros(n, dtype=np.int8)
    first = np.full(n, np.nan)
    hits = np.zeros(n, dtype=np.int64)
    plus = np.zeros(n, dtype=np.int64)
    steps = np.zeros(n, dtype=np.int64)
    d = float(d)
    pinv = -1.0 / (d - 2.0)
    scale2 = 2.0 * (d - 2.0) ** 2
    active = np.arange(n)
    k = 0
    while active.size:
        ra, ta = r[active], t[active]
        done_t = ta >= t_max
        done_r = ~done_t & (ra >= r_escape)
        done_k = ~(done_t | done_r) & (k >= max_steps)
        status[active[done_r]] = 1
        status[active[done_k]] = 3
        keep = ~(done_t | done_r | done_k)
        active, ra, ta = active[keep], ra[keep], ta[keep]
        if not active.size:
            break
        base = dt_base * ra * ra
        if growth == 0.5:
            base = base * np.sqrt(ra)
        elif growth != 0.0:
            base = base * ra**growth
        dt = np.maximum(np.minimum(base, 0.25 * (ra - 1.0) ** 2), dt_min)
        dt = np.where(ta + dt > t_max, t_max - ta, dt)
        kk = np.full(active.size, k, dtype=np.uint64)
        w0, w1, w2, w3 = philox4x32_block(kk, c1[active], c2[active], c3[active], k0, k1)
        u1, u2, u3, u4 = ((w.astype(np.float64) + 0.5) * _INV_2_32 for w in (w0, w1, w2, w3))
        z = np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)
        ya = y[active]
        sig2 = scale2 * (ya * ya) / (ra * ra)
        y1 = np.abs(ya + np.sqrt(sig2 * dt) * z)
        r1 = np.exp(pinv * np.log(y1))
        below = y1 >= 1.0
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            bridge = ~below & (u3 < np.exp(-2.0 * (1.0 - ya) * (1.0 - y1) / (sig2 * dt)))
            frac = np.where(below, np.where(y1 > ya, (1.0 - ya) / (y1 - ya), 0.0),
                            np.where(bridge, (1.0 - ya) / ((1.0 - ya) + (1.0 - y1)), 0.0))
        r1 = np.where(below, 2.0 - r1, r1)
        y1 = np.where(below, np.exp((2.0 - d) * np.log(r1)), y1)
        crossed = below | bridge
        k += 1
        steps[active] = k
        ci = active[crossed]
        fresh = ci[np.isnan(first[ci])]
        first[fresh] = (ta + frac * dt)[crossed][np.isnan(first[ci])]
        hits[ci] += 1
        if boundary == 1:
            r[active] = np.where(crossed, 1.0, r1)
            y[active] = np.where(crossed, 1.0, y1)
            t[active] = np.where(crossed, ta + frac * dt, ta + dt)
            status[ci] = 2
            active = active[~crossed]
            continue
        if boundary == 2:
            up = u4[crossed] < 0.5
            side[ci] = np.where(up, 1, -1)
            plus[ci] += up
        r[active] = r1
        y[active] = y1
        t[active] = ta + dt
    return {"side": side, "r": r, "t": t, "status": status, "first_hit": first, "n_hits": hits,
            "n_plus": plus, "steps": steps}
