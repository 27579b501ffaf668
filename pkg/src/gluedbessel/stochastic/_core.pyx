# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Euler-Maruyama stepper for the radial Bessel diffusion.

Mirrors ``_fallback.run_paths`` step for step; see that module for the
algorithm.  Path ``i`` draws its randoms from Philox4x32-10 with key
``seed`` and counter ``(step, path_lo, path_hi, 0)``.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport cos, exp, log, pow, sqrt, NAN
from libc.stdint cimport int8_t, int64_t, uint32_t, uint64_t

cnp.import_array()

cdef uint64_t M0 = 0xD2511F53, M1 = 0xCD9E8D57
cdef uint32_t W0 = 0x9E3779B9, W1 = 0xBB67AE85
cdef double TWO_PI = 6.283185307179586
cdef double INV_2_32 = 2.3283064365386963e-10

BACKEND = "cython"


cdef inline void _philox(uint32_t* c, uint32_t k0, uint32_t k1) noexcept nogil:
    cdef uint64_t p0, p1
    cdef uint32_t hi0, lo0, hi1, lo1
    cdef int i
    for i in range(10):
        if i > 0:
            k0 = <uint32_t>(k0 + W0)
            k1 = <uint32_t>(k1 + W1)
        p0 = M0 * c[0]
        p1 = M1 * c[2]
        hi0 = <uint32_t>(p0 >> 32)
        lo0 = <uint32_t>p0
        hi1 = <uint32_t>(p1 >> 32)
        lo1 = <uint32_t>p1
        c[0] = hi1 ^ c[1] ^ k0
        c[1] = lo1
        c[2] = hi0 ^ c[3] ^ k1
        c[3] = lo0


def philox4x32(uint32_t c0, uint32_t c1, uint32_t c2, uint32_t c3, uint32_t k0, uint32_t k1):
    """One Philox4x32-10 block (for known-answer tests)."""
    cdef uint32_t c[4]
    c[0] = c0; c[1] = c1; c[2] = c2; c[3] = c3
    _philox(c, k0, k1)
    return (c[0], c[1], c[2], c[3])


def run_paths(double d, double r0, int side0, int64_t n_paths, uint64_t path_offset, uint64_t seed,
              double dt_base, double dt_min, int boundary, double r_escape, double t_max,
              int64_t max_steps, double growth=0.0):
    """Simulate ``n_paths`` radial paths; boundary 0 reflect, 1 kill, 2 glue."""
    side_a = np.empty(n_paths, dtype=np.int8)
    r_a = np.empty(n_paths, dtype=np.float64)
    t_a = np.empty(n_paths, dtype=np.float64)
    status_a = np.empty(n_paths, dtype=np.int8)
    hit_a = np.empty(n_paths, dtype=np.float64)
    nh_a = np.empty(n_paths, dtype=np.int64)
    np_a = np.empty(n_paths, dtype=np.int64)
    steps_a = np.empty(n_paths, dtype=np.int64)
    cdef int8_t[:] side_v = side_a
    cdef double[:] r_v = r_a, t_v = t_a, hit_v = hit_a
    cdef int8_t[:] status_v = status_a
    cdef int64_t[:] nh_v = nh_a, np_v = np_a, steps_v = steps_a

    cdef uint32_t k0 = <uint32_t>seed, k1 = <uint32_t>(seed >> 32)
    cdef uint32_t c[4]
    cdef uint64_t pid
    cdef int64_t i, k, hits, plus
    cdef int side, status
    cdef double r, t, dt, near, z, r1, frac, first, y, y1, sig2
    cdef double pinv = -1.0 / (d - 2.0), q = 2.0 - d, c2 = 2.0 * (d - 2.0) * (d - 2.0)
    cdef double u1, u2, u3, u4
    cdef bint crossed

    with nogil:
        for i in range(n_paths):
            pid = path_offset + <uint64_t>i
            r = r0
            y = exp(q * log(r))
            side = side0
            t = 0.0
            k = 0
            hits = 0
            plus = 0
            first = NAN
            status = 0
            while True:
                if t >= t_max:
                    status = 0
                    break
                if r >= r_escape:
                    status = 1
                    break
                if k >= max_steps:
                    status = 3
                    break
                dt = dt_base * r * r
                if growth == 0.5:
                    dt *= sqrt(r)
                elif growth != 0.0:
                    dt *= pow(r, growth)
                near = 0.25 * (r - 1.0) * (r - 1.0)
                if near < dt:
                    dt = near
                if dt < dt_min:
                    dt = dt_min
                if t + dt > t_max:
                    dt = t_max - t
                c[0] = <uint32_t>k
                c[1] = <uint32_t>pid
                c[2] = <uint32_t>(pid >> 32)
                c[3] = 0
                _philox(c, k0, k1)
                u1 = (c[0] + 0.5) * INV_2_32
                u2 = (c[1] + 0.5) * INV_2_32
                u3 = (c[2] + 0.5) * INV_2_32
                u4 = (c[3] + 0.5) * INV_2_32
                z = sqrt(-2.0 * log(u1)) * cos(TWO_PI * u2)
                # Euler-Maruyama for the natural scale y = r^(2-d) (driftless)
                sig2 = c2 * (y * y) / (r * r)
                y1 = y + sqrt(sig2 * dt) * z
                if y1 <= 0.0:
                    y1 = -y1
                r1 = exp(pinv * log(y1))
                crossed = False
                frac = 0.0
                if y1 >= 1.0:
                    crossed = True
                    frac = (1.0 - y) / (y1 - y) if y1 > y else 0.0
                    r1 = 2.0 - r1
                    y1 = exp(q * log(r1))
                else:
                    # bridge excursion; exp(-50) is below the smallest uniform
                    z = 2.0 * (1.0 - y) * (1.0 - y1) / (sig2 * dt)
                    if z < 50.0 and u3 < exp(-z):
                        crossed = True
                        frac = (1.0 - y) / ((1.0 - y) + (1.0 - y1))
                k += 1
                if crossed:
                    if first != first:
                        first = t + frac * dt
                    hits += 1
                    if boundary == 1:
                        r = 1.0
                        t = t + frac * dt
                        status = 2
                        break
                    if boundary == 2:
                        if u4 < 0.5:
                            side = 1
                            plus += 1
                        else:
                            side = -1
                r = r1
                y = y1
                t = t + dt
            side_v[i] = side
            r_v[i] = r
            t_v[i] = t
            status_v[i] = status
            hit_v[i] = first
            nh_v[i] = hits
            np_v[i] = plus
            steps_v[i] = k
    return {"side": side_a, "r": r_a, "t": t_a, "status": status_a, "first_hit": hit_a,
            "n_hits": nh_a, "n_plus": np_a, "steps": steps_a}
