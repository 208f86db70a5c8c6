# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled pixel kernels.

Twin of forgebench.kernels.pure: every function here must return output
bit-identical to its pure counterpart. Arithmetic is float64 with the
same operation order as the pure backend (build also disables FP
contraction), and rounding is floor(x + 0.5) / ceil(x - 0.5), i.e. half
away from zero.
"""

from libc.math cimport M_PI, ceil, cos, floor, log, sin, sqrt
from libc.stdint cimport int64_t, uint8_t, uint64_t

import numpy as np

cdef double TWO_PI = 2.0 * M_PI
cdef double U53_INV = 2.0 ** -53
cdef uint64_t GOLDEN_GAMMA = 0x9E3779B97F4A7C15U


cdef inline uint64_t _splitmix_next(uint64_t *state) nogil:
    cdef uint64_t z
    state[0] += GOLDEN_GAMMA
    z = state[0]
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9U
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBU
    return z ^ (z >> 31)


cdef inline uint64_t _rotl(uint64_t x, int k) nogil:
    return (x << k) | (x >> (64 - k))


cdef struct Xoshiro:
    uint64_t s0, s1, s2, s3


cdef inline void _xoshiro_seed(Xoshiro *rng, uint64_t seed) nogil:
    cdef uint64_t state = seed
    rng.s0 = _splitmix_next(&state)
    rng.s1 = _splitmix_next(&state)
    rng.s2 = _splitmix_next(&state)
    rng.s3 = _splitmix_next(&state)


cdef inline uint64_t _xoshiro_next(Xoshiro *rng) nogil:
    cdef uint64_t result = _rotl(rng.s0 + rng.s3, 23) + rng.s0
    cdef uint64_t t = rng.s1 << 17
    rng.s2 ^= rng.s0
    rng.s3 ^= rng.s1
    rng.s1 ^= rng.s2
    rng.s0 ^= rng.s3
    rng.s2 ^= t
    rng.s3 = _rotl(rng.s3, 45)
    return result


cdef inline double _uniform(Xoshiro *rng) nogil:
    # (0, 1]: log() below never sees zero.
    return <double>((_xoshiro_next(rng) >> 11) + 1) * U53_INV


cdef inline double _round_half_away(double x) nogil:
    if x >= 0.0:
        return floor(x + 0.5)
    return ceil(x - 0.5)


cdef inline uint8_t _clamp_u8(double x) nogil:
    if x < 0.0:
        return 0
    if x > 255.0:
        return 255
    return <uint8_t>x


def gaussian_noise_u8(const uint8_t[:, :, ::1] frame, double sigma, seed):
    """Additive Gaussian noise, xoshiro256++ stream from `seed`, Box-Muller."""
    cdef Py_ssize_t h = frame.shape[0]
    cdef Py_ssize_t w = frame.shape[1]
    cdef Py_ssize_t c = frame.shape[2]
    out = np.empty((h, w, c), dtype=np.uint8)
    cdef uint8_t[:, :, ::1] ov = out
    cdef Xoshiro rng
    _xoshiro_seed(&rng, <uint64_t>(<unsigned long long>seed))
    cdef Py_ssize_t y, x, ch
    cdef double u1, u2, r, z, cached = 0.0
    cdef bint have_cached = False
    with nogil:
        for y in range(h):
            for x in range(w):
                for ch in range(c):
                    if have_cached:
                        z = cached
                        have_cached = False
                    else:
                        u1 = _uniform(&rng)
                        u2 = _uniform(&rng)
                        r = sqrt(-2.0 * log(u1))
                        z = r * cos(TWO_PI * u2)
                        cached = r * sin(TWO_PI * u2)
                        have_cached = True
                    ov[y, x, ch] = _clamp_u8(
                        _round_half_away(<double>frame[y, x, ch] + sigma * z))
    return out


def grayscale_u8(const uint8_t[:, :, ::1] frame):
    """BT.601 luma, rounded half away from zero, replicated to all channels."""
    cdef Py_ssize_t h = frame.shape[0]
    cdef Py_ssize_t w = frame.shape[1]
    out = np.empty((h, w, 3), dtype=np.uint8)
    cdef uint8_t[:, :, ::1] ov = out
    cdef Py_ssize_t y, x
    cdef double luma
    cdef uint8_t g
    with nogil:
        for y in range(h):
            for x in range(w):
                luma = (0.299 * <double>frame[y, x, 0]
                        + 0.587 * <double>frame[y, x, 1]) \
                       + 0.114 * <double>frame[y, x, 2]
                g = _clamp_u8(_round_half_away(luma))
                ov[y, x, 0] = g
                ov[y, x, 1] = g
                ov[y, x, 2] = g
    return out


def sepia_u8(const uint8_t[:, :, ::1] frame):
    """Fixed sepia color matrix, rounded half away from zero, clamped."""
    cdef Py_ssize_t h = frame.shape[0]
    cdef Py_ssize_t w = frame.shape[1]
    out = np.empty((h, w, 3), dtype=np.uint8)
    cdef uint8_t[:, :, ::1] ov = out
    cdef Py_ssize_t y, x
    cdef double r, g, b
    with nogil:
        for y in range(h):
            for x in range(w):
                r = <double>frame[y, x, 0]
                g = <double>frame[y, x, 1]
                b = <double>frame[y, x, 2]
                ov[y, x, 0] = _clamp_u8(_round_half_away(
                    (0.393 * r + 0.769 * g) + 0.189 * b))
                ov[y, x, 1] = _clamp_u8(_round_half_away(
                    (0.349 * r + 0.686 * g) + 0.168 * b))
                ov[y, x, 2] = _clamp_u8(_round_half_away(
                    (0.272 * r + 0.534 * g) + 0.131 * b))
    return out


def box_downscale_u8(const uint8_t[:, :, ::1] frame, int factor):
    """Box-filter downscale; right/bottom remainder rows and columns dropped."""
    cdef Py_ssize_t h = frame.shape[0] // factor
    cdef Py_ssize_t w = frame.shape[1] // factor
    cdef Py_ssize_t c = frame.shape[2]
    out = np.empty((h, w, c), dtype=np.uint8)
    cdef uint8_t[:, :, ::1] ov = out
    cdef double block = <double>(factor * factor)
    cdef Py_ssize_t y, x, ch, dy, dx
    cdef long total
    with nogil:
        for y in range(h):
            for x in range(w):
                for ch in range(c):
                    total = 0
                    for dy in range(factor):
                        for dx in range(factor):
                            total += frame[y * factor + dy, x * factor + dx, ch]
                    ov[y, x, ch] = _clamp_u8(
                        _round_half_away(<double>total / block))
    return out


def laplacian_mean(const uint8_t[:, :, ::1] frame):
    """Mean |4L - left - right - up - down| over interior BT.601 luma.

    The luma weights are exact thousandths, so the whole reduction runs
    in int64 (luma in thousandths of a gray level) with one final
    division. Exact, hence permutation-invariant: mirrored frames give
    the identical value.
    """
    cdef Py_ssize_t h = frame.shape[0]
    cdef Py_ssize_t w = frame.shape[1]
    if h < 3 or w < 3:
        raise ValueError("frame must be at least 3x3")
    luma_arr = np.empty((h, w), dtype=np.int64)
    cdef int64_t[:, ::1] lv = luma_arr
    cdef Py_ssize_t y, x
    cdef int64_t v, total = 0
    with nogil:
        for y in range(h):
            for x in range(w):
                lv[y, x] = (299 * <int64_t>frame[y, x, 0]
                            + 587 * <int64_t>frame[y, x, 1]
                            + 114 * <int64_t>frame[y, x, 2])
        for y in range(1, h - 1):
            for x in range(1, w - 1):
                v = (4 * lv[y, x] - lv[y, x - 1] - lv[y, x + 1]
                     - lv[y - 1, x] - lv[y + 1, x])
                total += v if v >= 0 else -v
    return <double>total / (1000.0 * <double>((h - 2) * (w - 2)))
