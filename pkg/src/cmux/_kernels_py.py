"""Pure-numpy implementations of the hot kernels.

Every function here has a bit-identical twin in ``_kernels.pyx``. The
compiled module is preferred at import time (see ``cmux._backend``); this
one is the fallback and the reference for the kernel tests.
"""

import numpy as np

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_STREAM = np.uint64(0xD1B54A32D192ED03)
_MASK = (1 << 64) - 1


def _splitmix(z):
    z = z + _GAMMA
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def hash_grid(seed, stream, rows, cols):
    """Counter-based 64-bit hashes keyed by (seed, stream, row, col).

    Returns a ``(rows, cols)`` uint64 array. Entry ``[i, j]`` depends only on
    its own key, never on the shape of the request.
    """
    with np.errstate(over="ignore"):
        key = np.uint64(seed & _MASK) ^ (np.uint64(stream & _MASK) * _STREAM)
        base = _splitmix(np.array([key], dtype=np.uint64))[0]
        r = _splitmix(base + np.arange(rows, dtype=np.uint64))
        return _splitmix(r[:, None] + np.arange(cols, dtype=np.uint64)[None, :])


def rademacher(seed, stream, rows, cols):
    """Fair +-1 signs as float64, one per (row, col) key."""
    h = hash_grid(seed, stream, rows, cols)
    return np.where((h >> np.uint64(63)) == 1, 1.0, -1.0)


def uniform01(seed, stream, rows, cols):
    """Uniform doubles in [0, 1) with 53 random bits, one per (row, col) key."""
    h = hash_grid(seed, stream, rows, cols)
    return (h >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


def modulate_sum(x, signs_t):
    """``y[n] = sum_m signs_t[m, n] * x[m, n]`` for complex ``x`` (M x N).

    Accumulates channel by channel, the same order as the compiled loop, so
    both backends round identically.
    """
    x = np.asarray(x, dtype=np.complex128)
    if x.shape != signs_t.shape:
        raise ValueError("shape mismatch between samples and signs")
    out = np.zeros(x.shape[1], dtype=np.complex128)
    for m in range(x.shape[0]):
        out += signs_t[m] * x[m]
    return out


def demodulate(y, signs_t):
    """``z[m, n] = signs_t[m, n] * y[n]``."""
    return signs_t * y[None, :]
