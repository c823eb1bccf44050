"""Pure numpy implementation of the sampling kernel.

Mirrors ``_ckernel.pyx`` draw-for-draw; only the floating point reduction
order of the block statistics differs.
"""

import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

_U64_GAMMA = np.uint64(GAMMA)
_U64_M1 = np.uint64(_M1)
_U64_M2 = np.uint64(_M2)
_S30, _S27, _S31, _S11 = (np.uint64(s) for s in (30, 27, 31, 11))
_ONE = np.uint64(1)

# draws materialised per chunk
_CHUNK_DRAWS = 1 << 22


def mix64(z: int) -> int:
    """splitmix64 finaliser on a Python int."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def uniform(key: int, index: np.ndarray) -> np.ndarray:
    """Counter-based uniform draws on (-0.5, 0.5) for uint64 ``index``."""
    with np.errstate(over="ignore"):
        z = np.uint64(key) + (index + _ONE) * _U64_GAMMA
        z = (z ^ (z >> _S30)) * _U64_M1
        z = (z ^ (z >> _S27)) * _U64_M2
        z ^= z >> _S31
    return ((z >> _S11).astype(np.float64) + 0.5) * 2.0**-53 - 0.5


def draws(key: int, t0: int, count: int, n: int, m: int) -> np.ndarray:
    """Draw tapes for samples ``t0 .. t0+count-1`` as an array ``(count, m, n, 2)``."""
    width = 2 * n * m
    index = np.arange(t0 * width, (t0 + count) * width, dtype=np.uint64)
    return uniform(key, index).reshape(count, m, n, 2)


def _values(tau_d, sig_d, code, allow):
    count, m, n, _ = tau_d.shape
    pos, neg = tau_d[..., 0], tau_d[..., 1]
    tau = np.ones(count)
    for i in range(n):
        p = pos[:, :, i].prod(axis=1) if allow[i, 0] else 0.0
        q = neg[:, :, i].prod(axis=1) if allow[i, 1] else 0.0
        tau *= p + q

    a, b = sig_d[..., 0], sig_d[..., 1]
    s = a + b
    sigma = np.ones(count)
    for j in range(m):
        hyper = s[:, j, :].prod(axis=1)
        falsify = np.ones(count)
        for i in range(n):
            c = code[j, i]
            if c == 0:
                falsify *= s[:, j, i]
            elif c == 1:
                falsify *= b[:, j, i]
            elif c == 2:
                falsify *= a[:, j, i]
            else:
                falsify[:] = 0.0
        sigma *= hyper - falsify
    return tau * sigma


def block_values(key, sigma_key, decouple, t0, count, code, allow):
    """Per-sample S values for samples ``t0 .. t0+count-1``."""
    m, n = code.shape
    step = max(1, _CHUNK_DRAWS // max(1, 2 * n * m))
    out = np.empty(count)
    for start in range(0, count, step):
        k = min(step, count - start)
        tau_d = draws(key, t0 + start, k, n, m)
        sig_d = draws(sigma_key, t0 + start, k, n, m) if decouple else tau_d
        out[start : start + k] = _values(tau_d, sig_d, code, allow)
    return out


def block_stats(key, sigma_key, decouple, t0, count, code, allow):
    """``(count, mean, m2)`` over one block of samples."""
    if count == 0:
        return 0, 0.0, 0.0
    return reduce_block(block_values(key, sigma_key, decouple, t0, count, code, allow))


def reduce_block(v):
    """``(count, mean, m2)`` of a value array; shared by both kernels."""
    mean = float(v.mean())
    return len(v), mean, float(((v - mean) ** 2).sum())
