"""Counter-based random streams for the binning simulator.

Every random quantity is a pure function of (seed, trial, stream, counter),
so trials are reproducible bit-for-bit, parallelizable by trial range, and
individual codeword symbols can be re-derived lazily in any order.  Both
the compiled kernel and the pure-Python fallback implement exactly this
contract; cross-backend equality is tested.

Stream ids: 0 = source sequence, 1 = encoder tie-breaking,
``CODEWORD_STREAM_BASE + l`` = codeword ``l``.

The mixer is the splitmix64 finalizer; uniforms take the top 53 bits.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1

C_SEED = 0x9E3779B97F4A7C15
C_SEED_ADD = 0x243F6A8885A308D3
C_TRIAL = 0xD1342543DE82EF95
C_STREAM = 0x94D049BB133111EB
C_COUNTER = 0xBF58476D1CE4E5B9

STREAM_SOURCE = 0
STREAM_TIEBREAK = 1
CODEWORD_STREAM_BASE = 16

_INV_2_53 = 1.0 / (1 << 53)


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def seed_base(seed: int) -> int:
    return mix64((seed * C_SEED + C_SEED_ADD) & MASK64)


def trial_base(sbase: int, trial: int) -> int:
    return mix64(sbase ^ ((trial * C_TRIAL) & MASK64))


def stream_base(tbase: int, stream: int) -> int:
    return mix64((tbase + stream * C_STREAM) & MASK64)


def raw(cbase: int, counter: int) -> int:
    return mix64((cbase + counter * C_COUNTER) & MASK64)


def uniform(cbase: int, counter: int) -> float:
    """Uniform double in [0, 1) from the top 53 bits."""
    return (raw(cbase, counter) >> 11) * _INV_2_53


def draw_symbol(cdf, cbase: int, counter: int) -> int:
    """Inverse-CDF draw: first index whose cumulative mass exceeds u."""
    u = uniform(cbase, counter)
    for i, c in enumerate(cdf):
        if u < c:
            return i
    return len(cdf) - 1


# vectorized variants (uint64 arithmetic wraps modulo 2^64, matching the
# scalar contract exactly)


def mix64_np(z: np.ndarray) -> np.ndarray:
    z = z.astype(np.uint64, copy=True)
    z ^= z >> np.uint64(30)
    z *= np.uint64(0xBF58476D1CE4E5B9)
    z ^= z >> np.uint64(27)
    z *= np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def stream_base_np(tbase: int, streams: np.ndarray) -> np.ndarray:
    return mix64_np(np.uint64(tbase) + streams.astype(np.uint64) * np.uint64(C_STREAM))


def uniform_np(cbases: np.ndarray, counter: int) -> np.ndarray:
    vals = mix64_np(cbases + np.uint64((counter * C_COUNTER) & MASK64))
    return (vals >> np.uint64(11)).astype(np.float64) * _INV_2_53
