"""Counter-based random bits.

Every draw is a pure function of (key, counters...), so codebooks and trial
streams can be generated in any order or in parallel and still agree bit for
bit. Each counter word is mixed on its own with the SplitMix64 finalizer and then
folded into the running state with a second mix.
"""

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1
_LANE = tuple(
    np.uint64(v)
    for v in (0x243F6A8885A308D3, 0x13198A2E03707344, 0xA4093822299F31D0, 0x082EFA98EC4E6C89, 0x452821E638D01377)
)


def _mix(x):
    x = x + _GOLDEN
    x = (x ^ (x >> np.uint64(30))) * _M1
    x = (x ^ (x >> np.uint64(27))) * _M2
    return x ^ (x >> np.uint64(31))


def hash64(key, *counters):
    """Hash a key and any number of broadcastable integer counters to uint64."""
    with np.errstate(over="ignore"):
        h = _mix(np.asarray(np.uint64(int(key) & _MASK64)))
        for i, c in enumerate(counters):
            # avalanche each counter on its own before folding it in
            c = _mix(np.asarray(c, dtype=np.uint64) ^ _LANE[i % len(_LANE)])
            h = _mix(h ^ c)
    return h


def uniform(key, *counters):
    """Uniform floats in [0, 1) with 53 bits of resolution."""
    return (hash64(key, *counters) >> np.uint64(11)).astype(np.float64) * 2.0**-53


def bernoulli(p, key, *counters):
    return uniform(key, *counters) < p


def stream(seed, *labels):
    """A numpy Generator for a named sub-stream of a master seed.

    Labels may be ints or short strings; strings are folded to ints so that
    streams are stable across Python processes (no ``hash()`` salt).
    """
    words = [int(seed) & _MASK64]
    for lab in labels:
        if isinstance(lab, str):
            lab = int.from_bytes(lab.encode(), "little") & _MASK64
        words.append(int(lab) & _MASK64)
    return np.random.default_rng(np.random.SeedSequence(words))


def derive_seed(seed, *labels):
    """Derive a child integer seed, e.g. one per trial, from a master seed."""
    return int(stream(seed, *labels).integers(0, 2**63))
