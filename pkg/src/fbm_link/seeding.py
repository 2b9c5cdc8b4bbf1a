"""Seed derivation for independent, reproducible sub-streams."""

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    """One SplitMix64 output step applied to ``x`` (Steele, Lea & Flood 2014)."""
    z = (x + GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, k: int) -> int:
    """64-bit seed for stream ``k`` of ``master``.

    ``derive_seed(m, k) = splitmix64(splitmix64(m mod 2**64) XOR (k mod 2**64))``.
    The same ``(master, k)`` always maps to the same value on every platform.
    """
    return splitmix64(splitmix64(master & MASK64) ^ (k & MASK64))
