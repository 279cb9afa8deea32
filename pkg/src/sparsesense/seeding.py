"""Deterministic 64-bit seed derivation for nested experiment loops."""

MASK64 = (1 << 64) - 1


def splitmix64(state: int) -> int:
    """One SplitMix64 finalizer step (avalanche-quality 64-bit mixer)."""
    z = (state + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, *indices: int) -> int:
    """Mix a master seed and loop indices into an independent 64-bit seed.

    Each index is folded through SplitMix64, so the derivation is sensitive
    to both the values and their order: (a, b) and (b, a) land on unrelated
    streams. Trials seeded this way are schedule-independent.
    """
    h = splitmix64(master & MASK64)
    for ix in indices:
        h = splitmix64(h ^ (ix & MASK64))
    return h
