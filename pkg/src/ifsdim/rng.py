"""Deterministic seed derivation for parallel work units.

Child streams must depend only on (master seed, unit index) so results are
identical at any worker count.  The mix is splitmix64 applied to
master + (index+1) * golden-ratio increment, all mod 2^64.
"""

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(z: int) -> int:
    z &= MASK64
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & MASK64
    return (z ^ (z >> 31)) & MASK64


def mix_seed(master: int, index: int) -> int:
    """64-bit child seed for work unit `index` under `master`."""
    return splitmix64((master + (index + 1) * GOLDEN) & MASK64)
