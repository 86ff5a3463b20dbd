"""Counter-based pseudo-randomness.

Random walks must produce the same trajectory no matter which processor
(or transport) executes them, so all query-time randomness is derived
statelessly from (seed, counter) via the splitmix64 finalizer instead of
a stateful generator.
"""

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(state: int) -> int:
    """One splitmix64 output for the given 64-bit state."""
    z = (state + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def rand_u64(seed: int, counter: int) -> int:
    """The counter-th 64-bit value of the stream identified by seed."""
    return splitmix64((seed + counter * _GOLDEN) & _MASK64)


def rand_uniform(seed: int, counter: int) -> float:
    """Deterministic uniform float in [0, 1)."""
    return rand_u64(seed, counter) / 2.0**64


def rand_index(seed: int, counter: int, n: int) -> int:
    """Deterministic index in [0, n). Modulo bias is negligible for n << 2^64."""
    return rand_u64(seed, counter) % n


def derive_seed(seed: int, *tags: int) -> int:
    """Stable sub-seed for a component identified by integer tags."""
    out = seed & _MASK64
    for tag in tags:
        out = splitmix64((out ^ (tag & _MASK64)) & _MASK64)
    return out
