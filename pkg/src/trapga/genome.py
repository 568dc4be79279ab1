"""Fixed-length binary genomes.

A bitstring is a one-dimensional ``numpy.uint8`` array holding only 0 and 1.
A population is the two-dimensional stack of such arrays, one genome per row.
All primitives accept either shape and operate along the last axis.
"""

import numpy as np

from ._validation import DimensionError, check_bits, check_rng

__all__ = [
    "as_bitstring",
    "complement",
    "from_string",
    "hamming",
    "random_bitstring",
    "random_population",
    "to_string",
    "unitation",
    "xor",
    "zeros",
]


def as_bitstring(bits):
    """Return ``bits`` as a read-only uint8 array of zeros and ones.

    Accepts any array-like of 0/1 values or a ``"0101"`` string.
    """
    if isinstance(bits, str):
        return from_string(bits)
    out = check_bits(bits, ndim=1).copy()
    out.flags.writeable = False
    return out


def zeros(length):
    if length < 1:
        raise ValueError(f"length must be >= 1, got {length}")
    return np.zeros(length, dtype=np.uint8)


def complement(x):
    return (1 - check_bits(x)).astype(np.uint8)


def unitation(x):
    """Number of ones along the last axis."""
    x = check_bits(x)
    counts = x.sum(axis=-1, dtype=np.int64)
    return int(counts) if x.ndim == 1 else counts


def _check_same_length(a, b):
    if a.shape[-1] != b.shape[-1]:
        raise DimensionError(
            f"bitstring lengths differ: {a.shape[-1]} != {b.shape[-1]}"
        )


def xor(a, b):
    a = check_bits(a)
    b = check_bits(b)
    _check_same_length(a, b)
    return np.bitwise_xor(a, b)


def hamming(a, b):
    """Number of differing positions; broadcasts across population rows."""
    a = check_bits(a)
    b = check_bits(b)
    _check_same_length(a, b)
    d = np.count_nonzero(a != b, axis=-1)
    return int(d) if np.ndim(d) == 0 else d


def random_bitstring(length, rng=None):
    """Draw ``length`` fair bits from ``rng``.

    Bits come from ``rng.integers(0, 2, size=length)``, so a seeded
    ``numpy.random.Generator`` reproduces the same genome.
    """
    if length < 1:
        raise ValueError(f"length must be >= 1, got {length}")
    rng = check_rng(rng)
    return rng.integers(0, 2, size=length, dtype=np.uint8)


def random_population(size, length, rng=None):
    if length < 1 or size < 1:
        raise ValueError(f"need size >= 1 and length >= 1, got ({size}, {length})")
    rng = check_rng(rng)
    return rng.integers(0, 2, size=(size, length), dtype=np.uint8)


def to_string(x):
    """Render as a 0/1 string, position 0 first."""
    x = check_bits(x, ndim=1)
    return "".join("1" if b else "0" for b in x)


def from_string(s):
    s = s.strip()
    if not s or set(s) - {"0", "1"}:
        raise ValueError(f"not a 0/1 string: {s!r}")
    out = np.frombuffer(s.encode("ascii"), dtype=np.uint8) - ord("0")
    out = out.astype(np.uint8)
    out.flags.writeable = False
    return out
