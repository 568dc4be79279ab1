"""Input validation helpers shared by the estimators and the harness."""

import numbers

import numpy as np


class DimensionError(ValueError):
    """Raised when two genomes or a genome and a problem disagree on length."""


class ConfigError(ValueError):
    """Raised for invalid algorithm or experiment configuration."""


def check_bits(x, ndim=None):
    """Coerce ``x`` to a uint8 array of zeros and ones.

    Parameters
    ----------
    x : array-like
        Bits, one genome per row when two-dimensional.
    ndim : {1, 2}, optional
        Required dimensionality.
    """
    arr = np.asarray(x)
    if arr.dtype != np.uint8:
        if arr.dtype == bool or np.issubdtype(arr.dtype, np.integer):
            if arr.size and (arr.min() < 0 or arr.max() > 1):
                raise ValueError("bitstrings may only contain 0 and 1")
            arr = arr.astype(np.uint8)
        else:
            raise TypeError(f"expected integer or bool bits, got dtype {arr.dtype}")
    elif arr.size and arr.max() > 1:
        raise ValueError("bitstrings may only contain 0 and 1")
    if arr.ndim == 0:
        raise DimensionError("a bitstring needs at least one position")
    if ndim is not None and arr.ndim != ndim:
        raise DimensionError(f"expected {ndim}-d bits, got shape {arr.shape}")
    if arr.shape[-1] == 0:
        raise DimensionError("a bitstring needs at least one position")
    return arr


def check_rng(random_state):
    """Turn ``None``, a seed or a Generator into a ``numpy.random.Generator``.

    Seeds go through ``numpy.random.default_rng`` (PCG64).
    """
    if isinstance(random_state, np.random.Generator):
        return random_state
    if random_state is None or isinstance(random_state, (numbers.Integral, np.integer)):
        return np.random.default_rng(random_state)
    if isinstance(random_state, (list, tuple)):
        return np.random.default_rng(list(random_state))
    raise TypeError(f"cannot build a random generator from {random_state!r}")


def derive_rng(seed, label):
    """Independent stream for ``seed`` tagged with a fixed integer ``label``."""
    return np.random.default_rng([int(seed), int(label)])


def check_probability(value, name):
    if not isinstance(value, numbers.Real) or not 0.0 <= value <= 1.0:
        raise ConfigError(f"{name} must be a probability in [0, 1], got {value!r}")
    return float(value)


def check_positive_int(value, name, minimum=1):
    if not isinstance(value, (numbers.Integral, np.integer)) or isinstance(value, bool):
        raise ConfigError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(f"{name} must be >= {minimum}, got {value}")
    return int(value)
