"""Order-l trap functions and their concatenation into larger problems."""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from ._validation import ConfigError, DimensionError, check_bits

__all__ = [
    "ConcatTrapProblem",
    "TrapSpec",
    "concat_fitness",
    "deceptiveness_threshold",
    "is_deceptive",
    "trap_value",
]


@dataclass(frozen=True)
class TrapSpec:
    """Piecewise-linear trap on the unitation of an ``l``-bit block.

    ``a`` is the value of the deceptive optimum at unitation 0, ``b`` the
    value of the global optimum at unitation ``l`` and ``z`` the unitation
    where the slope changes sign.
    """

    l: int
    a: float
    b: float
    z: int

    def __post_init__(self):
        if self.l < 2:
            raise ConfigError(f"block length must be >= 2, got {self.l}")
        if not 1 <= self.z <= self.l - 1:
            raise ConfigError(f"z must lie in [1, l-1] = [1, {self.l - 1}], got {self.z}")
        if self.a <= 0 or self.b <= 0:
            raise ConfigError("a and b must both be positive")

    @classmethod
    def canonical(cls, l):
        """The family a = l-1, b = l, z = l-1."""
        return cls(l=l, a=float(l - 1), b=float(l), z=l - 1)

    @property
    def is_canonical(self):
        return self.a == self.l - 1 and self.b == self.l and self.z == self.l - 1

    @property
    def ratio(self):
        return self.a / self.b


def trap_value(u, spec):
    """Trap fitness of a block with ``u`` ones."""
    u_arr = np.asarray(u)
    if np.any(u_arr < 0) or np.any(u_arr > spec.l):
        raise ValueError(f"unitation must lie in [0, {spec.l}], got {u!r}")
    u_f = u_arr.astype(float)
    low = (spec.a / spec.z) * (spec.z - u_f)
    high = (spec.b / (spec.l - spec.z)) * (u_f - spec.z)
    out = np.where(u_arr <= spec.z, low, high)
    return float(out) if out.ndim == 0 else out


def deceptiveness_threshold(spec):
    """Smallest a/b ratio at which the trap is deceptive.

    Computed per block, with the block length in the numerator term
    ``2 - 1/(l - z)``.
    """
    return (2.0 - 1.0 / (spec.l - spec.z)) / (2.0 - 1.0 / spec.z)


def is_deceptive(spec):
    return spec.ratio >= deceptiveness_threshold(spec)


@dataclass(frozen=True)
class ConcatTrapProblem:
    """``m`` traps over consecutive, disjoint ``l``-bit blocks.

    Block ``i`` covers bits ``[i*l, (i+1)*l)``. Fitness is the sum of block
    trap values, so the maximum is ``m * b``.

    Parameters
    ----------
    spec : TrapSpec
    m : int
        Number of blocks.
    """

    spec: TrapSpec
    m: int
    _table: np.ndarray = field(init=False, repr=False, compare=False)
    _no_mask: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.m < 1:
            raise ConfigError(f"m must be >= 1, got {self.m}")
        table = trap_value(np.arange(self.spec.l + 1), self.spec)
        table.flags.writeable = False
        object.__setattr__(self, "_table", table)
        object.__setattr__(self, "_no_mask", np.zeros(self.length, dtype=np.uint8))

    @classmethod
    def canonical(cls, order, m=10):
        return cls(TrapSpec.canonical(order), m)

    @property
    def length(self):
        return self.m * self.spec.l

    @property
    def optimum(self):
        return self.m * self.spec.b

    def block_unitations(self, X):
        """Ones per block, shape ``(..., m)``. No validation; hot path."""
        return X.reshape(X.shape[:-1] + (self.m, self.spec.l)).sum(axis=-1)

    def fitness(self, X):
        """Fitness of one genome or of every row of a population."""
        X = check_bits(X)
        if X.shape[-1] != self.length:
            raise DimensionError(
                f"genome length {X.shape[-1]} does not match m*l = {self.length}"
            )
        out = self._fitness_unchecked(X)
        return float(out) if X.ndim == 1 else out

    def _fitness_unchecked(self, X, mask=None):
        """Fitness of ``X XOR mask``; no validation, hot path."""
        mask = self._no_mask if mask is None else mask
        if X.ndim == 1:
            return _kernels.trap_fitness(X[None, :], mask, self._table, self.spec.l)[0]
        return _kernels.trap_fitness(X, mask, self._table, self.spec.l)


def concat_fitness(x, problem):
    return problem.fitness(x)
