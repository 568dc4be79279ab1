"""XOR-mask dynamic environments over a static problem.

Every genome is evaluated as ``f(x XOR M(k))``. The mask starts at all
zeros and, at each change, is XORed with a template holding exactly
``flip_count`` ones at distinct random positions. Changes are scheduled on
the evaluation clock: one every ``epsilon`` evaluations, checked at
generation boundaries, and the algorithm is never told about them.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._validation import (
    ConfigError,
    DimensionError,
    check_bits,
    check_positive_int,
    check_rng,
)
from .genome import to_string

__all__ = [
    "DynamicEnvironment",
    "DynamicsSpec",
    "MaskState",
    "StaticEnvironment",
    "advance",
    "evaluate",
    "flip_count",
    "initial_mask",
    "maybe_change",
]


def flip_count(rho, length):
    """Ones per change template: ``rho * length`` rounded half up."""
    return int(math.floor(rho * length + 0.5 + 1e-9))


@dataclass(frozen=True)
class DynamicsSpec:
    rho: float
    epsilon: int
    periods: int = 10

    def __post_init__(self):
        if not 0.0 <= self.rho <= 1.0:
            raise ConfigError(f"rho must lie in [0, 1], got {self.rho}")
        check_positive_int(self.epsilon, "epsilon")
        check_positive_int(self.periods, "periods")

    @property
    def budget(self):
        return self.epsilon * self.periods


@dataclass(frozen=True)
class MaskState:
    mask: np.ndarray
    k: int
    flip_count: int

    @property
    def length(self):
        return self.mask.shape[0]


def initial_mask(length, rho=0.0):
    if length < 1:
        raise ValueError(f"length must be >= 1, got {length}")
    mask = np.zeros(length, dtype=np.uint8)
    mask.flags.writeable = False
    return MaskState(mask=mask, k=0, flip_count=flip_count(rho, length))


def advance(state, rng):
    """Next period's mask: XOR with ``flip_count`` distinct random flips.

    Positions come from ``rng.choice(L, flip_count, replace=False)``.
    """
    rng = check_rng(rng)
    template = np.zeros(state.length, dtype=np.uint8)
    if state.flip_count:
        template[rng.choice(state.length, size=state.flip_count, replace=False)] = 1
    mask = np.bitwise_xor(state.mask, template)
    mask.flags.writeable = False
    return MaskState(mask=mask, k=state.k + 1, flip_count=state.flip_count)


def evaluate(x, state, problem):
    """Fitness of ``x`` under the current mask (uncounted)."""
    x = check_bits(x)
    if x.shape[-1] != state.length:
        raise DimensionError(f"genome length {x.shape[-1]} != mask length {state.length}")
    return problem.fitness(np.bitwise_xor(x, state.mask))


def maybe_change(state, eval_counter, spec, rng):
    """Advance once for every multiple of ``epsilon`` the counter has reached.

    At most ``spec.periods - 1`` advances happen over a run.
    """
    target = min(eval_counter // spec.epsilon, spec.periods - 1)
    while state.k < target:
        state = advance(state, rng)
    return state


class StaticEnvironment:
    """Evaluation clock around an unmodified problem.

    Keeps the same period bookkeeping as :class:`DynamicEnvironment` so the
    two produce comparable traces.

    Parameters
    ----------
    problem : ConcatTrapProblem
    epsilon : int
        Evaluations per period.
    periods : int
    """

    def __init__(self, problem, epsilon, periods=10):
        self.problem = problem
        self.spec = DynamicsSpec(0.0, epsilon, periods)
        self.evaluations = 0
        self._period = 0

    @property
    def length(self):
        return self.problem.length

    @property
    def budget(self):
        return self.spec.budget

    @property
    def period(self):
        return self._period

    @property
    def exhausted(self):
        return self.evaluations >= self.budget

    def score(self, X):
        """Fitness under the current environment without charging the clock."""
        return self.problem._fitness_unchecked(X)

    def evaluate(self, X):
        """Fitness of a genome or population; charges one evaluation per genome."""
        X = check_bits(X)
        if X.shape[-1] != self.length:
            raise DimensionError(f"genome length {X.shape[-1]} != problem length {self.length}")
        if X.ndim == 1:
            return float(self.evaluate_population(X[None, :])[0])
        return self.evaluate_population(np.ascontiguousarray(X))

    def evaluate_population(self, X):
        """Charged evaluation of a C-contiguous ``(n, L)`` uint8 array, unchecked."""
        self.evaluations += X.shape[0]
        return self.score(X)

    def end_generation(self):
        """Apply any change due at this boundary; True if the fitness landscape moved."""
        self._period = min(self.evaluations // self.spec.epsilon, self.spec.periods - 1)
        return False


class DynamicEnvironment(StaticEnvironment):
    """:class:`StaticEnvironment` plus an evolving XOR mask.

    Parameters
    ----------
    problem : ConcatTrapProblem
    rho : float
        Fraction of bits flipped at each change.
    epsilon : int
        Evaluations between changes.
    periods : int
    random_state : int, Generator or None
        Stream used only for drawing change templates.
    """

    def __init__(self, problem, rho, epsilon, periods=10, random_state=None):
        self.problem = problem
        self.spec = DynamicsSpec(float(rho), epsilon, periods)
        self.evaluations = 0
        self._rng = check_rng(random_state)
        self.state = initial_mask(problem.length, self.spec.rho)
        self.mask_history = [self.state.mask]

    @property
    def period(self):
        return self.state.k

    @property
    def mask(self):
        return self.state.mask

    def score(self, X):
        return self.problem._fitness_unchecked(X, self.state.mask)

    def end_generation(self):
        before = self.state.k
        target = min(self.evaluations // self.spec.epsilon, self.spec.periods - 1)
        while self.state.k < target:
            self.state = advance(self.state, self._rng)
            self.mask_history.append(self.state.mask)
        return self.state.k != before

    def dump_masks(self, path):
        with open(path, "w") as fh:
            for mask in self.mask_history:
                fh.write(to_string(mask) + "\n")
