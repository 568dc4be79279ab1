"""Selection, variation and elitism over ``(N, L)`` uint8 populations.

Operators draw everything from an injected ``numpy.random.Generator`` in a
fixed order, so a seeded run replays bit for bit.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._validation import ConfigError, DimensionError

__all__ = [
    "SELECTION_SCHEMES",
    "Population",
    "apply_elitism",
    "bitflip_mutation",
    "breed",
    "select_parent",
    "select_parents",
    "top_indices",
    "uniform_crossover",
    "worst_order",
]

SELECTION_SCHEMES = ("tournament", "proportional")


@dataclass
class Population:
    """Genomes with the fitness they had when last evaluated.

    ``period`` records the environment period of that evaluation.
    """

    genomes: np.ndarray
    fitness: np.ndarray
    period: int = 0

    def __post_init__(self):
        if self.genomes.ndim != 2 or self.fitness.shape != (self.genomes.shape[0],):
            raise DimensionError(
                f"genomes {self.genomes.shape} and fitness {self.fitness.shape} disagree"
            )

    @property
    def size(self):
        return self.genomes.shape[0]

    def __len__(self):
        return self.size

    def copy(self):
        return Population(self.genomes.copy(), self.fitness.copy(), self.period)


def top_indices(fitness, k):
    """Indices of the ``k`` fittest members; ties go to the lower index."""
    return np.argsort(-fitness, kind="stable")[:k]


def worst_order(fitness):
    """Indices from worst to best: lowest fitness first, then highest index."""
    idx = np.arange(fitness.shape[0])
    return np.lexsort((-idx, fitness))


def select_parents(fitness, k, rng, scheme="tournament"):
    """Draw ``k`` parent indices.

    ``tournament`` is binary tournament: two contestants drawn uniformly with
    replacement, the fitter one wins and a fair coin settles ties.
    ``proportional`` is roulette-wheel selection on the raw fitness (uniform
    when every fitness is zero).
    """
    fitness = np.ascontiguousarray(fitness, dtype=float)
    if fitness.shape[0] == 0:
        raise ValueError("cannot select from an empty population")
    if scheme == "tournament":
        code = _kernels.TOURNAMENT
    elif scheme == "proportional":
        if np.any(fitness < 0):
            raise ValueError("proportional selection needs non-negative fitness")
        code = _kernels.PROPORTIONAL
    else:
        raise ConfigError(f"unknown selection scheme {scheme!r}; choose from {SELECTION_SCHEMES}")
    return _kernels.select(fitness, int(k), rng, code)


def select_parent(fitness, rng, scheme="tournament"):
    return int(select_parents(fitness, 1, rng, scheme)[0])


def uniform_crossover(p1, p2, rng, pc=1.0):
    """Swap each locus between the parents with probability 0.5.

    Works on single genomes or on row-aligned parent matrices. With ``pc`` < 1
    each pair is recombined with probability ``pc`` and cloned otherwise.
    """
    p1 = np.asarray(p1, dtype=np.uint8)
    p2 = np.asarray(p2, dtype=np.uint8)
    if p1.shape != p2.shape:
        raise DimensionError(f"parent shapes differ: {p1.shape} != {p2.shape}")
    single = p1.ndim == 1
    a = np.atleast_2d(p1)
    k = a.shape[0]
    stacked = np.ascontiguousarray(np.concatenate([a, np.atleast_2d(p2)], axis=0))
    idx = np.arange(k, dtype=np.int64)
    children = _kernels.crossover(stacked, idx, idx + k, float(pc), rng)
    c1, c2 = children[:k], children[k:]
    return (c1[0], c2[0]) if single else (c1, c2)


def bitflip_mutation(x, pm, rng):
    """Flip each bit independently with probability ``pm``; returns a copy."""
    if not 0.0 <= pm <= 1.0:
        raise ConfigError(f"pm must lie in [0, 1], got {pm}")
    out = np.array(x, dtype=np.uint8, order="C", copy=True)
    _kernels.mutate(out, float(pm), rng)
    return out


def breed(genomes, first, second, rng, pm, pc=1.0):
    """Recombine row pairs ``(first[i], second[i])`` and mutate every child.

    Returns ``2 * len(first)`` children: all first children, then all
    second children.
    """
    children = _kernels.crossover(
        genomes, np.asarray(first, dtype=np.int64), np.asarray(second, dtype=np.int64), float(pc), rng
    )
    return _kernels.mutate(children, float(pm), rng)


def apply_elitism(elite_genomes, elite_fitness, genomes, fitness):
    """Re-insert previous elites that beat the current worst members.

    Elites are handled best first. One already present (by genome) is left
    where it is; otherwise it replaces the worst member not yet claimed by an
    elite, if it is strictly fitter. ``elite_fitness`` must be measured under
    the same environment as ``fitness``. Returns new ``(genomes, fitness)``
    arrays; the inputs are not modified.
    """
    genomes = np.array(genomes, dtype=np.uint8, order="C")
    fitness = np.array(fitness, dtype=float)
    _kernels.elitism(
        np.ascontiguousarray(elite_genomes, dtype=np.uint8),
        np.ascontiguousarray(elite_fitness, dtype=float),
        genomes,
        fitness,
    )
    return genomes, fitness
