"""Genetic algorithm variants as scikit-learn style estimators.

Every estimator exposes ``fit(env)``, which runs one full run against an
environment from :mod:`trapga.dynenv` until its evaluation budget is spent,
and stores the per-generation trace in ``trace_``. Hyperparameters live in
``__init__`` so ``get_params``/``set_params``/``sklearn.base.clone`` work for
parameter sweeps.

A generation always charges exactly ``population_size`` evaluations: the
members of the new population are evaluated (or re-evaluated) under the
current environment once. Scoring used only to decide membership (the
previous elites after a change, surplus offspring, immigrants) goes through
``env.score`` and is not charged.
"""

from abc import ABCMeta, abstractmethod
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from . import _kernels
from ._validation import ConfigError, check_positive_int, check_probability, check_rng
from .gacore import (
    SELECTION_SCHEMES,
    Population,
    apply_elitism,
    top_indices,
    worst_order,
)
from .genome import random_population
from .metrics import TraceRecorder

__all__ = [
    "ADMGA",
    "ALGORITHMS",
    "AMGA",
    "BaseGA",
    "GAState",
    "GGA",
    "RIGA",
    "SSGA",
    "admga_create_new",
    "amga_pick_partner",
    "make_algorithm",
    "register_algorithm",
]


@dataclass
class GAState:
    """Mutable run state handed from one generation to the next."""

    population: Population
    generation: int = 0
    threshold: int = None
    mating_log: list = field(default_factory=list)


class BaseGA(BaseEstimator, metaclass=ABCMeta):
    """Shared generation loop with 2-elitism.

    Parameters
    ----------
    population_size : int, default=30
    pm : float or None, default=None
        Per-bit mutation probability; None means ``1 / L``.
    pc : float, default=1.0
        Crossover probability per pair.
    selection : {"tournament", "proportional"}, default="tournament"
    elitism : int, default=2
        Number of previous best genomes guaranteed a place if they beat the
        current worst members.
    random_state : int, Generator or None
        Algorithm stream. The environment keeps its own.
    """

    has_threshold = False

    def __init__(
        self,
        population_size=30,
        pm=None,
        pc=1.0,
        selection="tournament",
        elitism=2,
        random_state=None,
    ):
        self.population_size = population_size
        self.pm = pm
        self.pc = pc
        self.selection = selection
        self.elitism = elitism
        self.random_state = random_state

    # validation -------------------------------------------------------

    def _validate_params(self, length):
        check_positive_int(self.population_size, "population_size", minimum=2)
        if self.pm is not None:
            check_probability(self.pm, "pm")
        check_probability(self.pc, "pc")
        if self.selection not in SELECTION_SCHEMES:
            raise ConfigError(
                f"unknown selection {self.selection!r}; choose from {SELECTION_SCHEMES}"
            )
        check_positive_int(self.elitism, "elitism", minimum=0)
        if self.elitism > self.population_size:
            raise ConfigError("elitism cannot exceed population_size")

    def _pm(self, length):
        return 1.0 / length if self.pm is None else float(self.pm)

    # run loop ---------------------------------------------------------

    def initialize(self, env, rng):
        """Random initial population, evaluated (charges ``N``)."""
        genomes = random_population(self.population_size, env.length, rng)
        fitness = env.evaluate(genomes)
        return GAState(Population(genomes, fitness, env.period), threshold=self._initial_threshold(env.length))

    def _initial_threshold(self, length):
        return None

    def step(self, state, env, rng):
        """One generation: variation, evaluation of N members, elitism."""
        pop = state.population
        n_elite = min(self.elitism, pop.size)
        elite_idx = top_indices(pop.fitness, n_elite)
        elite_genomes = pop.genomes[elite_idx]

        evals_before = env.evaluations
        genomes, fitness = self._variation(state, env, rng, elite_idx)
        if env.evaluations - evals_before != self.population_size:
            raise RuntimeError(
                f"{type(self).__name__} charged {env.evaluations - evals_before} "
                f"evaluations in one generation, expected {self.population_size}"
            )
        if n_elite:
            genomes, fitness = apply_elitism(
                elite_genomes, env.score(elite_genomes), genomes, fitness
            )
        genomes, fitness = self._after_elitism(genomes, fitness, env, rng)
        state.population = Population(genomes, fitness, env.period)
        state.generation += 1
        return state

    @abstractmethod
    def _variation(self, state, env, rng, elite_idx):
        """Return the next ``(genomes, fitness)``, charging exactly N evaluations."""

    def _after_elitism(self, genomes, fitness, env, rng):
        return genomes, fitness

    def fit(self, env, y=None):
        """Run until ``env`` has spent its evaluation budget.

        Generation 0 is the evaluated random initial population; each later
        generation is one :meth:`step`. The environment is given a chance to
        change after every generation.

        Parameters
        ----------
        env : StaticEnvironment or DynamicEnvironment
            Must be fresh; its budget must be a multiple of
            ``population_size``.
        y : None
            Ignored.

        Returns
        -------
        self
        """
        self._validate_params(env.length)
        if env.evaluations != 0:
            raise ConfigError("fit needs a fresh environment")
        if env.budget % self.population_size:
            raise ConfigError(
                f"budget {env.budget} is not a multiple of population_size "
                f"{self.population_size}"
            )
        rng = check_rng(self.random_state)
        recorder = TraceRecorder(env.budget // self.population_size)

        state = self.initialize(env, rng)
        self._record(recorder, env, state)
        env.end_generation()
        while not env.exhausted:
            state = self.step(state, env, rng)
            self._record(recorder, env, state)
            env.end_generation()

        self.state_ = state
        self.trace_ = recorder.finish()
        self.n_evaluations_ = env.evaluations
        self.n_generations_ = len(self.trace_)
        best = int(np.argmax(state.population.fitness))
        self.best_genome_ = state.population.genomes[best].copy()
        self.best_fitness_ = float(self.trace_.best_fitness.max())
        return self

    def _record(self, recorder, env, state):
        pop = state.population
        recorder.record(env.evaluations, env.period, pop.fitness, pop.genomes, state.threshold)

    # shared variation pieces -----------------------------------------

    def _scheme(self):
        return _kernels.TOURNAMENT if self.selection == "tournament" else _kernels.PROPORTIONAL

    def _offspring(self, genomes, fitness, count, rng, length):
        """``count`` children from selected pairs."""
        n_pairs = -(-count // 2)
        children = _kernels.offspring(
            genomes, fitness, n_pairs, self._scheme(), self._pm(length), float(self.pc), rng
        )
        return children[:count]


class GGA(BaseGA):
    """Generational GA: N offspring replace the parents every generation."""

    def _variation(self, state, env, rng, elite_idx):
        pop = state.population
        children = self._offspring(pop.genomes, pop.fitness, pop.size, rng, env.length)
        return children, env.evaluate_population(children)


class SSGA(BaseGA):
    """Steady-state GA: N/2 offspring replace the worst half each generation.

    The surviving half is re-evaluated with the offspring.
    """

    def _validate_params(self, length):
        super()._validate_params(length)
        if self.population_size % 2:
            raise ConfigError(f"SSGA needs an even population_size, got {self.population_size}")

    def _variation(self, state, env, rng, elite_idx):
        pop = state.population
        half = pop.size // 2
        children = self._offspring(pop.genomes, pop.fitness, half, rng, env.length)
        genomes = pop.genomes.copy()
        genomes[worst_order(pop.fitness)[:half]] = children
        return genomes, env.evaluate_population(genomes)


def admga_create_new(genomes, fitness, threshold, rng, pm, pc=1.0, selection="tournament"):
    """Create offspring under the adaptive Hamming-distance mating restriction.

    Batches of ``N // 2`` mating events are run until at least one succeeds.
    In each event two parents are selected and recombined (two mutated
    children) only if their Hamming distance is at least the threshold.
    The success and failure counts accumulate across batches; after every
    batch the threshold drops by one if failures outnumber successes and
    rises by one otherwise, clamped to ``[0, L]``.

    Parents of a batch are drawn together: all first parents, then all
    second parents.

    Returns
    -------
    offspring : ndarray of shape (2 * successes, L)
    threshold : int
        Updated threshold.
    batches : list of (threshold, successes, failures)
        Per batch, the threshold in force and that batch's own counts.
    """
    n, length = genomes.shape
    events = max(n // 2, 1)
    scheme = _kernels.TOURNAMENT if selection == "tournament" else _kernels.PROPORTIONAL
    fitness = np.ascontiguousarray(fitness, dtype=float)
    successes = failures = 0
    batches = []
    offspring = []
    while successes < 1:
        children, batch_success = _kernels.dissortative_batch(
            genomes, fitness, events, threshold, scheme, float(pm), float(pc), rng
        )
        successes += batch_success
        failures += events - batch_success
        if batch_success:
            offspring.append(children)
        batches.append((threshold, batch_success, events - batch_success))
        threshold = threshold - 1 if failures > successes else threshold + 1
        threshold = min(max(threshold, 0), length)
    return np.concatenate(offspring, axis=0), threshold, batches


class ADMGA(BaseGA):
    """Adaptive dissortative mating GA.

    Parameters
    ----------
    mode : {"dop", "static"}, default="dop"
        ``"dop"``: initial threshold ``L // 4`` and offspring replace the
        worst parents (elites excluded). ``"static"``: initial threshold
        ``L - 1`` and parents plus offspring are truncated to the best N.
    initial_threshold : int or None
        Overrides the mode's starting threshold.

    The other parameters are those of :class:`BaseGA`.

    Attributes
    ----------
    threshold_ : int
        Threshold at the end of the run.
    """

    has_threshold = True

    def __init__(
        self,
        population_size=30,
        pm=None,
        pc=1.0,
        selection="tournament",
        elitism=2,
        random_state=None,
        mode="dop",
        initial_threshold=None,
    ):
        super().__init__(population_size, pm, pc, selection, elitism, random_state)
        self.mode = mode
        self.initial_threshold = initial_threshold

    def _validate_params(self, length):
        super()._validate_params(length)
        if self.mode not in ("dop", "static"):
            raise ConfigError(f"mode must be 'dop' or 'static', got {self.mode!r}")
        if self.initial_threshold is not None and not 0 <= self.initial_threshold <= length:
            raise ConfigError(f"initial_threshold must lie in [0, {length}]")

    def _initial_threshold(self, length):
        if self.initial_threshold is not None:
            return int(self.initial_threshold)
        return length - 1 if self.mode == "static" else length // 4

    def create_new(self, state, env, rng):
        pop = state.population
        offspring, state.threshold, batches = admga_create_new(
            pop.genomes, pop.fitness, state.threshold, rng,
            self._pm(env.length), self.pc, self.selection,
        )
        state.mating_log = batches
        return offspring

    def _variation(self, state, env, rng, elite_idx):
        pop = state.population
        offspring = self.create_new(state, env, rng)
        if self.mode == "static":
            merged = np.concatenate([pop.genomes, offspring], axis=0)
            keep = top_indices(env.score(merged), pop.size)
            genomes = merged[np.sort(keep)]
            return genomes, env.evaluate_population(genomes)

        protected = set(elite_idx.tolist())
        slots = [i for i in worst_order(pop.fitness) if i not in protected]
        if offspring.shape[0] > len(slots):
            offspring = offspring[top_indices(env.score(offspring), len(slots))]
        genomes = pop.genomes.copy()
        genomes[slots[: offspring.shape[0]]] = offspring
        return genomes, env.evaluate_population(genomes)

    def fit(self, env, y=None):
        super().fit(env, y)
        self.threshold_ = self.state_.threshold
        return self


class RIGA(BaseGA):
    """Random immigrants GA: a GGA plus ``rr`` fresh random genomes per generation.

    Parameters
    ----------
    rr : int or None
        Immigrants per generation; None means ``round(4 * N / 30)``.
    replacement : {"worst", "random"}, default="worst"
        Immigrants overwrite the worst members or uniformly random ones.
        The current two best members are never overwritten.

    The other parameters are those of :class:`BaseGA`.
    """

    def __init__(
        self,
        population_size=30,
        pm=None,
        pc=1.0,
        selection="tournament",
        elitism=2,
        random_state=None,
        rr=None,
        replacement="worst",
    ):
        super().__init__(population_size, pm, pc, selection, elitism, random_state)
        self.rr = rr
        self.replacement = replacement

    def _rr(self):
        return int(round(4 * self.population_size / 30)) if self.rr is None else int(self.rr)

    def _validate_params(self, length):
        super()._validate_params(length)
        if self.replacement not in ("worst", "random"):
            raise ConfigError(f"replacement must be 'worst' or 'random', got {self.replacement!r}")
        if not 0 <= self._rr() <= self.population_size - min(self.elitism, 2):
            raise ConfigError(f"rr must lie in [0, N - 2], got {self._rr()}")

    def _variation(self, state, env, rng, elite_idx):
        pop = state.population
        children = self._offspring(pop.genomes, pop.fitness, pop.size, rng, env.length)
        return children, env.evaluate_population(children)

    def _after_elitism(self, genomes, fitness, env, rng):
        rr = self._rr()
        if rr == 0:
            return genomes, fitness
        best = set(top_indices(fitness, 2).tolist())
        if self.replacement == "worst":
            slots = [i for i in worst_order(fitness) if i not in best][:rr]
        else:
            candidates = np.array([i for i in range(fitness.shape[0]) if i not in best])
            slots = rng.choice(candidates, size=rr, replace=False)
        immigrants = random_population(rr, env.length, rng)
        genomes = genomes.copy()
        fitness = fitness.copy()
        genomes[slots] = immigrants
        fitness[slots] = env.score(immigrants)
        return genomes, fitness


def amga_pick_partner(first, genomes, pool_size, polarity="negative", rng=None):
    """Index of the second parent for first parent ``first``.

    A pool of ``pool_size`` distinct members, excluding ``first``, is drawn
    uniformly; the member farthest from (negative polarity) or closest to
    (positive polarity) ``first`` in Hamming distance is returned, ties to
    the earliest pool position.
    """
    genomes = np.asarray(genomes)
    if not 1 <= pool_size <= genomes.shape[0] - 1:
        raise ConfigError(
            f"pool size must lie in [1, N - 1] = [1, {genomes.shape[0] - 1}], got {pool_size}"
        )
    if polarity not in ("negative", "positive"):
        raise ConfigError(f"polarity must be 'negative' or 'positive', got {polarity!r}")
    rng = check_rng(rng)
    genomes = np.ascontiguousarray(genomes, dtype=np.uint8)
    first = np.array([first], dtype=np.int64)
    return int(_kernels.pick_partners(genomes, first, pool_size, polarity == "negative", rng)[0])


class AMGA(BaseGA):
    """Assortative mating GA on a generational shell.

    The first parent of each pair is selected as in :class:`GGA`; the second
    is the most dissimilar (``polarity="negative"``) or most similar
    (``"positive"``) member of a random pool of ``n`` others.

    Parameters
    ----------
    n : int, default=4
        Pool size.
    polarity : {"negative", "positive"}, default="negative"

    The other parameters are those of :class:`BaseGA`.
    """

    def __init__(
        self,
        population_size=30,
        pm=None,
        pc=1.0,
        selection="tournament",
        elitism=2,
        random_state=None,
        n=4,
        polarity="negative",
    ):
        super().__init__(population_size, pm, pc, selection, elitism, random_state)
        self.n = n
        self.polarity = polarity

    def _validate_params(self, length):
        super()._validate_params(length)
        if not 1 <= self.n <= self.population_size - 1:
            raise ConfigError(f"pool size n must lie in [1, N - 1], got {self.n}")
        if self.polarity not in ("negative", "positive"):
            raise ConfigError(f"polarity must be 'negative' or 'positive', got {self.polarity!r}")

    def _variation(self, state, env, rng, elite_idx):
        pop = state.population
        n_pairs = -(-pop.size // 2)
        children = _kernels.assortative_offspring(
            pop.genomes, pop.fitness, n_pairs, self.n, self.polarity == "negative",
            self._scheme(), self._pm(env.length), float(self.pc), rng,
        )[: pop.size]
        return children, env.evaluate_population(children)


ALGORITHMS = {
    "gga": (GGA, {}),
    "ssga": (SSGA, {}),
    "admga": (ADMGA, {}),
    "riga_worst": (RIGA, {"replacement": "worst"}),
    "riga_random": (RIGA, {"replacement": "random"}),
    "namga": (AMGA, {"polarity": "negative"}),
    "pamga": (AMGA, {"polarity": "positive"}),
}


def register_algorithm(name, estimator_class, **fixed_params):
    """Make an estimator available to the harness under ``name``.

    Any class with scikit-learn style parameters and a ``fit(env)`` that
    sets ``trace_`` can be registered, e.g. an external random-immigrants
    variant.
    """
    if not hasattr(estimator_class, "fit"):
        raise TypeError(f"{estimator_class!r} has no fit method")
    ALGORITHMS[name] = (estimator_class, dict(fixed_params))


def make_algorithm(name, **params):
    try:
        cls, fixed = ALGORITHMS[name]
    except KeyError:
        raise ConfigError(f"unknown algorithm {name!r}; known: {sorted(ALGORITHMS)}") from None
    return cls(**{**fixed, **params})
