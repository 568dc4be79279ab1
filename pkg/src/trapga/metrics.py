"""Per-generation traces and the mean best-of-generation summaries."""

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from ._validation import DimensionError, check_rng

__all__ = [
    "TRACE_COLUMNS",
    "RunTrace",
    "ScenarioSummary",
    "TraceRecorder",
    "averaged_fbg",
    "diversity_estimate",
    "mean_best_of_generation",
    "summarize",
]

TRACE_COLUMNS = (
    "generation",
    "evaluations",
    "period",
    "best_fitness",
    "mean_fitness",
    "threshold",
    "diversity",
)


def diversity_estimate(genomes, sample_pairs=None, rng=None):
    """Mean Hamming distance between distinct members.

    Exact by default, from per-locus one counts: a locus with ``c`` ones
    contributes ``c * (N - c)`` differing pairs. Passing ``sample_pairs``
    averages that many random distinct pairs instead.
    """
    genomes = np.asarray(genomes)
    n = genomes.shape[0]
    if n < 2:
        raise ValueError("diversity needs at least two members")
    if sample_pairs is None:
        return float(_kernels.mean_pairwise_distance(np.ascontiguousarray(genomes, dtype=np.uint8)))
    rng = check_rng(rng)
    i = rng.integers(0, n, size=sample_pairs)
    j = (i + rng.integers(1, n, size=sample_pairs)) % n
    return float(np.count_nonzero(genomes[i] != genomes[j], axis=1).mean())


@dataclass
class RunTrace:
    """One run's per-generation record; columns follow ``TRACE_COLUMNS``.

    ``threshold`` is NaN for algorithms without a mating threshold.
    """

    generation: np.ndarray
    evaluations: np.ndarray
    period: np.ndarray
    best_fitness: np.ndarray
    mean_fitness: np.ndarray
    threshold: np.ndarray
    diversity: np.ndarray

    def __len__(self):
        return self.generation.shape[0]

    @property
    def n_generations(self):
        return len(self)

    def column(self, name):
        return getattr(self, name)

    def rows(self):
        cols = [self.column(c) for c in TRACE_COLUMNS]
        for i in range(len(self)):
            yield tuple(c[i] for c in cols)

    def period_means(self):
        """Mean best-of-generation per period, in period order."""
        periods = np.unique(self.period)
        return np.array([self.best_fitness[self.period == k].mean() for k in periods])

    def to_csv(self, fh=None, header_lines=()):
        """Write the trace as CSV; returns the text when ``fh`` is None."""
        out = io.StringIO() if fh is None else fh
        for line in header_lines:
            out.write(f"# {line}\n")
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        for g, ev, k, best, mean, thr, div in self.rows():
            writer.writerow(
                [int(g), int(ev), int(k), _fmt(best), _fmt(mean),
                 "" if np.isnan(thr) else int(thr), _fmt(div)]
            )
        return out.getvalue() if fh is None else None

    def equals(self, other, columns=TRACE_COLUMNS):
        return len(self) == len(other) and all(
            np.array_equal(self.column(c), other.column(c), equal_nan=True) for c in columns
        )


def _fmt(value):
    return repr(float(value))


class TraceRecorder:
    """Preallocated trace buffer filled one generation at a time."""

    def __init__(self, n_generations):
        self._n = n_generations
        self._i = 0
        self._int = np.zeros((3, n_generations), dtype=np.int64)
        self._float = np.full((4, n_generations), np.nan)

    def record(self, evaluations, period, fitness, genomes, threshold=None):
        if self._i >= self._n:
            raise IndexError("trace buffer is full")
        i = self._i
        self._int[:, i] = (i, evaluations, period)
        best, mean, div = _kernels.generation_stats(fitness, genomes)
        self._float[0, i] = best
        self._float[1, i] = mean
        self._float[3, i] = div
        if threshold is not None:
            self._float[2, i] = threshold
        self._i += 1

    def finish(self):
        n = self._i
        return RunTrace(
            generation=self._int[0, :n].copy(),
            evaluations=self._int[1, :n].copy(),
            period=self._int[2, :n].copy(),
            best_fitness=self._float[0, :n].copy(),
            mean_fitness=self._float[1, :n].copy(),
            threshold=self._float[2, :n].copy(),
            diversity=self._float[3, :n].copy(),
        )


def _best_matrix(traces):
    traces = list(traces)
    if not traces:
        raise ValueError("need at least one trace")
    lengths = {len(t.best_fitness) if isinstance(t, RunTrace) else len(t) for t in traces}
    if len(lengths) != 1:
        raise DimensionError(f"traces have different generation counts: {sorted(lengths)}")
    return np.array(
        [t.best_fitness if isinstance(t, RunTrace) else np.asarray(t, float) for t in traces],
        dtype=float,
    )


def mean_best_of_generation(traces):
    """Mean best-of-generation over ``R`` runs of ``G`` generations each.

    Best fitness is averaged over runs for each generation, then over
    generations. Accepts :class:`RunTrace` objects or plain sequences of
    best-of-generation values.

    Returns
    -------
    fbg : float
    run_means : ndarray of shape (R,)
        Each run's own average over generations, the samples fed to the
        t-tests.
    """
    best = _best_matrix(traces)
    fbg = float(best.mean(axis=0).mean())
    return fbg, best.mean(axis=1)


@dataclass
class ScenarioSummary:
    algorithm: str
    N: int
    pm: float
    rho: float
    epsilon: int
    fbg: float
    run_means: np.ndarray = field(repr=False)
    seeds: tuple = ()

    @property
    def fbg_std(self):
        """Sample standard deviation of the per-run means."""
        if len(self.run_means) < 2:
            return 0.0
        return float(np.std(self.run_means, ddof=1))


def summarize(traces, algorithm, N, pm, rho, epsilon, seeds=()):
    fbg, run_means = mean_best_of_generation(traces)
    return ScenarioSummary(algorithm, N, pm, rho, epsilon, fbg, run_means, tuple(seeds))


def averaged_fbg(summaries):
    """Plain mean of several scenarios' mean best-of-generation values."""
    values = [s.fbg if isinstance(s, ScenarioSummary) else float(s) for s in summaries]
    if not values:
        raise ValueError("averaged_fbg needs at least one scenario")
    return float(np.mean(values))
