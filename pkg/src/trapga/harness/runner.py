"""Run orchestration, best-pm comparison and result files.

Each run is an independent work unit keyed by ``(cell, seed)``. Workers
return traces; only the orchestrator writes files, always in plan order, so
output bytes do not depend on ``jobs``.
"""

import csv
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .. import __version__
from .._validation import ConfigError, derive_rng
from ..algorithms import make_algorithm
from ..dynenv import DynamicEnvironment
from ..genome import to_string
from ..metrics import ScenarioSummary, averaged_fbg, summarize
from ..stats import t_test_paired, t_test_two_sample

__all__ = [
    "ENV_STREAM",
    "ALGO_STREAM",
    "HOLE",
    "ScenarioResult",
    "VerdictEntry",
    "VerdictTable",
    "compare",
    "defaults_header",
    "load_results",
    "run_scenario",
    "run_single",
    "run_sweep",
    "select_best_pm",
    "write_results",
]

ENV_STREAM = 0
ALGO_STREAM = 1
HOLE = "NA"

SUMMARY_COLUMNS = ("algorithm", "N", "pm", "rho", "epsilon", "fbg_mean", "fbg_std_across_runs")
RUNS_COLUMNS = ("algorithm", "N", "pm", "rho", "epsilon", "seed", "fbg_run")
AVERAGED_COLUMNS = ("algorithm", "N", "pm", "epsilon", "averaged_fbg")
PLOT_COLUMNS = ("generation", "best_fitness_mean", "best_fitness_min", "best_fitness_max")


def _f(x):
    return repr(float(x))


# single runs ------------------------------------------------------------


def run_single(problem, cell, seed, return_env=False):
    """One run of ``cell`` with base seed ``seed``.

    The mask stream and the algorithm stream are derived from the seed with
    fixed labels, so every algorithm sees the same mask sequence.
    """
    env = DynamicEnvironment(
        problem, cell.rho, cell.epsilon, cell.periods,
        random_state=derive_rng(seed, ENV_STREAM),
    )
    est = make_algorithm(
        cell.algorithm, **cell.estimator_params(), random_state=derive_rng(seed, ALGO_STREAM)
    )
    est.fit(env)
    if env.evaluations != cell.dynamics.budget:
        raise RuntimeError(
            f"{cell.slug} seed {seed}: consumed {env.evaluations} evaluations, "
            f"expected {cell.dynamics.budget}"
        )
    return (est, env) if return_env else est.trace_


def _job(args):
    problem, cell, seed = args
    return run_single(problem, cell, seed)


@dataclass
class ScenarioResult:
    """Summary of one cell plus the per-generation band across runs."""

    cell: object
    summary: ScenarioSummary
    plot: np.ndarray  # (G, 3): mean, min, max best fitness over runs
    traces: list = field(default=None, repr=False)


def _map(executor, fn, items):
    if executor is None:
        return [fn(item) for item in items]
    return list(executor.map(fn, items))


def run_scenario(problem, cell, seeds, jobs=1, keep_traces=True, executor=None):
    """All runs of one cell.

    Returns
    -------
    ScenarioResult
    """
    if cell.epsilon % cell.N:
        raise ConfigError(f"epsilon={cell.epsilon} is not divisible by N={cell.N}")
    own = executor is None and jobs > 1
    if own:
        executor = ProcessPoolExecutor(max_workers=jobs)
    try:
        traces = _map(executor, _job, [(problem, cell, s) for s in seeds])
    finally:
        if own:
            executor.shutdown()
    best = np.array([t.best_fitness for t in traces])
    summary = summarize(traces, cell.name, cell.N, cell.pm, cell.rho, cell.epsilon, seeds)
    plot = np.column_stack([best.mean(axis=0), best.min(axis=0), best.max(axis=0)])
    return ScenarioResult(cell, summary, plot, traces if keep_traces else None)


def run_sweep(plan, jobs=1, keep_traces=False):
    """Every cell of ``plan`` in plan order."""
    executor = ProcessPoolExecutor(max_workers=jobs) if jobs > 1 else None
    try:
        return [
            run_scenario(plan.problem, cell, plan.seeds, keep_traces=keep_traces, executor=executor)
            for cell in plan.cells()
        ]
    finally:
        if executor is not None:
            executor.shutdown()


# comparison -------------------------------------------------------------


def _scenario_key(s):
    return (s.epsilon, s.rho)


def select_best_pm(summaries):
    """Best-pm configuration per ``(algorithm, N, epsilon)``.

    The winner maximizes the mean best-of-generation averaged over that
    epsilon's scenarios; ties go to the smaller pm.

    Returns
    -------
    dict mapping ``(algorithm, N, epsilon)`` to ``(pm, averaged_fbg)``
    """
    groups = {}
    for s in summaries:
        groups.setdefault((s.algorithm, s.N, s.epsilon), {}).setdefault(s.pm, []).append(s)
    best = {}
    for key, by_pm in groups.items():
        scored = sorted((-averaged_fbg(v), pm) for pm, v in by_pm.items())
        best[key] = (scored[0][1], -scored[0][0])
    return best


@dataclass(frozen=True)
class VerdictEntry:
    row: str
    first: str
    opponent: str
    epsilon: int
    rho: float
    first_pm: float = None
    opponent_pm: float = None
    first_fbg: float = None
    opponent_fbg: float = None
    pooled: object = None
    paired: object = None
    use_paired: bool = False

    @property
    def missing(self):
        return self.pooled is None

    @property
    def verdict(self):
        if self.missing:
            return HOLE
        test = self.paired if self.use_paired else self.pooled
        return HOLE if test is None else test.verdict


@dataclass
class VerdictTable:
    """Verdict grid: rows are opponents, columns ``(epsilon, rho)`` cells."""

    entries: list
    columns: list
    rows: list
    paired: bool = False

    def cell(self, row, epsilon, rho):
        for e in self.entries:
            if e.row == row and e.epsilon == epsilon and e.rho == rho:
                return e
        raise KeyError((row, epsilon, rho))

    def verdicts(self, row=None):
        return [e.verdict for e in self.entries if row is None or e.row == row]

    def to_csv(self, fh, header_lines=()):
        for line in header_lines:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([
            "row", "first", "opponent", "epsilon", "rho", "first_pm", "opponent_pm",
            "first_fbg", "opponent_fbg", "t_pooled", "df_pooled", "p_pooled", "verdict_pooled",
            "t_paired", "df_paired", "p_paired", "verdict_paired", "verdict",
        ])
        for e in self.entries:
            vals = [e.row, e.first, e.opponent, e.epsilon, _f(e.rho)]
            if e.missing:
                vals += [HOLE] * 12
            else:
                vals += [_f(e.first_pm), _f(e.opponent_pm), _f(e.first_fbg), _f(e.opponent_fbg)]
                for test in (e.pooled, e.paired):
                    if test is None:
                        vals += [HOLE] * 4
                    else:
                        vals += [_f(test.t_statistic), test.degrees_of_freedom, _f(test.p_value), test.verdict]
            vals.append(e.verdict)
            w.writerow(vals)

    def to_text(self):
        """Aligned grid, one line per opponent."""
        heads = [f"e={eps} r={rho:g}" for eps, rho in self.columns]
        width = max(len(h) for h in heads)
        label_w = max([len(r) for r in self.rows] + [4])
        lines = [" " * label_w + "  " + "  ".join(h.rjust(width) for h in heads)]
        for row in self.rows:
            marks = [self.cell(row, eps, rho).verdict for eps, rho in self.columns]
            lines.append(row.ljust(label_w) + "  " + "  ".join(m.rjust(width) for m in marks))
        return "\n".join(lines) + "\n"


def _aligned(a, b):
    sa = dict(zip(a.seeds, a.run_means))
    sb = dict(zip(b.seeds, b.run_means))
    if not a.seeds or set(sa) != set(sb):
        return None
    order = sorted(sa)
    return np.array([sa[s] for s in order]), np.array([sb[s] for s in order])


def compare(summaries, first, opponents, paired=False, row_prefix=""):
    """Best-pm verdict grid of ``first`` against each opponent.

    Parameters
    ----------
    summaries : iterable of ScenarioSummary
        May hold several pm values and N values per algorithm; the best pm
        per epsilon is chosen for each ``(algorithm, N)``.
    first : str
        Algorithm whose advantage is reported as ``+``.
    opponents : list of str
    paired : bool
        Use the paired test for the displayed verdict. Both tests are
        always computed when seeds line up.
    row_prefix : str
        Prepended to row labels, e.g. a problem name.

    Cells where either algorithm lacks data become :data:`HOLE` entries.
    """
    summaries = list(summaries)
    if isinstance(opponents, str):
        opponents = [opponents]
    index = {(s.algorithm, s.N, s.pm, s.epsilon, s.rho): s for s in summaries}
    best = select_best_pm(summaries)
    columns = sorted({_scenario_key(s) for s in summaries})
    sizes = sorted({s.N for s in summaries if s.algorithm == first})
    if not sizes:
        raise ConfigError(f"no results for algorithm {first!r}")

    entries, rows = [], []
    for opp in opponents:
        opp_sizes = sorted({s.N for s in summaries if s.algorithm == opp}) or [None]
        for n in sizes:
            for on in opp_sizes:
                row = f"{row_prefix}{opp}"
                if len(sizes) > 1 or len(opp_sizes) > 1:
                    row += f" (N={n} vs {on})"
                rows.append(row)
                for eps, rho in columns:
                    entries.append(_entry(index, best, row, first, n, opp, on, eps, rho, paired))
    return VerdictTable(entries, columns, rows, paired)


def _entry(index, best, row, first, n, opp, on, eps, rho, paired):
    blank = VerdictEntry(row, first, opp, eps, rho, use_paired=paired)
    if (first, n, eps) not in best or (opp, on, eps) not in best:
        return blank
    pa, pb = best[(first, n, eps)][0], best[(opp, on, eps)][0]
    a, b = index.get((first, n, pa, eps, rho)), index.get((opp, on, pb, eps, rho))
    if a is None or b is None or len(a.run_means) < 2 or len(b.run_means) < 2:
        return blank
    pooled = t_test_two_sample(a.run_means, b.run_means)
    aligned = _aligned(a, b)
    paired_v = t_test_paired(*aligned) if aligned is not None else None
    return VerdictEntry(row, first, opp, eps, rho, pa, pb, a.fbg, b.fbg, pooled, paired_v, paired)


# files ------------------------------------------------------------------


def defaults_header(plan=None, extra=()):
    """Decided defaults echoed at the top of every output file."""
    lines = [f"trapga {__version__}"]
    if plan is not None:
        p = plan.problem
        s = p.spec
        lines.append(f"problem: order={s.l} blocks={p.m} a={s.a:g} b={s.b:g} z={s.z} L={p.length}")
        lines.append(f"periods: {plan.periods}")
        lines.append("seeds: " + " ".join(str(x) for x in plan.seeds))
        for spec in plan.algorithms:
            params = " ".join(f"{k}={v}" for k, v in spec.params) or "defaults"
            lines.append(f"algorithm {spec.name}: algo={spec.algorithm} {params}")
    lines += [
        "flip_count: floor(rho*L + 0.5), positions drawn without replacement",
        "initial_mask: all zeros; change checked after each generation every epsilon evaluations",
        "streams: env=default_rng([seed, 0]) algo=default_rng([seed, 1])",
        "selection: tournament (binary) unless overridden per algorithm",
        "crossover: uniform, pc=1.0 unless overridden; mutation: bit-flip, pm default 1/L",
        "elitism: 2, best previous genomes re-scored and reinserted over the worst",
        "worst_order: lowest fitness, then highest index",
        "replacement: ssga worst N/2; admga(dop) worst non-elite, offspring truncated to best N-2; "
        "admga(static) best N of parents+offspring; riga rr worst or random excluding top 2",
        "rr: round(4*N/30) unless given",
        "evaluations: N per generation including generation 0; membership scoring uncharged",
        "diversity: exact mean pairwise Hamming distance",
        "ttest: pooled two-sample (df=2R-2) by default, paired (df=R-1) with --paired-ttest, alpha=0.05",
    ]
    return lines + list(extra)


def _write_header(fh, lines):
    for line in lines:
        fh.write(f"# {line}\n")


def write_results(out_dir, plan, results, averaged=False, header=None):
    """Write summary, per-run means, plot bands and optional traces/masks.

    Files
    -----
    summary.csv, runs.csv, plot/<cell>.dat, averaged.csv (sweeps),
    traces/<cell>/seed<s>.csv and masks/rho<r>_eps<e>_seed<s>.txt when the
    plan's ``output`` section asks for them.
    """
    header = defaults_header(plan) if header is None else header
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "summary.csv"), "w") as fh:
        _write_header(fh, header)
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for r in results:
            s = r.summary
            w.writerow([s.algorithm, s.N, _f(s.pm), _f(s.rho), s.epsilon, _f(s.fbg), _f(s.fbg_std)])
    with open(os.path.join(out_dir, "runs.csv"), "w") as fh:
        _write_header(fh, header)
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RUNS_COLUMNS)
        for r in results:
            s = r.summary
            for seed, value in zip(s.seeds, s.run_means):
                w.writerow([s.algorithm, s.N, _f(s.pm), _f(s.rho), s.epsilon, seed, _f(value)])
    plot_dir = os.path.join(out_dir, "plot")
    os.makedirs(plot_dir, exist_ok=True)
    for r in results:
        with open(os.path.join(plot_dir, r.cell.slug + ".dat"), "w") as fh:
            _write_header(fh, header)
            fh.write(" ".join(PLOT_COLUMNS) + "\n")
            for g, (mean, lo, hi) in enumerate(r.plot):
                fh.write(f"{g} {_f(mean)} {_f(lo)} {_f(hi)}\n")
    if averaged:
        groups = {}
        for r in results:
            s = r.summary
            groups.setdefault((s.algorithm, s.N, s.pm, s.epsilon), []).append(s)
        with open(os.path.join(out_dir, "averaged.csv"), "w") as fh:
            _write_header(fh, header)
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(AVERAGED_COLUMNS)
            for (alg, n, pm, eps), group in groups.items():
                w.writerow([alg, n, _f(pm), eps, _f(averaged_fbg(group))])
    if plan is not None and plan.options.get("traces"):
        for r in results:
            if r.traces is None:
                continue
            d = os.path.join(out_dir, "traces", r.cell.slug)
            os.makedirs(d, exist_ok=True)
            for seed, trace in zip(r.summary.seeds, r.traces):
                with open(os.path.join(d, f"seed{seed}.csv"), "w") as fh:
                    trace.to_csv(fh, header)
    if plan is not None and plan.options.get("masks"):
        d = os.path.join(out_dir, "masks")
        os.makedirs(d, exist_ok=True)
        for rho, eps in plan.scenarios:
            for seed in plan.seeds:
                write_masks(
                    os.path.join(d, f"rho{rho:g}_eps{eps}_seed{seed}.txt"),
                    mask_sequence(plan.problem.length, rho, eps, plan.periods, seed),
                    header,
                )


def mask_sequence(length, rho, epsilon, periods, seed):
    """Masks ``M(0) .. M(periods-1)`` a run with this seed will see."""
    from ..dynenv import advance, initial_mask

    rng = derive_rng(seed, ENV_STREAM)
    state = initial_mask(length, rho)
    masks = [state.mask]
    for _ in range(periods - 1):
        state = advance(state, rng)
        masks.append(state.mask)
    return masks


def write_masks(path, masks, header=()):
    with open(path, "w") as fh:
        _write_header(fh, header)
        for m in masks:
            fh.write(to_string(m) + "\n")


def load_results(path):
    """Read ``runs.csv`` (a file or result directory) back into summaries."""
    if os.path.isdir(path):
        path = os.path.join(path, "runs.csv")
    try:
        with open(path) as fh:
            lines = [ln for ln in fh if not ln.startswith("#")]
    except OSError as exc:
        raise ConfigError(f"cannot read results {path}: {exc}") from exc
    reader = csv.DictReader(lines)
    if reader.fieldnames is None or tuple(reader.fieldnames) != RUNS_COLUMNS:
        raise ConfigError(f"{path} is not a runs file (columns {reader.fieldnames})")
    groups = {}
    for row in reader:
        key = (row["algorithm"], int(row["N"]), float(row["pm"]), float(row["rho"]), int(row["epsilon"]))
        groups.setdefault(key, []).append((int(row["seed"]), float(row["fbg_run"])))
    out = []
    for (alg, n, pm, rho, eps), rows in groups.items():
        seeds = tuple(s for s, _ in rows)
        means = np.array([v for _, v in rows])
        # per-run means share the generation count, so their mean is the scenario value
        out.append(ScenarioSummary(alg, n, pm, rho, eps, float(means.mean()), means, seeds))
    return out
