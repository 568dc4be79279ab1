"""Command line entry point: ``trapga run|sweep|compare|replay``.

Exit codes: 0 success, 2 configuration error, 3 runtime error.
"""

import argparse
import os
import sys

from .._validation import ConfigError
from .plan import load_plan
from .runner import (
    compare,
    defaults_header,
    load_results,
    run_single,
    run_sweep,
    write_masks,
    write_results,
)

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


def _load(args):
    plan = load_plan(args.plan)
    if args.seed_base is not None:
        plan = plan.with_seed_base(args.seed_base)
    return plan


def _cmd_run(args, sweep=False):
    plan = _load(args)
    if not sweep:
        plan.require_single_configuration()
    if args.jobs < 1:
        raise ConfigError("--jobs must be at least 1")
    results = run_sweep(plan, jobs=args.jobs, keep_traces=bool(plan.options.get("traces")))
    write_results(args.out, plan, results, averaged=sweep)
    for r in results:
        s = r.summary
        print(f"{s.algorithm:12s} N={s.N:<4d} pm={s.pm:<10.6g} rho={s.rho:<5g} "
              f"eps={s.epsilon:<7d} fbg={s.fbg:.4f} sd={s.fbg_std:.4f}")
    return EXIT_OK


def _cmd_compare(args):
    summaries = [s for path in args.results for s in load_results(path)]
    names = list(dict.fromkeys(s.algorithm for s in summaries))
    first = args.first or (names[0] if names else None)
    if first not in names:
        raise ConfigError(f"algorithm {first!r} not found in results; have {names}")
    opponents = args.opponent or [n for n in names if n != first]
    if not opponents:
        raise ConfigError("need at least one opponent algorithm")
    prefix = f"{args.label}/" if args.label else ""
    table = compare(summaries, first, opponents, paired=args.paired_ttest, row_prefix=prefix)
    test = "paired" if args.paired_ttest else "pooled"
    header = defaults_header(extra=[f"compare: {first} vs {', '.join(opponents)}; grid test {test}",
                                    "best pm chosen per epsilon by averaged fbg over that epsilon's rho values"])
    text = table.to_text()
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "verdicts.csv"), "w") as fh:
            table.to_csv(fh, header)
        with open(os.path.join(args.out, "verdicts.txt"), "w") as fh:
            for line in header:
                fh.write(f"# {line}\n")
            fh.write(text)
    sys.stdout.write(text)
    return EXIT_OK


def _cmd_replay(args):
    plan = _load(args)
    cells = [c for c in plan.cells() if args.algorithm in (None, c.name)]
    if args.rho is not None:
        cells = [c for c in cells if c.rho == args.rho]
    if args.epsilon is not None:
        cells = [c for c in cells if c.epsilon == args.epsilon]
    if not cells:
        raise ConfigError("no plan cell matches the replay selection")
    cell = cells[0]
    seed = args.seed if args.seed is not None else plan.seeds[0]
    est, env = run_single(plan.problem, cell, seed, return_env=True)
    header = defaults_header(plan, extra=[f"replay: {cell.slug} seed={seed}"])
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        stem = os.path.join(args.out, f"{cell.slug}_seed{seed}")
        with open(stem + ".csv", "w") as fh:
            est.trace_.to_csv(fh, header)
        write_masks(stem + ".masks", env.mask_history, header)
        print(f"wrote {stem}.csv and {stem}.masks")
    else:
        est.trace_.to_csv(sys.stdout, header)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="trapga", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def plan_args(p, out_required=True):
        p.add_argument("--plan", required=True, help="YAML experiment plan")
        p.add_argument("--out", required=out_required, help="output directory")
        p.add_argument("--seed-base", type=int, default=None,
                       help="use seeds seed_base..seed_base+runs-1 instead of the plan's")

    for name, helptext in (("run", "run one plan (single N and pm per algorithm)"),
                           ("sweep", "run the full N x pm x scenario grid")):
        p = sub.add_parser(name, help=helptext)
        plan_args(p)
        p.add_argument("--jobs", type=int, default=1, help="worker processes")

    p = sub.add_parser("compare", help="verdict grid from result directories")
    p.add_argument("results", nargs="+", help="result directories or runs.csv files")
    p.add_argument("--first", help="algorithm reported as + when better (default: first found)")
    p.add_argument("--opponent", action="append", help="opponent algorithm (repeatable)")
    p.add_argument("--label", default="", help="row label prefix, e.g. order-3")
    p.add_argument("--paired-ttest", action="store_true", help="paired test for the grid")
    p.add_argument("--out", help="directory for verdicts.csv / verdicts.txt")

    p = sub.add_parser("replay", help="one seed with a full trace and mask sidecar")
    plan_args(p, out_required=False)
    p.add_argument("--algorithm", help="algorithm name or label (default: first)")
    p.add_argument("--seed", type=int, default=None, help="seed (default: first plan seed)")
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--epsilon", type=int, default=None)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    handler = {
        "run": _cmd_run,
        "sweep": lambda a: _cmd_run(a, sweep=True),
        "compare": _cmd_compare,
        "replay": _cmd_replay,
    }[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"trapga: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - any failure mid-run maps to exit 3
        print(f"trapga: runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
