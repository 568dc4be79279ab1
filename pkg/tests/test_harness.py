import filecmp
import io
import os

import numpy as np
import pytest
import yaml

from trapga._validation import ConfigError
from trapga.harness import (
    compare,
    load_plan,
    load_results,
    parse_plan,
    pm_ladder,
    run_scenario,
    run_single,
    run_sweep,
    select_best_pm,
)
from trapga.harness.cli import main
from trapga.harness.plan import Cell, resolve_pm
from trapga.harness.runner import HOLE, mask_sequence, write_results
from trapga.metrics import ScenarioSummary
from trapga.traps import ConcatTrapProblem

P3 = ConcatTrapProblem.canonical(3)


def base_plan(**over):
    raw = {
        "problem": {"order": 3, "blocks": 10},
        "scenarios": {"rho": [0.3, 0.95], "epsilon": [300], "periods": 3},
        "runs": 3,
        "algorithms": [{"algo": "admga", "N": 30, "pm": "1/L"}, {"algo": "ssga", "N": 30, "pm": "2/L"}],
    }
    raw.update(over)
    return raw


def write_plan(tmp_path, raw, name="plan.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(raw))
    return str(path)


# plans ------------------------------------------------------------------


def test_pm_ladder_for_l30():
    assert pm_ladder(30) == pytest.approx([1 / 480, 1 / 240, 1 / 120, 1 / 60, 1 / 30, 2 / 30, 4 / 30])
    assert resolve_pm("ladder", 30) == pm_ladder(30)


@pytest.mark.parametrize("text,value", [("1/L", 1 / 30), ("2/L", 2 / 30), ("1/(16L)", 1 / 480),
                                        ("1/(16*L)", 1 / 480), (0.025, 0.025), ("0.5/L", 1 / 60)])
def test_pm_expressions(text, value):
    assert resolve_pm(text, 30) == [pytest.approx(value)]


@pytest.mark.parametrize("bad", ["import os", "L**2", "2*L", True, None])
def test_bad_pm(bad):
    with pytest.raises(ConfigError):
        resolve_pm(bad, 30)


def test_plan_defaults_and_cells():
    plan = parse_plan(base_plan())
    assert plan.seeds == (1, 2, 3) and plan.periods == 3
    cells = list(plan.cells())
    assert len(cells) == 4
    assert cells[0] == Cell("admga", 30, 1 / 30, 0.3, 300, 3)
    assert plan.with_seed_base(10).seeds == (10, 11, 12)
    assert parse_plan(base_plan(seeds=[5, 9])).seeds == (5, 9)


def test_sweep_row_count():
    raw = base_plan(algorithms=[{"algo": "gga", "N": [30, 60], "pm": "ladder"},
                                {"algo": "riga_worst", "N": 30, "pm": ["1/L", "2/L"], "rr": 2}])
    raw["scenarios"] = {"rho": [0.05, 0.3, 0.6, 0.95], "epsilon": [600, 1200], "periods": 2}
    plan = parse_plan(raw)
    assert len(list(plan.cells())) == (2 * 7 + 2) * 8
    with pytest.raises(ConfigError):
        plan.require_single_configuration()


def test_parameter_alias_and_labels():
    raw = base_plan(algorithms=[{"algo": "admga", "initial_threshold_mode": "static", "label": "admga_s"},
                                {"algo": "admga"}])
    plan = parse_plan(raw)
    assert dict(plan.algorithms[0].params) == {"mode": "static"}
    assert [c.name for c in plan.cells()][:1] == ["admga_s"]


def test_explicit_trap_parameters():
    raw = base_plan(problem={"order": 3, "blocks": 4, "canonical": False, "a": 2, "b": 3, "z": 2})
    plan = parse_plan(raw)
    assert plan.problem.length == 12
    with pytest.raises(ConfigError):
        parse_plan(base_plan(problem={"order": 3, "a": 2}))
    with pytest.raises(ConfigError):
        parse_plan(base_plan(problem={"order": 3, "canonical": True, "a": 2, "b": 3, "z": 2}))


@pytest.mark.parametrize("over", [
    {"algorithms": [{"algo": "chc"}]},
    {"algorithms": [{"algo": "gga", "N": 7}]},
    {"algorithms": [{"algo": "gga", "bogus": 1}]},
    {"algorithms": []},
    {"algorithms": [{"algo": "gga"}, {"algo": "gga"}]},
    {"scenarios": {"rho": [1.5], "epsilon": [300]}},
    {"scenarios": {"rho": [0.3]}},
    {"problem": None},
    {"runs": 0},
])
def test_plan_rejections(over):
    with pytest.raises(ConfigError):
        parse_plan(base_plan(**over))


def test_indivisible_epsilon_names_both_values():
    with pytest.raises(ConfigError, match="epsilon=300.*N=40"):
        parse_plan(base_plan(algorithms=[{"algo": "gga", "N": 40}]))


def test_load_plan_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_plan(tmp_path / "missing.yaml")
    bad = tmp_path / "bad.yaml"
    bad.write_text("problem: [unclosed")
    with pytest.raises(ConfigError):
        load_plan(bad)


# runs -------------------------------------------------------------------


def test_run_single_generation_count():
    cell = Cell("gga", 30, 1 / 30, 0.3, 2400, 10)
    trace = run_single(P3, cell, 1)
    assert len(trace) == 800 and trace.evaluations[-1] == 24000
    assert trace.best_fitness.max() <= 30


def test_streams_are_shared_across_algorithms():
    a, env_a = run_single(P3, Cell("gga", 30, 0.03, 0.6, 300, 4), 3, return_env=True)
    b, env_b = run_single(P3, Cell("admga", 30, 0.05, 0.6, 300, 4), 3, return_env=True)
    assert np.array_equal(env_a.mask_history, env_b.mask_history)
    assert np.array_equal(env_a.mask_history, mask_sequence(30, 0.6, 300, 4, 3))


def test_run_scenario_summary_and_jobs():
    cell = Cell("ssga", 30, 1 / 30, 0.3, 300, 3)
    one = run_scenario(P3, cell, (1, 2, 3))
    two = run_scenario(P3, cell, (1, 2, 3), jobs=2)
    assert one.summary.fbg == two.summary.fbg
    assert np.array_equal(one.plot, two.plot)
    assert len(one.traces) == 3 and one.plot.shape == (30, 3)
    assert np.all(one.plot[:, 1] <= one.plot[:, 0]) and np.all(one.plot[:, 0] <= one.plot[:, 2])
    assert run_scenario(P3, cell, (1, 2), keep_traces=False).traces is None


def test_single_cell_sweep_equals_run_scenario():
    plan = parse_plan(base_plan(algorithms=[{"algo": "gga"}],
                                scenarios={"rho": [0.3], "epsilon": [300], "periods": 3}))
    (res,) = run_sweep(plan)
    direct = run_scenario(plan.problem, next(plan.cells()), plan.seeds)
    assert res.summary.fbg == direct.summary.fbg
    assert np.array_equal(res.summary.run_means, direct.summary.run_means)


# comparison -------------------------------------------------------------


def _summary(alg, pm, rho, eps, means, seeds=None):
    means = np.asarray(means, float)
    seeds = tuple(range(1, len(means) + 1)) if seeds is None else seeds
    return ScenarioSummary(alg, 30, pm, rho, eps, float(means.mean()), means, seeds)


def test_select_best_pm():
    s = [_summary("a", 0.1, 0.3, 600, [1, 2]), _summary("a", 0.1, 0.6, 600, [1, 2]),
         _summary("a", 0.2, 0.3, 600, [3, 4]), _summary("a", 0.2, 0.6, 600, [0, 1]),
         _summary("a", 0.4, 0.3, 600, [1, 2]), _summary("a", 0.4, 0.6, 600, [1, 2])]
    best = select_best_pm(s)
    # averages: 0.1 -> 1.5, 0.2 -> 2.0, 0.4 -> 1.5
    assert best[("a", 30, 600)] == (0.2, pytest.approx(2.0))


def test_compare_self_is_all_tilde():
    rng = np.random.default_rng(0)
    s = [_summary("x", 0.1, r, e, rng.normal(20, 1, 10)) for r in (0.3, 0.6) for e in (600, 1200)]
    twin = [ScenarioSummary("y", v.N, v.pm, v.rho, v.epsilon, v.fbg, v.run_means, v.seeds) for v in s]
    table = compare(s + twin, "x", ["y"])
    assert table.verdicts() == ["~"] * 4
    assert compare(s + twin, "x", ["y"], paired=True).verdicts() == ["~"] * 4


def test_compare_signs_antisymmetry_and_holes():
    rng = np.random.default_rng(1)
    good = [_summary("a", 0.1, r, 600, rng.normal(25, 0.5, 10)) for r in (0.3, 0.6)]
    bad = [_summary("b", 0.1, 0.3, 600, rng.normal(20, 0.5, 10))]
    t = compare(good + bad, "a", ["b"], row_prefix="order-3/")
    assert t.rows == ["order-3/b"]
    assert t.cell("order-3/b", 600, 0.3).verdict == "+"
    hole = t.cell("order-3/b", 600, 0.6)
    assert hole.missing and hole.verdict == HOLE
    assert compare(good + bad, "b", ["a"]).cell("a", 600, 0.3).verdict == "-"
    buf = io.StringIO()
    t.to_csv(buf, ["hdr"])
    text = buf.getvalue()
    assert text.startswith("# hdr\nrow,first,opponent")
    assert text.strip().endswith(",".join([HOLE] * 13))
    grid = t.to_text().splitlines()
    assert grid[1].split()[-2:] == ["+", HOLE]
    with pytest.raises(ConfigError):
        compare(good, "zzz", ["a"])


def test_paired_needs_matching_seeds():
    a = _summary("a", 0.1, 0.3, 600, [1, 2, 3], seeds=(1, 2, 3))
    b = _summary("b", 0.1, 0.3, 600, [1, 2, 3], seeds=(4, 5, 6))
    e = compare([a, b], "a", ["b"], paired=True).cell("b", 600, 0.3)
    assert e.pooled is not None and e.paired is None and e.verdict == HOLE


# files and CLI ----------------------------------------------------------


def test_results_round_trip(tmp_path):
    plan = parse_plan(base_plan())
    results = run_sweep(plan)
    write_results(tmp_path, plan, results)
    back = {(s.algorithm, s.rho): s for s in load_results(tmp_path)}
    for r in results:
        s = back[(r.summary.algorithm, r.summary.rho)]
        assert s.fbg == pytest.approx(r.summary.fbg, rel=1e-14)
        assert np.array_equal(s.run_means, r.summary.run_means)
        assert s.seeds == r.summary.seeds
    (tmp_path / "junk.csv").write_text("a,b\n1,2\n")
    with pytest.raises(ConfigError):
        load_results(tmp_path / "junk.csv")


def test_cli_run_outputs(tmp_path, capsys):
    raw = base_plan(output={"traces": True, "masks": True})
    plan = write_plan(tmp_path, raw)
    out = tmp_path / "out"
    assert main(["run", "--plan", plan, "--out", str(out)]) == 0
    summary = (out / "summary.csv").read_text().splitlines()
    header = [ln for ln in summary if ln.startswith("#")]
    assert any("flip_count" in ln for ln in header) and any("rr:" in ln for ln in header)
    assert any("selection" in ln for ln in header)
    body = [ln for ln in summary if not ln.startswith("#")]
    assert body[0] == "algorithm,N,pm,rho,epsilon,fbg_mean,fbg_std_across_runs"
    assert len(body) == 5
    plot = (out / "plot" / "admga_N30_pm0.0333333_rho0.3_eps300.dat").read_text().splitlines()
    data = [ln for ln in plot if not ln.startswith("#")]
    assert data[0] == "generation best_fitness_mean best_fitness_min best_fitness_max"
    assert len(data) == 31
    trace = (out / "traces" / "admga_N30_pm0.0333333_rho0.3_eps300" / "seed1.csv").read_text()
    assert "generation,evaluations,period,best_fitness,mean_fitness,threshold,diversity" in trace
    masks = [ln for ln in (out / "masks" / "rho0.3_eps300_seed2.txt").read_text().splitlines()
             if not ln.startswith("#")]
    assert len(masks) == 3 and masks[0] == "0" * 30
    assert "fbg=" in capsys.readouterr().out


def test_cli_outputs_are_byte_identical(tmp_path):
    plan = write_plan(tmp_path, base_plan(output={"traces": True}))
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", "--plan", plan, "--out", str(a)]) == 0
    assert main(["run", "--plan", plan, "--out", str(b), "--jobs", "2"]) == 0
    cmp = filecmp.dircmp(a, b)
    files = []
    for root, _, names in os.walk(a):
        files += [os.path.relpath(os.path.join(root, n), a) for n in names]
    assert files
    for rel in files:
        assert (a / rel).read_bytes() == (b / rel).read_bytes(), rel
    assert not cmp.left_only and not cmp.right_only


def test_cli_seed_base(tmp_path):
    plan = write_plan(tmp_path, base_plan())
    main(["run", "--plan", plan, "--out", str(tmp_path / "o"), "--seed-base", "100"])
    runs = (tmp_path / "o" / "runs.csv").read_text()
    assert ",100," in runs and ",102," in runs and "seeds: 100 101 102" in runs


def test_cli_sweep_compare_replay(tmp_path, capsys):
    raw = base_plan(algorithms=[{"algo": "admga", "pm": ["1/L", "2/L"]}, {"algo": "gga", "pm": "1/L"}])
    plan = write_plan(tmp_path, raw)
    assert main(["run", "--plan", plan, "--out", str(tmp_path / "x")]) == 2
    sw = tmp_path / "sweep"
    assert main(["sweep", "--plan", plan, "--out", str(sw)]) == 0
    averaged = [ln for ln in (sw / "averaged.csv").read_text().splitlines() if not ln.startswith("#")]
    assert averaged[0] == "algorithm,N,pm,epsilon,averaged_fbg" and len(averaged) == 4
    capsys.readouterr()
    cmp_dir = tmp_path / "cmp"
    assert main(["compare", str(sw), "--first", "admga", "--label", "order-3",
                 "--out", str(cmp_dir)]) == 0
    grid = capsys.readouterr().out
    assert "order-3/gga" in grid
    assert (cmp_dir / "verdicts.csv").exists() and (cmp_dir / "verdicts.txt").exists()
    assert main(["compare", str(sw), "--paired-ttest"]) == 0
    assert main(["compare", str(sw), "--first", "nope"]) == 2
    assert main(["compare", str(tmp_path / "nothing")]) == 2

    rp = tmp_path / "rp"
    assert main(["replay", "--plan", plan, "--algorithm", "gga", "--seed", "2",
                 "--rho", "0.95", "--out", str(rp)]) == 0
    names = sorted(os.listdir(rp))
    assert names == ["gga_N30_pm0.0333333_rho0.95_eps300_seed2.csv",
                     "gga_N30_pm0.0333333_rho0.95_eps300_seed2.masks"]
    capsys.readouterr()
    assert main(["replay", "--plan", plan]) == 0
    assert "generation,evaluations" in capsys.readouterr().out
    assert main(["replay", "--plan", plan, "--algorithm", "pamga"]) == 2


def test_cli_exit_codes(tmp_path, monkeypatch):
    assert main(["run", "--plan", str(tmp_path / "none.yaml"), "--out", str(tmp_path)]) == 2
    plan = write_plan(tmp_path, base_plan())
    assert main(["run", "--plan", plan, "--out", str(tmp_path / "o"), "--jobs", "0"]) == 2

    def boom(*a, **k):
        raise RuntimeError("disk on fire")

    monkeypatch.setattr("trapga.harness.cli.run_sweep", boom)
    assert main(["run", "--plan", plan, "--out", str(tmp_path / "o")]) == 3
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


@pytest.mark.parametrize("name", ["example.yaml", "table1_order3.yaml"])
def test_shipped_plans_parse(name):
    path = os.path.join(os.path.dirname(__file__), os.pardir, "docs", "plans", name)
    plan = load_plan(path)
    assert plan.runs == 30 and plan.periods == 10
