"""Experiment plans: YAML files describing problem, scenarios and algorithms.

Example::

    problem: {order: 3, blocks: 10}
    scenarios:
      rho: [0.05, 0.3, 0.6, 0.95]
      epsilon: [2400, 24000, 48000]
      periods: 10
    runs: 30
    seed_base: 1
    algorithms:
      - {algo: admga, N: 30, pm: ladder}
      - {algo: ssga, N: [30, 60], pm: ["1/L", "2/L"]}

``pm`` accepts numbers, arithmetic in ``L`` such as ``"1/(16*L)"``, or
``ladder`` for the doubling ladder from ``1/(16L)`` to ``4/L``.
"""

import ast
import itertools
import operator
import re
from dataclasses import dataclass, field

import yaml

from .._validation import ConfigError
from ..algorithms import ALGORITHMS
from ..dynenv import DynamicsSpec
from ..traps import ConcatTrapProblem, TrapSpec

__all__ = [
    "AlgorithmSpec",
    "Cell",
    "ExperimentPlan",
    "load_plan",
    "parse_plan",
    "pm_ladder",
    "resolve_pm",
]

# keys consumed by the harness itself; everything else goes to the estimator
_HARNESS_KEYS = {"algo", "N", "pm", "label"}
_PARAM_ALIASES = {"initial_threshold_mode": "mode"}

_OPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
}


def pm_ladder(length):
    """Doubling ladder ``1/(16L), 1/(8L), ..., 1/L, 2/L, 4/L``."""
    return [2.0**e / length for e in range(-4, 3)]


def _eval_expr(node, length):
    if isinstance(node, ast.Expression):
        return _eval_expr(node.body, length)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return float(node.value)
    if isinstance(node, ast.Name) and node.id == "L":
        return float(length)
    if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
        return _OPS[type(node.op)](_eval_expr(node.left, length), _eval_expr(node.right, length))
    raise ConfigError(f"unsupported pm expression element: {ast.dump(node)}")


def resolve_pm(value, length):
    """Turn a pm entry into a list of probabilities."""
    if isinstance(value, str) and value.strip().lower() == "ladder":
        return pm_ladder(length)
    if isinstance(value, (list, tuple)):
        return [p for v in value for p in resolve_pm(v, length)]
    if isinstance(value, str):
        # allow "1/(16L)" as shorthand for "1/(16*L)"
        text = re.sub(r"(?<=[\d)])\s*L", "*L", value)
        try:
            tree = ast.parse(text, mode="eval")
        except SyntaxError as exc:
            raise ConfigError(f"cannot parse pm {value!r}") from exc
        pm = _eval_expr(tree, length)
    elif isinstance(value, (int, float)) and not isinstance(value, bool):
        pm = float(value)
    else:
        raise ConfigError(f"cannot interpret pm {value!r}")
    if not 0.0 <= pm <= 1.0:
        raise ConfigError(f"pm {value!r} evaluates to {pm}, outside [0, 1]")
    return [pm]


def _as_list(value):
    return list(value) if isinstance(value, (list, tuple)) else [value]


@dataclass(frozen=True)
class Cell:
    """One fully specified configuration: algorithm, parameters, scenario."""

    algorithm: str
    N: int
    pm: float
    rho: float
    epsilon: int
    periods: int
    params: tuple = ()
    label: str = ""

    @property
    def name(self):
        return self.label or self.algorithm

    @property
    def dynamics(self):
        return DynamicsSpec(self.rho, self.epsilon, self.periods)

    @property
    def slug(self):
        return f"{self.name}_N{self.N}_pm{self.pm:.6g}_rho{self.rho:g}_eps{self.epsilon}"

    def estimator_params(self):
        return {**dict(self.params), "population_size": self.N, "pm": self.pm}


@dataclass(frozen=True)
class AlgorithmSpec:
    algorithm: str
    N: tuple
    pm: tuple
    params: tuple = ()
    label: str = ""

    @property
    def name(self):
        return self.label or self.algorithm


@dataclass(frozen=True)
class ExperimentPlan:
    problem: ConcatTrapProblem
    scenarios: tuple
    periods: int
    seeds: tuple
    algorithms: tuple
    options: dict = field(default_factory=dict, compare=False)

    @property
    def runs(self):
        return len(self.seeds)

    def cells(self):
        """Every (algorithm, N, pm, scenario) combination, in plan order."""
        for spec in self.algorithms:
            for n, pm in itertools.product(spec.N, spec.pm):
                for rho, eps in self.scenarios:
                    yield Cell(spec.algorithm, n, pm, rho, eps, self.periods, spec.params, spec.label)

    def check_divisibility(self):
        for cell in self.cells():
            if cell.epsilon % cell.N:
                raise ConfigError(
                    f"epsilon={cell.epsilon} is not divisible by N={cell.N}; "
                    "periods must hold a whole number of generations"
                )

    def require_single_configuration(self):
        for spec in self.algorithms:
            if len(spec.N) != 1 or len(spec.pm) != 1:
                raise ConfigError(
                    f"algorithm {spec.name!r} lists several N or pm values; use 'sweep'"
                )

    def with_seed_base(self, seed_base):
        seeds = tuple(range(seed_base, seed_base + self.runs))
        return ExperimentPlan(self.problem, self.scenarios, self.periods, seeds, self.algorithms, self.options)


def _parse_problem(raw):
    if not isinstance(raw, dict) or "order" not in raw:
        raise ConfigError("plan needs a 'problem' mapping with at least 'order'")
    order = int(raw["order"])
    blocks = int(raw.get("blocks", 10))
    explicit = {k: raw[k] for k in ("a", "b", "z") if k in raw}
    if raw.get("canonical", not explicit):
        if explicit:
            raise ConfigError("give either canonical: true or explicit a/b/z, not both")
        spec = TrapSpec.canonical(order)
    else:
        if set(explicit) != {"a", "b", "z"}:
            raise ConfigError("explicit trap parameters need all of a, b and z")
        spec = TrapSpec(order, float(explicit["a"]), float(explicit["b"]), int(explicit["z"]))
    return ConcatTrapProblem(spec, blocks)


def _parse_scenarios(raw):
    if not isinstance(raw, dict):
        raise ConfigError("plan needs a 'scenarios' mapping")
    periods = int(raw.get("periods", 10))
    if "pairs" in raw:
        pairs = [(float(r), int(e)) for r, e in raw["pairs"]]
    else:
        if "rho" not in raw or "epsilon" not in raw:
            raise ConfigError("scenarios need 'rho' and 'epsilon' lists, or 'pairs'")
        pairs = [(float(r), int(e)) for e in _as_list(raw["epsilon"]) for r in _as_list(raw["rho"])]
    if not pairs:
        raise ConfigError("no scenarios given")
    for rho, eps in pairs:
        DynamicsSpec(rho, eps, periods)
    return tuple(pairs), periods


def _parse_algorithm(raw, length):
    if not isinstance(raw, dict) or "algo" not in raw:
        raise ConfigError(f"algorithm entries need an 'algo' key, got {raw!r}")
    name = raw["algo"]
    if name not in ALGORITHMS:
        raise ConfigError(f"unknown algorithm {name!r}; known: {sorted(ALGORITHMS)}")
    sizes = tuple(int(n) for n in _as_list(raw.get("N", 30)))
    pms = tuple(resolve_pm(raw.get("pm", "1/L"), length))
    params = {}
    for key, value in raw.items():
        if key in _HARNESS_KEYS:
            continue
        params[_PARAM_ALIASES.get(key, key)] = value
    cls, fixed = ALGORITHMS[name]
    known = cls().get_params()
    for key in params:
        if key not in known or key in ("population_size", "pm", "random_state"):
            raise ConfigError(f"{name} has no plan parameter {key!r}")
    return AlgorithmSpec(name, sizes, pms, tuple(sorted(params.items())), str(raw.get("label", "")))


def parse_plan(raw):
    """Build an :class:`ExperimentPlan` from an already-loaded mapping."""
    if not isinstance(raw, dict):
        raise ConfigError("a plan must be a mapping")
    problem = _parse_problem(raw.get("problem"))
    scenarios, periods = _parse_scenarios(raw.get("scenarios"))
    if "seeds" in raw:
        seeds = tuple(int(s) for s in raw["seeds"])
    else:
        runs = int(raw.get("runs", 30))
        base = int(raw.get("seed_base", 1))
        seeds = tuple(range(base, base + runs))
    if not seeds:
        raise ConfigError("plan needs at least one run")
    algos = raw.get("algorithms")
    if not algos:
        raise ConfigError("plan needs a non-empty 'algorithms' list")
    algorithms = tuple(_parse_algorithm(a, problem.length) for a in algos)
    names = [a.name for a in algorithms]
    if len(set(names)) != len(names):
        raise ConfigError(f"algorithm names must be unique (use 'label'): {names}")
    plan = ExperimentPlan(problem, scenarios, periods, seeds, algorithms, dict(raw.get("output", {})))
    plan.check_divisibility()
    return plan


def load_plan(path):
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read plan {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"plan {path} is not valid YAML: {exc}") from exc
    return parse_plan(raw)
