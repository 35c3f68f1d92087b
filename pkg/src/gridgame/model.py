"""Problem data for shared-battery demand scheduling.

A group of consumers draws power from the grid and from a jointly owned
battery that is charged by an uncertain renewable source.  Every uncertain
quantity (per-agent demand, renewable infeed) is a bounded random variable
described by its support and mean; nothing in the pipeline ever needs the
full distribution beyond that.

This module owns the configuration schema: frozen dataclasses, YAML load /
dump with exact round-trip, structural validation, and scenario sampling.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Any, Iterable

import numpy as np
import yaml

__all__ = [
    "BoundedRV",
    "DependencyGraph",
    "BatteryParams",
    "ChanceSpec",
    "TariffCostParams",
    "SolverSettings",
    "ExperimentSettings",
    "MicrogridConfig",
    "ScenarioDraw",
    "ValidationReport",
    "ConfigError",
    "load_config",
    "config_to_dict",
    "dump_config",
    "validate",
    "sample_scenario",
    "sample_scenarios",
    "draw_with_rng",
]


class ConfigError(ValueError):
    """Raised when a config file cannot be parsed into a MicrogridConfig."""


@dataclass(frozen=True)
class BoundedRV:
    """Bounded random variable given by its support and mean.

    Sampling is uniform on [lower, upper]; a degenerate support
    (lower == upper) is a point mass.  The mean is stored explicitly so a
    profile can be specified mean-first and so non-centered supports are
    representable.
    """

    lower: float
    upper: float
    mean: float

    @property
    def width(self) -> float:
        """Support width (upper - lower), the quantity concentration bounds use."""
        return self.upper - self.lower


@dataclass(frozen=True)
class DependencyGraph:
    """Undirected dependency structure over a set of random variables.

    Nodes are integers 0..node_count-1; an edge (i, j) states that variables
    i and j may be statistically dependent.  No edge means independence is
    assumed.  Edges are stored sorted and deduplicated so equality is
    structural.
    """

    node_count: int
    edges: tuple[tuple[int, int], ...] = ()

    @staticmethod
    def from_edges(node_count: int, edges: Iterable[tuple[int, int]]) -> "DependencyGraph":
        normal = sorted({(min(i, j), max(i, j)) for i, j in edges})
        return DependencyGraph(node_count=node_count, edges=tuple(normal))

    def neighbors(self, node: int) -> tuple[int, ...]:
        out = [j for i, j in self.edges if i == node]
        out += [i for i, j in self.edges if j == node]
        return tuple(sorted(out))

    def induced_prefix(self, count: int) -> "DependencyGraph":
        """Subgraph induced by nodes 0..count-1 (used for horizon prefixes)."""
        kept = tuple((i, j) for i, j in self.edges if i < count and j < count)
        return DependencyGraph(node_count=count, edges=kept)


@dataclass(frozen=True)
class BatteryParams:
    """Shared battery: normalized state of charge in [0, 1] scale."""

    x0: float  # initial state of charge
    x_min: float  # lower state-of-charge bound
    x_max: float  # upper state-of-charge bound
    capacity: float  # energy capacity, same units as power * dt
    dt: float = 1.0  # slot length
    eta: float | None = None  # SoC change per unit energy; default 1/capacity
    u_max: float | None = None  # per-agent discharge cap; default capacity/(agents*dt)

    @property
    def eta_eff(self) -> float:
        return self.eta if self.eta is not None else 1.0 / self.capacity

    @property
    def rho(self) -> float:
        """SoC change per unit of net power sustained for one slot."""
        return self.eta_eff * self.dt


@dataclass(frozen=True)
class ChanceSpec:
    """Reliability targets for the probabilistic constraints.

    Each delta is the allowed violation probability of the corresponding
    constraint; the *_tilde value is the share of that budget assigned to the
    lower tail (the remainder delta - delta_tilde goes to the upper tail).
    All are per-time-slot tuples except the terminal pair.  nu_* are the
    dependency coefficients of the concentration bound (chi_hat / 2); None
    means derive them from the dependency graphs.
    """

    delta_x: tuple[float, ...]  # state-of-charge band, per slot
    delta_x_tilde: tuple[float, ...]
    delta_final: float  # terminal state-of-charge window
    delta_final_tilde: float
    delta_g: tuple[float, ...]  # grid exchange band, per slot
    delta_g_tilde: tuple[float, ...]
    r_target: float  # terminal state-of-charge target
    epsilon: float  # half-width of the terminal window
    g_max: float  # grid exchange upper bound
    nu_r: tuple[float, ...] | None = None  # renewable dependency coefficients
    nu_d: tuple[float, ...] | None = None  # demand dependency coefficients


@dataclass(frozen=True)
class TariffCostParams:
    """Billing model: time-of-use price, congestion surcharge, battery wear."""

    k_tou: tuple[float, ...]  # time-of-use price per slot
    k_c: float  # congestion surcharge coefficient on aggregate grid load
    alpha_dch: float  # quadratic discharge wear coefficient
    beta_dch: float  # linear discharge wear coefficient


@dataclass(frozen=True)
class SolverSettings:
    """Solver tuning; None fields are derived from the problem data."""

    variant: str = "consistent"  # "consistent" or "literal" agent update
    zeta: float | None = None  # strong-monotonicity modulus to certify
    l_f: float | None = None  # configured Lipschitz constant (certified bound wins)
    alpha: tuple[float, ...] | None = None  # per-agent primal steps
    gamma: float | None = None  # dual step
    tol_u: float = 1e-6  # stop when the primal iterate moves less than this
    tol_lambda: float = 1e-6  # stop when the dual iterate moves less than this
    max_iters: int = 100_000


@dataclass(frozen=True)
class ExperimentSettings:
    """Monte Carlo and logging settings for the experiment pipeline."""

    seed: int = 0
    samples_validate: int = 100_000  # scenarios for violation-rate estimation
    samples_histogram: int = 1_000  # paired scenarios for cost comparison
    log_stride: int = 100  # iteration log thinning


@dataclass(frozen=True)
class MicrogridConfig:
    """Complete immutable problem instance."""

    n_agents: int
    horizon: int
    battery: BatteryParams
    chance: ChanceSpec
    tariff: TariffCostParams
    renewable: tuple[BoundedRV, ...]  # one per slot
    demand: tuple[tuple[BoundedRV, ...], ...]  # agents x horizon
    renewable_dependency: DependencyGraph  # over time slots
    demand_dependency: DependencyGraph  # over agents
    solver: SolverSettings = SolverSettings()
    experiment: ExperimentSettings = ExperimentSettings()

    @property
    def u_max(self) -> float:
        """Per-agent discharge cap, defaulted so the group cannot exceed the
        battery's full energy content in one slot."""
        if self.battery.u_max is not None:
            return self.battery.u_max
        return self.battery.capacity / (self.n_agents * self.battery.dt)

    def renewable_means(self) -> np.ndarray:
        return np.array([rv.mean for rv in self.renewable], dtype=float)

    def renewable_widths(self) -> np.ndarray:
        return np.array([rv.width for rv in self.renewable], dtype=float)

    def demand_means(self) -> np.ndarray:
        return np.array([[rv.mean for rv in row] for row in self.demand], dtype=float)

    def demand_widths(self) -> np.ndarray:
        return np.array([[rv.width for rv in row] for row in self.demand], dtype=float)

    def demand_lowers(self) -> np.ndarray:
        return np.array([[rv.lower for rv in row] for row in self.demand], dtype=float)

    def demand_uppers(self) -> np.ndarray:
        return np.array([[rv.upper for rv in row] for row in self.demand], dtype=float)


@dataclass(frozen=True)
class ScenarioDraw:
    """One joint realization of all uncertain inputs."""

    renewable: np.ndarray  # shape (horizon,)
    demand: np.ndarray  # shape (agents, horizon)


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of structural validation; violations name the offending keys."""

    valid: bool
    violations: tuple[str, ...]


# ---------------------------------------------------------------------------
# YAML schema


def _require(mapping: dict, key: str, where: str) -> Any:
    if key not in mapping:
        raise ConfigError(f"missing key '{key}' in {where}")
    return mapping[key]


def _as_float_tuple(value: Any, length: int, where: str) -> tuple[float, ...]:
    """Accept a scalar (replicated) or a list of the exact length."""
    if isinstance(value, (int, float)):
        return (float(value),) * length
    if isinstance(value, (list, tuple)):
        if len(value) != length:
            raise ConfigError(f"{where}: expected {length} entries, got {len(value)}")
        return tuple(float(v) for v in value)
    raise ConfigError(f"{where}: expected number or list, got {type(value).__name__}")


def _profile_to_rvs(spec: Any, length: int, where: str) -> tuple[BoundedRV, ...]:
    """Parse one uncertain profile.

    Two forms are accepted:
      {mean: [...], deviation: frac}    support = mean * (1 +- frac)
      {lower: [...], upper: [...]}      with optional mean (default midpoint)
    """
    if not isinstance(spec, dict):
        raise ConfigError(f"{where}: expected a mapping")
    if "mean" in spec and "deviation" in spec:
        means = _as_float_tuple(spec["mean"], length, f"{where}.mean")
        devs = _as_float_tuple(spec["deviation"], length, f"{where}.deviation")
        out = []
        for m, f in zip(means, devs):
            half = abs(m) * f
            out.append(BoundedRV(lower=m - half, upper=m + half, mean=m))
        return tuple(out)
    if "lower" in spec and "upper" in spec:
        lows = _as_float_tuple(spec["lower"], length, f"{where}.lower")
        ups = _as_float_tuple(spec["upper"], length, f"{where}.upper")
        if "mean" in spec:
            means = _as_float_tuple(spec["mean"], length, f"{where}.mean")
        else:
            means = tuple(0.5 * (a + b) for a, b in zip(lows, ups))
        return tuple(BoundedRV(lower=a, upper=b, mean=m) for a, b, m in zip(lows, ups, means))
    raise ConfigError(f"{where}: need either mean+deviation or lower+upper")


def _edges_from_list(value: Any, where: str) -> list[tuple[int, int]]:
    if value is None:
        return []
    if not isinstance(value, (list, tuple)):
        raise ConfigError(f"{where}: expected a list of [i, j] pairs")
    out = []
    for k, pair in enumerate(value):
        if not isinstance(pair, (list, tuple)) or len(pair) != 2:
            raise ConfigError(f"{where}[{k}]: expected a pair [i, j]")
        out.append((int(pair[0]), int(pair[1])))
    return out


def _config_from_dict(raw: Any, source: str = "<config>") -> MicrogridConfig:
    if not isinstance(raw, dict):
        raise ConfigError(f"{source}: top level must be a mapping")

    agents = int(_require(raw, "agents", source))
    horizon = int(_require(raw, "horizon", source))
    if agents < 1 or horizon < 1:
        raise ConfigError(f"{source}: agents and horizon must be >= 1")

    b = _require(raw, "battery", source)
    battery = BatteryParams(
        x0=float(_require(b, "x0", "battery")),
        x_min=float(_require(b, "x_min", "battery")),
        x_max=float(_require(b, "x_max", "battery")),
        capacity=float(_require(b, "capacity", "battery")),
        dt=float(b.get("dt", 1.0)),
        eta=None if b.get("eta") is None else float(b["eta"]),
        u_max=None if b.get("u_max") is None else float(b["u_max"]),
    )

    c = _require(raw, "chance", source)
    chance = ChanceSpec(
        delta_x=_as_float_tuple(_require(c, "delta_x", "chance"), horizon, "chance.delta_x"),
        delta_x_tilde=_as_float_tuple(
            _require(c, "delta_x_tilde", "chance"), horizon, "chance.delta_x_tilde"
        ),
        delta_final=float(_require(c, "delta_final", "chance")),
        delta_final_tilde=float(_require(c, "delta_final_tilde", "chance")),
        delta_g=_as_float_tuple(_require(c, "delta_g", "chance"), horizon, "chance.delta_g"),
        delta_g_tilde=_as_float_tuple(
            _require(c, "delta_g_tilde", "chance"), horizon, "chance.delta_g_tilde"
        ),
        r_target=float(_require(c, "r_target", "chance")),
        epsilon=float(_require(c, "epsilon", "chance")),
        g_max=float(_require(c, "g_max", "chance")),
        nu_r=None if c.get("nu_r") is None else _as_float_tuple(c["nu_r"], horizon, "chance.nu_r"),
        nu_d=None if c.get("nu_d") is None else _as_float_tuple(c["nu_d"], horizon, "chance.nu_d"),
    )

    t = _require(raw, "tariff", source)
    tariff = TariffCostParams(
        k_tou=_as_float_tuple(_require(t, "k_tou", "tariff"), horizon, "tariff.k_tou"),
        k_c=float(_require(t, "k_c", "tariff")),
        alpha_dch=float(_require(t, "alpha_dch", "tariff")),
        beta_dch=float(_require(t, "beta_dch", "tariff")),
    )

    renewable = _profile_to_rvs(_require(raw, "renewable", source), horizon, "renewable")

    d = _require(raw, "demand", source)
    if isinstance(d, dict) and "agents" in d:
        rows = d["agents"]
        if not isinstance(rows, list) or len(rows) != agents:
            raise ConfigError(f"demand.agents: expected {agents} profiles")
        demand = tuple(
            _profile_to_rvs(row, horizon, f"demand.agents[{i}]") for i, row in enumerate(rows)
        )
    else:
        shared = _profile_to_rvs(d, horizon, "demand")
        demand = tuple(shared for _ in range(agents))

    deps = raw.get("dependencies") or {}
    renewable_dep = DependencyGraph.from_edges(
        horizon, _edges_from_list(deps.get("renewable"), "dependencies.renewable")
    )
    demand_dep = DependencyGraph.from_edges(
        agents, _edges_from_list(deps.get("demand"), "dependencies.demand")
    )

    s = raw.get("solver") or {}
    solver = SolverSettings(
        variant=str(s.get("variant", "consistent")),
        zeta=None if s.get("zeta") is None else float(s["zeta"]),
        l_f=None if s.get("l_f") is None else float(s["l_f"]),
        alpha=None
        if s.get("alpha") is None
        else _as_float_tuple(s["alpha"], agents, "solver.alpha"),
        gamma=None if s.get("gamma") is None else float(s["gamma"]),
        tol_u=float(s.get("tol_u", 1e-6)),
        tol_lambda=float(s.get("tol_lambda", 1e-6)),
        max_iters=int(s.get("max_iters", 100_000)),
    )

    e = raw.get("experiment") or {}
    experiment = ExperimentSettings(
        seed=int(e.get("seed", 0)),
        samples_validate=int(e.get("samples_validate", 100_000)),
        samples_histogram=int(e.get("samples_histogram", 1_000)),
        log_stride=int(e.get("log_stride", 100)),
    )

    return MicrogridConfig(
        n_agents=agents,
        horizon=horizon,
        battery=battery,
        chance=chance,
        tariff=tariff,
        renewable=renewable,
        demand=demand,
        renewable_dependency=renewable_dep,
        demand_dependency=demand_dep,
        solver=solver,
        experiment=experiment,
    )


def load_config(path: str) -> MicrogridConfig:
    """Parse a YAML config file into a MicrogridConfig.

    Raises ConfigError (with the offending key in the message) on schema
    problems; structural value checks live in :func:`validate`.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config '{path}': {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config '{path}': {exc}") from exc
    return _config_from_dict(raw, source=path)


def _rvs_to_dict(rvs: tuple[BoundedRV, ...]) -> dict:
    return {
        "lower": [rv.lower for rv in rvs],
        "upper": [rv.upper for rv in rvs],
        "mean": [rv.mean for rv in rvs],
    }


def config_to_dict(config: MicrogridConfig) -> dict:
    """Plain-dict form of a config; load(dump(config)) == config."""
    return {
        "agents": config.n_agents,
        "horizon": config.horizon,
        "battery": {
            "x0": config.battery.x0,
            "x_min": config.battery.x_min,
            "x_max": config.battery.x_max,
            "capacity": config.battery.capacity,
            "dt": config.battery.dt,
            "eta": config.battery.eta,
            "u_max": config.battery.u_max,
        },
        "chance": {
            "delta_x": list(config.chance.delta_x),
            "delta_x_tilde": list(config.chance.delta_x_tilde),
            "delta_final": config.chance.delta_final,
            "delta_final_tilde": config.chance.delta_final_tilde,
            "delta_g": list(config.chance.delta_g),
            "delta_g_tilde": list(config.chance.delta_g_tilde),
            "r_target": config.chance.r_target,
            "epsilon": config.chance.epsilon,
            "g_max": config.chance.g_max,
            "nu_r": None if config.chance.nu_r is None else list(config.chance.nu_r),
            "nu_d": None if config.chance.nu_d is None else list(config.chance.nu_d),
        },
        "tariff": {
            "k_tou": list(config.tariff.k_tou),
            "k_c": config.tariff.k_c,
            "alpha_dch": config.tariff.alpha_dch,
            "beta_dch": config.tariff.beta_dch,
        },
        "renewable": _rvs_to_dict(config.renewable),
        "demand": {"agents": [_rvs_to_dict(row) for row in config.demand]},
        "dependencies": {
            "renewable": [list(e) for e in config.renewable_dependency.edges],
            "demand": [list(e) for e in config.demand_dependency.edges],
        },
        "solver": {
            "variant": config.solver.variant,
            "zeta": config.solver.zeta,
            "l_f": config.solver.l_f,
            "alpha": None if config.solver.alpha is None else list(config.solver.alpha),
            "gamma": config.solver.gamma,
            "tol_u": config.solver.tol_u,
            "tol_lambda": config.solver.tol_lambda,
            "max_iters": config.solver.max_iters,
        },
        "experiment": dataclasses.asdict(config.experiment),
    }


def dump_config(config: MicrogridConfig, path: str) -> None:
    """Write a config as YAML such that load_config(path) round-trips."""
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(config_to_dict(config), fh, sort_keys=False)


# ---------------------------------------------------------------------------
# Validation


def validate(config: MicrogridConfig) -> ValidationReport:
    """Check structural soundness; every violation names the offending key."""
    v: list[str] = []
    tau = config.horizon
    n = config.n_agents

    if n < 1:
        v.append("agents: must be >= 1")
    if tau < 1:
        v.append("horizon: must be >= 1")

    b = config.battery
    if not b.capacity > 0:
        v.append("battery.capacity: must be > 0")
    if not b.dt > 0:
        v.append("battery.dt: must be > 0")
    if b.eta is not None and not b.eta > 0:
        v.append("battery.eta: must be > 0")
    if not 0.0 <= b.x_min < b.x_max <= 1.0:
        v.append("battery.x_min/x_max: need 0 <= x_min < x_max <= 1")
    if not b.x_min <= b.x0 <= b.x_max:
        v.append("battery.x0: must lie in [x_min, x_max]")
    if b.capacity > 0 and b.dt > 0 and not config.u_max > 0:
        v.append("battery.u_max: must be > 0")

    c = config.chance
    for name, seq in (("delta_x", c.delta_x), ("delta_g", c.delta_g)):
        if any(not 0.0 < d <= 1.0 for d in seq):
            v.append(f"chance.{name}: entries must lie in (0, 1]")
    for name, tilde, full in (
        ("delta_x_tilde", c.delta_x_tilde, c.delta_x),
        ("delta_g_tilde", c.delta_g_tilde, c.delta_g),
    ):
        if any(not 0.0 < s < 1.0 for s in tilde):
            v.append(f"chance.{name}: entries must lie in (0, 1)")
        elif any(not 0.0 < d - s for d, s in zip(full, tilde)):
            v.append(f"chance.{name}: each entry must be < the matching delta")
    if not 0.0 < c.delta_final <= 1.0:
        v.append("chance.delta_final: must lie in (0, 1]")
    if not 0.0 < c.delta_final_tilde < 1.0:
        v.append("chance.delta_final_tilde: must lie in (0, 1)")
    elif not c.delta_final - c.delta_final_tilde > 0.0:
        v.append("chance.delta_final_tilde: must be < delta_final")
    if not b.x_min <= c.r_target <= b.x_max:
        v.append("chance.r_target: must lie in [x_min, x_max]")
    if not 0.0 < c.epsilon < min(c.r_target - b.x_min, b.x_max - c.r_target):
        v.append("chance.epsilon: need 0 < epsilon < min(r_target - x_min, x_max - r_target)")
    if not c.g_max > 0:
        v.append("chance.g_max: must be > 0")
    for name, seq in (("nu_r", c.nu_r), ("nu_d", c.nu_d)):
        if seq is not None and any(not x > 0 for x in seq):
            v.append(f"chance.{name}: entries must be > 0")

    t = config.tariff
    if any(k < 0 for k in t.k_tou):
        v.append("tariff.k_tou: entries must be >= 0")
    if not t.k_c > 0:
        v.append("tariff.k_c: must be > 0")
    if not t.alpha_dch > 0:
        v.append("tariff.alpha_dch: must be > 0")
    if not t.beta_dch > 0:
        v.append("tariff.beta_dch: must be > 0")

    def check_rvs(rvs: tuple[BoundedRV, ...], where: str) -> None:
        for i, rv in enumerate(rvs):
            if rv.lower > rv.upper:
                v.append(f"{where}[{i}]: lower > upper")
            elif not rv.lower <= rv.mean <= rv.upper:
                v.append(f"{where}[{i}]: mean outside support")

    check_rvs(config.renewable, "renewable")
    for j, row in enumerate(config.demand):
        check_rvs(row, f"demand.agents[{j}]")
    if len(config.renewable) != tau:
        v.append("renewable: length must equal horizon")
    if len(config.demand) != n or any(len(row) != tau for row in config.demand):
        v.append("demand: shape must be agents x horizon")

    def check_graph(g: DependencyGraph, count: int, where: str) -> None:
        if g.node_count != count:
            v.append(f"{where}: node_count must equal {count}")
        for i, j in g.edges:
            if i == j:
                v.append(f"{where}: self-loop ({i}, {j})")
            if not (0 <= i < g.node_count and 0 <= j < g.node_count):
                v.append(f"{where}: edge ({i}, {j}) out of range")

    check_graph(config.renewable_dependency, tau, "dependencies.renewable")
    check_graph(config.demand_dependency, n, "dependencies.demand")

    s = config.solver
    if s.variant not in ("consistent", "literal"):
        v.append("solver.variant: must be 'consistent' or 'literal'")
    modulus = 2.0 * t.alpha_dch + t.k_c
    if s.zeta is not None and not 0.0 < s.zeta <= modulus:
        v.append("solver.zeta: must lie in (0, 2*alpha_dch + k_c]")
    if s.alpha is not None and any(not a > 0 for a in s.alpha):
        v.append("solver.alpha: entries must be > 0")
    if s.gamma is not None and not s.gamma > 0:
        v.append("solver.gamma: must be > 0")
    if not s.tol_u > 0:
        v.append("solver.tol_u: must be > 0")
    if not s.tol_lambda > 0:
        v.append("solver.tol_lambda: must be > 0")
    if s.max_iters < 1:
        v.append("solver.max_iters: must be >= 1")

    e = config.experiment
    if e.samples_validate < 1:
        v.append("experiment.samples_validate: must be >= 1")
    if e.samples_histogram < 1:
        v.append("experiment.samples_histogram: must be >= 1")
    if e.log_stride < 1:
        v.append("experiment.log_stride: must be >= 1")

    return ValidationReport(valid=not v, violations=tuple(v))


# ---------------------------------------------------------------------------
# Sampling


def draw_with_rng(config: MicrogridConfig, n_samples: int, rng: np.random.Generator) -> ScenarioDraw:
    """Draw n_samples joint scenarios from an existing generator.

    Returns a ScenarioDraw whose arrays carry a leading sample axis:
    renewable (n_samples, horizon), demand (n_samples, agents, horizon).
    Every variable is uniform on its support; a degenerate support yields
    its single point exactly.
    """
    r_lo = np.array([rv.lower for rv in config.renewable], dtype=float)
    r_hi = np.array([rv.upper for rv in config.renewable], dtype=float)
    d_lo = config.demand_lowers()
    d_hi = config.demand_uppers()
    renew = r_lo + (r_hi - r_lo) * rng.random((n_samples, config.horizon))
    demand = d_lo + (d_hi - d_lo) * rng.random((n_samples, config.n_agents, config.horizon))
    return ScenarioDraw(renewable=renew, demand=demand)


def sample_scenarios(config: MicrogridConfig, n_samples: int, seed: int) -> ScenarioDraw:
    """Draw n_samples joint scenarios, batched; deterministic in the seed."""
    return draw_with_rng(config, n_samples, np.random.default_rng(seed))


def sample_scenario(config: MicrogridConfig, seed: int) -> ScenarioDraw:
    """Draw one joint scenario: renewable (horizon,), demand (agents, horizon)."""
    batch = sample_scenarios(config, 1, seed)
    return ScenarioDraw(renewable=batch.renewable[0], demand=batch.demand[0])
