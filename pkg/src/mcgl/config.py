"""Solver presets and YAML experiment configuration.

Config files are YAML mappings (schema version 1)::

    version: 1
    graph:
      family: grid          # grid | modular | er
      rows: 10
      cols: 10
      weight_range: [0.1, 3.0]
    m_over_n: [100]
    trials: 15
    base_seed: 0
    support_tol: 1.0e-8
    output: runs/grid
    write_data: true
    center: false
    solver:
      preset: nonconvex-grid
      lambda1: 0.005        # any SolverParams field overrides the preset
      auto_sigma: false     # sigma := 0.98 * (1/tau - lambda2/2) / (2n)
    sweep:                  # optional; cross product with m_over_n x trials
      lambda1: [1.0e-4, 1.0e-3]
      gamma_inv: [2.25]
      tie_lambda2: true     # lambda2 := gamma_inv * lambda1 at every point
    bench:
      n: [160, 240, 320, 400]

``modular`` takes ``n``, ``p_inter``, ``p_intra``, ``modules``; ``er`` takes
``n`` and ``p``.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .penalties import PenaltyParams
from .solver import SolverParams
from .synthetic import ErdosRenyi, Grid, GraphSpec, Modular

CONFIG_VERSION = 1
AUTO_SIGMA_MARGIN = 0.98

_COMMON = dict(gamma_inv=2.25, rho=1.0, max_iter=5000, epsilon=1e-4, tau=1.0)
_TABLE = {
    "nonconvex-grid": dict(lambda1=0.005, lambda2=0.0, sigma=0.05),
    "nonconvex-modular": dict(lambda1=0.01, lambda2=0.0, sigma=0.05),
    "nonconvex-er": dict(lambda1=0.01, lambda2=0.0, sigma=0.01),
    "convex-default": dict(lambda1=1e-4, lambda2=2.5e-4, sigma=4.9e-3),
}
_TABLE["convex-grid"] = _TABLE["convex-modular"] = _TABLE["convex-er"] = _TABLE["convex-default"]
L1_BASELINE = "l1-baseline"


class ConfigError(ValueError):
    pass


def preset_names() -> list[str]:
    return sorted(_TABLE) + [L1_BASELINE, f"{L1_BASELINE}:<preset>"]


def preset_values(name: str) -> dict:
    """Flat parameter dict for ``name``.

    ``l1-baseline`` zeroes ``gamma_inv`` on top of ``convex-default``;
    ``l1-baseline:<preset>`` does the same on top of ``<preset>``.
    """
    if name == L1_BASELINE or name.startswith(L1_BASELINE + ":"):
        base = name.partition(":")[2] or "convex-default"
        values = preset_values(base)
        values["gamma_inv"] = 0.0
        return values
    if name not in _TABLE:
        raise ConfigError(f"unknown preset {name!r}; choose from {preset_names()}")
    return {**_COMMON, **_TABLE[name]}


def auto_sigma(tau: float, lambda2: float, n: int) -> float:
    """Dual step just inside ``1/tau >= 2 sigma n + lambda2/2``."""
    return AUTO_SIGMA_MARGIN * (1.0 / tau - lambda2 / 2.0) / (2.0 * n)


def build_params(values: dict, n: int | None = None) -> SolverParams:
    values = dict(values)
    auto = values.pop("auto_sigma", False)
    values.pop("preset", None)
    pen = PenaltyParams(float(values.pop("lambda1")), float(values.pop("lambda2")),
                        float(values.pop("gamma_inv")))
    unknown = set(values) - {"tau", "sigma", "rho", "epsilon", "max_iter"}
    if unknown:
        raise ConfigError(f"unknown solver keys: {sorted(unknown)}")
    if auto:
        if n is None:
            raise ConfigError("auto_sigma needs the node count")
        values["sigma"] = auto_sigma(float(values["tau"]), pen.lambda2, n)
    kwargs = {k: (int(v) if k == "max_iter" else float(v)) for k, v in values.items()}
    return SolverParams(pen, **kwargs)


def solver_values(section: dict | None) -> dict:
    """Preset merged with explicit overrides from a ``solver:`` section."""
    section = dict(section or {})
    values = preset_values(section.pop("preset", "convex-default"))
    values.update(section)
    return values


def params_to_dict(params: SolverParams) -> dict:
    out = dataclasses.asdict(params)
    out.update(out.pop("penalty"))
    return out


def family_from_dict(d: dict):
    d = dict(d)
    kind = d.pop("family", None)
    d.pop("weight_range", None)
    try:
        if kind == "grid":
            return Grid(int(d["rows"]), int(d["cols"]))
        if kind == "modular":
            return Modular(int(d["n"]), float(d.get("p_inter", 0.01)),
                           float(d.get("p_intra", 0.3)), int(d.get("modules", 4)))
        if kind == "er":
            return ErdosRenyi(int(d["n"]), float(d.get("p", 0.1)))
    except KeyError as exc:
        raise ConfigError(f"graph section is missing {exc}") from None
    raise ConfigError(f"unknown graph family {kind!r} (grid, modular, er)")


def family_to_dict(family) -> dict:
    name = {Grid: "grid", Modular: "modular", ErdosRenyi: "er"}[type(family)]
    return {"family": name, **dataclasses.asdict(family)}


@dataclass
class ExperimentConfig:
    graph: dict | None = None
    covariance: str | None = None
    m_over_n: list[float] = field(default_factory=lambda: [100.0])
    trials: int = 15
    base_seed: int = 0
    support_tol: float = 1e-8
    output: str = "runs"
    write_data: bool = True
    center: bool = False
    solver: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=dict)
    bench: dict = field(default_factory=dict)
    version: int = CONFIG_VERSION

    def __post_init__(self):
        if self.version != CONFIG_VERSION:
            raise ConfigError(f"unsupported config version {self.version}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        self.m_over_n = [float(r) for r in self.m_over_n]
        if any(r <= 0 for r in self.m_over_n):
            raise ConfigError("m_over_n values must be positive")
        if self.graph is None and self.covariance is None:
            raise ConfigError("config needs a graph section or a covariance path")
        if self.graph is not None:
            sizes = self.bench.get("n") if self.bench else None
            # bench configs take the node count from their size list
            family_from_dict({**self.graph, "n": sizes[0]} if sizes else self.graph)
        solver_values(self.solver)

    @property
    def family(self):
        return family_from_dict(self.graph)

    @property
    def weight_range(self) -> tuple[float, float]:
        low, high = (self.graph or {}).get("weight_range", (0.1, 3.0))
        return float(low), float(high)

    def graph_spec(self, seed: int, family=None) -> GraphSpec:
        return GraphSpec(family or self.family, self.weight_range, seed)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text()) or {}
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
    try:
        return ExperimentConfig(**raw)
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
