"""Experiment configuration: JSON schema, validation, derived seeding.

One master seed drives graph generation, function generation and the
perturbed-baseline randomness through independent derived streams, so a
config is reproducible as a whole while each component stays isolated.
Validation failures carry the offending field path for the CLI's exit-2
diagnostics.
"""

import json

import numpy as np

from .errors import ConfigError
from .graph import graph_from_config, diameter
from .mixing import mixing_from_config
from .protocol import RunConfig
from .setfn import family_from_config

TOP_LEVEL_KEYS = {
    "scenario", "graph", "mixing", "functions", "K", "T", "psi", "seed",
    "T_prime", "neighbors_only_intersection", "tight_value_cap",
    "threshold_slack", "strict_psi", "taus", "outputs",
}


class ExperimentConfig:
    """Parsed and type-checked experiment description."""

    def __init__(self, raw):
        if not isinstance(raw, dict):
            raise ConfigError("config root must be an object", field="")
        for key in raw:
            if key not in TOP_LEVEL_KEYS:
                raise ConfigError(f"unknown config key {key!r}", field=key)
        for key in ("graph", "mixing", "functions", "K", "T"):
            if key not in raw:
                raise ConfigError(f"missing required key {key!r}", field=key)

        self.scenario = str(raw.get("scenario", ""))
        self.graph = raw["graph"]
        self.mixing = raw["mixing"]
        self.functions = raw["functions"]
        self.K = _require_int(raw["K"], "K", minimum=1)
        self.T = _require_int(raw["T"], "T", minimum=1)
        self.psi = raw.get("psi", "auto")
        if self.psi != "auto":
            if not isinstance(self.psi, (int, float)) or isinstance(self.psi, bool):
                raise ConfigError("psi must be 'auto' or a number", field="psi")
            if self.psi < 0:
                raise ConfigError("psi must be nonnegative", field="psi")
            self.psi = float(self.psi)
        self.seed = _require_int(raw.get("seed", 0), "seed")
        self.t_prime_override = (
            None if "T_prime" not in raw
            else _require_int(raw["T_prime"], "T_prime", minimum=2))
        self.neighbors_only_intersection = _require_bool(
            raw.get("neighbors_only_intersection", False),
            "neighbors_only_intersection")
        self.tight_value_cap = _require_bool(
            raw.get("tight_value_cap", False), "tight_value_cap")
        self.strict_psi = _require_bool(raw.get("strict_psi", False), "strict_psi")
        self.threshold_slack = raw.get("threshold_slack", 0.0)
        if (not isinstance(self.threshold_slack, (int, float))
                or isinstance(self.threshold_slack, bool)
                or self.threshold_slack < 0):
            raise ConfigError("threshold_slack must be a nonnegative number",
                              field="threshold_slack")
        self.threshold_slack = float(self.threshold_slack)
        self.taus = raw.get("taus")
        if self.taus is not None:
            if (not isinstance(self.taus, list)
                    or any(not isinstance(t, (int, float)) or isinstance(t, bool)
                           or t < 0 for t in self.taus)):
                raise ConfigError("taus must be a list of nonnegative numbers",
                                  field="taus")
            self.taus = [float(t) for t in self.taus]
        self.outputs = raw.get("outputs", {})
        if not isinstance(self.outputs, dict):
            raise ConfigError("outputs must be an object", field="outputs")


def _require_int(value, field, minimum=None):
    if not isinstance(value, int) or isinstance(value, bool):
        raise ConfigError(f"{field} must be an integer", field=field)
    if minimum is not None and value < minimum:
        raise ConfigError(f"{field} must be >= {minimum}", field=field)
    return int(value)


def _require_bool(value, field):
    if not isinstance(value, bool):
        raise ConfigError(f"{field} must be a boolean", field=field)
    return value


def load_experiment(path):
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}", field="")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}", field="")
    return ExperimentConfig(raw)


def derived_streams(master_seed):
    """Independent child streams for (graph, functions, adversary)."""
    return np.random.SeedSequence(master_seed).spawn(3)


def build_run_config(cfg):
    """Materialize graph, weights and functions; enforce cross-field rules."""
    graph_ss, fn_ss, _ = derived_streams(cfg.seed)

    graph_spec = dict(cfg.graph) if isinstance(cfg.graph, dict) else cfg.graph
    if isinstance(graph_spec, dict) and "seed" not in graph_spec:
        graph_spec["seed"] = graph_ss
    network = graph_from_config(graph_spec)

    mix = mixing_from_config(cfg.mixing, network)

    fn_spec = dict(cfg.functions) if isinstance(cfg.functions, dict) else cfg.functions
    if isinstance(fn_spec, dict) and "seed" not in fn_spec:
        fn_spec["seed"] = fn_ss
    family = family_from_config(fn_spec, network.n)

    if cfg.t_prime_override is not None:
        expected = cfg.T + 1 + diameter(network)
        if cfg.t_prime_override != expected:
            raise ConfigError(
                f"T_prime={cfg.t_prime_override} conflicts with the derived "
                f"value T + 1 + diameter = {expected}", field="T_prime")

    if cfg.psi == "auto" and network.n > 1 and not mix.mu < 1.0:
        raise ConfigError(
            f"psi 'auto' needs a contracting mixing matrix, but mu={mix.mu}",
            field="psi")

    run_config = RunConfig(
        network, mix, family, cfg.K, cfg.T,
        psi=None if cfg.psi == "auto" else cfg.psi,
        include_self_in_intersection=not cfg.neighbors_only_intersection,
        use_singleton_cap=cfg.tight_value_cap,
        threshold_slack=cfg.threshold_slack,
        seed=cfg.seed)

    if cfg.strict_psi and cfg.psi != "auto":
        floor = RunConfig(network, mix, family, cfg.K, cfg.T, psi=None,
                          use_singleton_cap=cfg.tight_value_cap).resolved_psi()
        if cfg.psi < floor:
            raise ConfigError(
                f"psi={cfg.psi} is below the feasible floor {floor:.6g} "
                f"required by strict_psi", field="psi")
    return run_config


def adversary_stream(cfg):
    """Seed stream reserved for perturbed-baseline randomness."""
    return derived_streams(cfg.seed)[2]
