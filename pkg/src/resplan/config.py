"""YAML scenario configuration: defaults, validation, overrides, builders.

Every key carries its unit in its name (memory_mb, energy_j, rate_lo_mbps),
values convert to SI at build time (MB and Mb are decimal, 1e6).  Unknown
keys are errors: a typo silently falling back to a default would invalidate
an experiment.
"""

from __future__ import annotations

import copy
from dataclasses import replace
from importlib import resources

import yaml

from .errors import ConfigError
from .fleet import EnergyParams, two_tier_fleet
from .graph import build_resnet50
from .harness import SWEEP_KINDS, ScenarioConfig, SweepAxis
from .objective import ObjectiveWeights, default_latency_ref
from .profile import AccuracyProfile, load_profile
from .solvers import ExactLimits, GaConfig

MB = 1e6          # bytes per (decimal) megabyte
MBPS = 1e6        # bits/s per Mb/s
GMULTS = 1e9      # multiplications per G

DEFAULTS: dict = {
    "label": "scenario",
    "model": {
        "input_side": 224,
        "weight_bytes": 4,
        "memory_mode": "inputs",
    },
    "fleet": {
        "devices": 10,
        "memory_mb": [100.0, 200.0],
        "compute_gmults": [1.4, 2.8],
        "energy_j": [800.0, 1000.0],
        "rate_gmults_per_s": [1.4, 2.8],
    },
    "network": {
        "rate_lo_mbps": 7.2,
        "rate_hi_mbps": 72.2,
    },
    "energy": {
        "p_compute_w": 8.0,
        "p_transmit_w": 10.0,
    },
    "profile": {
        "path": None,
    },
    "weights": {
        "alpha": 0.7,
        "beta": 0.3,
        "accuracy_threshold": 0.8,
        "latency_ref_s": None,
    },
    "solver": {
        "kind": "ga",
        "population_size": 100,
        "generations": 200,
        "crossover_rate": 0.9,
        "mutation_rate": None,
        "tournament_size": 3,
        "penalty_weight": 10.0,
        "elite": 1,
        "max_candidates": 200000,
    },
    "scenario": {
        "lam": 3.0,
        "rounds": 10,
        "seed": 0,
    },
    "sweep": None,
}

_SWEEP_KEYS = {"axis", "values"}

PRESET_NAMES = ("sweep_weights", "sweep_energy", "sweep_request_rate", "sweep_compute")


def _merge(base: dict, user: dict, path: str) -> dict:
    out = copy.deepcopy(base)
    for key, value in user.items():
        here = f"{path}.{key}" if path else key
        if key == "sweep" and not path:
            out["sweep"] = _check_sweep(value)
            continue
        if key not in base:
            raise ConfigError(f"unknown config key {here!r}")
        if isinstance(base[key], dict):
            if value is None:
                continue
            if not isinstance(value, dict):
                raise ConfigError(f"{here} must be a mapping")
            out[key] = _merge(base[key], value, here)
        else:
            out[key] = value
    return out


def _check_sweep(value):
    if value is None:
        return None
    if not isinstance(value, dict):
        raise ConfigError("sweep must be a mapping with 'axis' and 'values'")
    unknown = set(value) - _SWEEP_KEYS
    if unknown:
        raise ConfigError(f"unknown sweep keys: {sorted(unknown)}")
    if "axis" not in value or "values" not in value:
        raise ConfigError("sweep needs both 'axis' and 'values'")
    return {"axis": value["axis"], "values": value["values"]}


def load_config(source=None, overrides=(), seed=None) -> dict:
    """Normalized config dict: defaults, then the document, then overrides.

    ``source`` is a path, a YAML string, a dict, or None for pure defaults.
    ``overrides`` are dotted assignments like ``solver.generations=50``; the
    value side is parsed as YAML.  ``seed`` overrides scenario.seed last.
    """
    if source is None:
        doc: dict = {}
    elif isinstance(source, dict):
        doc = source
    else:
        text = str(source)
        if "\n" not in text and (text.endswith((".yaml", ".yml")) or "/" in text):
            try:
                with open(text, "r", encoding="utf-8") as fh:
                    text = fh.read()
            except OSError as exc:
                raise ConfigError(f"cannot read config {text!r}: {exc}") from exc
        try:
            doc = yaml.safe_load(text) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"config is not valid YAML: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("config document must be a mapping")

    cfg = _merge(DEFAULTS, doc, "")
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, _, raw = item.partition("=")
        try:
            value = yaml.safe_load(raw)
        except yaml.YAMLError as exc:
            raise ConfigError(f"override {item!r}: bad value: {exc}") from exc
        _set_dotted(cfg, key.strip(), value)
    if seed is not None:
        cfg["scenario"]["seed"] = int(seed)
    return cfg


def _set_dotted(cfg: dict, dotted: str, value) -> None:
    parts = dotted.split(".")
    node = cfg
    for i, part in enumerate(parts[:-1]):
        if part == "sweep" and i == 0:
            if node["sweep"] is None:
                node["sweep"] = {"axis": None, "values": None}
            node = node["sweep"]
            continue
        if not isinstance(node.get(part), dict):
            raise ConfigError(f"unknown config key {dotted!r}")
        node = node[part]
    leaf = parts[-1]
    if leaf not in node and not (len(parts) > 1 and parts[0] == "sweep"):
        raise ConfigError(f"unknown config key {dotted!r}")
    node[leaf] = value


def effective_yaml(cfg: dict) -> str:
    """Deterministic dump of the fully resolved config (round-trips)."""
    return yaml.safe_dump(cfg, sort_keys=True, default_flow_style=False)


def _as_list(value, name: str) -> list[float]:
    if isinstance(value, (int, float)):
        value = [value]
    if not isinstance(value, list) or not value:
        raise ConfigError(f"{name} must be a number or a non-empty list")
    out = []
    for v in value:
        f = float(v)
        if f <= 0:
            raise ConfigError(f"{name} entries must be > 0, got {v!r}")
        out.append(f)
    return out


def default_profile() -> AccuracyProfile:
    """The packaged synthetic profile."""
    path = resources.files("resplan").joinpath("data/synthetic_default.yaml")
    return load_profile(path.read_text(encoding="utf-8"))


def preset_text(name: str) -> str:
    if name not in PRESET_NAMES:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}")
    return resources.files("resplan").joinpath(f"presets/{name}.yaml").read_text(
        encoding="utf-8"
    )


def build_scenario(cfg: dict) -> ScenarioConfig:
    """Turn a normalized config dict into runnable scenario objects."""
    try:
        model = cfg["model"]
        graph = build_resnet50(int(model["input_side"]))
        if int(model["weight_bytes"]) != graph.weight_bytes:
            graph = replace(graph, weight_bytes=int(model["weight_bytes"]))
        if model["memory_mode"] not in ("inputs", "weights", "both"):
            raise ConfigError(f"model.memory_mode {model['memory_mode']!r} unknown")

        f = cfg["fleet"]
        fleet = two_tier_fleet(
            int(f["devices"]),
            [v * MB for v in _as_list(f["memory_mb"], "fleet.memory_mb")],
            [v * GMULTS for v in _as_list(f["compute_gmults"], "fleet.compute_gmults")],
            _as_list(f["energy_j"], "fleet.energy_j"),
            [v * GMULTS for v in _as_list(f["rate_gmults_per_s"],
                                          "fleet.rate_gmults_per_s")],
        )

        net = cfg["network"]
        rate_lo = float(net["rate_lo_mbps"]) * MBPS
        rate_hi = float(net["rate_hi_mbps"]) * MBPS

        en = cfg["energy"]
        energy = EnergyParams(p_compute=float(en["p_compute_w"]),
                              p_transmit=float(en["p_transmit_w"]))

        prof_path = cfg["profile"]["path"]
        profile = default_profile() if prof_path is None else load_profile(str(prof_path))
        if profile.n_blocks != graph.n_blocks:
            raise ConfigError(
                f"profile covers {profile.n_blocks} blocks, model has {graph.n_blocks}"
            )

        w = cfg["weights"]
        ref = w["latency_ref_s"]
        if ref is None:
            ref = default_latency_ref(graph, fleet, rate_lo)
        weights = ObjectiveWeights(
            alpha=float(w["alpha"]),
            beta=float(w["beta"]),
            latency_ref=float(ref),
            accuracy_threshold=float(w["accuracy_threshold"]),
        )

        s = cfg["solver"]
        if s["kind"] not in ("ga", "exact"):
            raise ConfigError(f"solver.kind {s['kind']!r} unknown")
        ga = GaConfig(
            population_size=int(s["population_size"]),
            generations=int(s["generations"]),
            crossover_rate=float(s["crossover_rate"]),
            mutation_rate=None if s["mutation_rate"] is None else float(s["mutation_rate"]),
            tournament_size=int(s["tournament_size"]),
            penalty_weight=float(s["penalty_weight"]),
            elite=int(s["elite"]),
            seed=int(cfg["scenario"]["seed"]),
        )

        sc = cfg["scenario"]
        return ScenarioConfig(
            graph=graph,
            fleet=fleet,
            profile=profile,
            weights=weights,
            energy=energy,
            rate_lo=rate_lo,
            rate_hi=rate_hi,
            lam=float(sc["lam"]),
            rounds=int(sc["rounds"]),
            seed=int(sc["seed"]),
            solver=str(s["kind"]),
            ga=ga,
            exact_limits=ExactLimits(max_candidates=int(s["max_candidates"])),
            memory_mode=str(model["memory_mode"]),
            label=str(cfg["label"]),
        )
    except ConfigError:
        raise
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc


def build_sweep_axis(cfg: dict) -> SweepAxis | None:
    sw = cfg.get("sweep")
    if sw is None:
        return None
    try:
        values = sw["values"]
        if not isinstance(values, list):
            raise ConfigError("sweep.values must be a list")
        axis = sw["axis"]
        if axis not in SWEEP_KINDS:
            raise ConfigError(
                f"sweep.axis must be one of {', '.join(SWEEP_KINDS)}; got {axis!r}"
            )
        return SweepAxis(kind=str(axis), values=tuple(
            tuple(v) if isinstance(v, list) else v for v in values
        ))
    except ConfigError:
        raise
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"invalid sweep section: {exc}") from exc
