"""Flat key=value configuration files.

The model block uses exact key names; unknown keys anywhere in a file
are a hard error so typos cannot silently fall back to defaults.

    dynamics.a, dynamics.b, dynamics.c, dynamics.d
    reward.m, reward.n, reward.r, reward.p, reward.q
    discount.rho, explore.lambda

Simulation and sweep blocks (consumed by the CLI):

    sim.dt, sim.n_steps, sim.n_paths, sim.x0, sim.seed, sim.parallelism
    sweep.lambdas   (comma-separated temperatures)
    output.format   (csv | json, tables only)
"""

from __future__ import annotations

from .errors import ConfigError
from .model import LqModel

MODEL_KEYS = {
    "dynamics.a": "a",
    "dynamics.b": "b",
    "dynamics.c": "c",
    "dynamics.d": "d",
    "reward.m": "m",
    "reward.n": "n",
    "reward.r": "r",
    "reward.p": "p",
    "reward.q": "q",
    "discount.rho": "rho",
    "explore.lambda": "lam",
}

SIM_KEYS = {"sim.dt", "sim.n_steps", "sim.n_paths", "sim.x0", "sim.seed",
            "sim.parallelism"}
SWEEP_KEYS = {"sweep.lambdas"}
OUTPUT_KEYS = {"output.format"}
KNOWN_KEYS = set(MODEL_KEYS) | SIM_KEYS | SWEEP_KEYS | OUTPUT_KEYS


def parse_kv_text(text: str) -> dict[str, str]:
    """Parse KEY=VALUE lines; '#' lines are comments, blanks ignored."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected KEY=VALUE, got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def load_config(path) -> dict[str, str]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    mapping = parse_kv_text(text)
    unknown = sorted(set(mapping) - KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    return mapping


def _float(mapping: dict[str, str], key: str) -> float:
    try:
        return float(mapping[key])
    except ValueError as exc:
        raise ConfigError(f"config key {key} is not a number: {mapping[key]!r}") from exc


def model_from_mapping(mapping: dict[str, str]) -> LqModel:
    """Build the model from the 11 mandatory keys; name any missing one."""
    missing = sorted(k for k in MODEL_KEYS if k not in mapping)
    if missing:
        raise ConfigError(f"missing required config key(s): {', '.join(missing)}")
    fields = {field: _float(mapping, key) for key, field in MODEL_KEYS.items()}
    return LqModel(**fields)


def _int(mapping: dict[str, str], key: str, default: int) -> int:
    if key not in mapping:
        return default
    try:
        return int(mapping[key])
    except ValueError as exc:
        raise ConfigError(f"config key {key} is not an integer: {mapping[key]!r}") from exc


def sim_settings(mapping: dict[str, str]) -> dict:
    """Simulation block with documented defaults; seed has none."""
    out = {
        "dt": _float(mapping, "sim.dt") if "sim.dt" in mapping else 1e-2,
        "n_steps": _int(mapping, "sim.n_steps", 1000),
        "n_paths": _int(mapping, "sim.n_paths", 1000),
        "x0": _float(mapping, "sim.x0") if "sim.x0" in mapping else 1.0,
        "parallelism": _int(mapping, "sim.parallelism", 1),
        "seed": None,
    }
    if "sim.seed" in mapping:
        seed = _int(mapping, "sim.seed", 0)
        if seed < 0 or seed > 2 ** 64 - 1:
            raise ConfigError(f"sim.seed must fit in 64 bits, got {seed}")
        out["seed"] = seed
    if out["dt"] <= 0:
        raise ConfigError(f"sim.dt must be positive, got {out['dt']}")
    if out["n_steps"] < 1 or out["n_paths"] < 1 or out["parallelism"] < 1:
        raise ConfigError("sim.n_steps, sim.n_paths and sim.parallelism must be >= 1")
    return out


def sweep_lambdas(mapping: dict[str, str]) -> list[float]:
    if "sweep.lambdas" not in mapping:
        raise ConfigError("missing required config key(s): sweep.lambdas")
    raw = mapping["sweep.lambdas"]
    try:
        values = [float(tok) for tok in raw.split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"sweep.lambdas is not a comma-separated list: {raw!r}") from exc
    if not values:
        raise ConfigError("sweep.lambdas is empty")
    if any(v <= 0 for v in values):
        raise ConfigError("sweep.lambdas entries must be positive")
    return values


def output_format(mapping: dict[str, str]) -> str:
    fmt = mapping.get("output.format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"output.format must be csv or json, got {fmt!r}")
    return fmt
