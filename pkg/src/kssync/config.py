"""Experiment configuration: flat key = value files and their validation.

Files are UTF-8 text, one assignment per line, with '#' starting a comment
anywhere.  Unknown keys are a hard error so typos cannot silently fall back
to defaults.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .spectral import DomainConfig, ModelParams

__all__ = ["ExperimentConfig", "SweepSpec", "parse_config_text", "load_config", "SCENARIOS"]

SCENARIOS = ("simulate", "sync", "estimate", "sweep", "ubkf_compare", "control")
SWEEP_AXES = ("K", "D", "mu", "snr")
NOISE_MODES = ("off", "fixed_sigma", "target_snr")

# scenarios whose slave fits coefficients from grid samples, hence need an
# overdetermined observation operator
_FITTING = ("sync", "estimate", "sweep", "ubkf_compare", "control")


@dataclass
class SweepSpec:
    axis: str
    values: tuple[float, ...]


@dataclass
class ExperimentConfig:
    scenario: str = ""
    X: float = 120.0
    h: float = 0.005
    T: float = 100.0
    M: int = 64
    K: int = 64
    alpha: float = 1.15
    beta: float = -0.05
    gamma: float = 0.98
    grid_J: int = 240
    coupling_d: float = 1.0
    mu: float = 200.0
    noise_mode: str = "off"
    noise_sigma: float = 0.0
    noise_snr_db: float | None = None
    runs: int = 1
    burn_T: float = 100.0
    store_stride: int = 10
    decimate_obs: int = 1
    base_seed: int = 0
    output_dir: str = "out"
    sweep_axis: str = ""
    sweep_values: str = ""
    control_target: float = 3.0
    control_ramp_T: float = 20.0
    field_stride: int = -1  # -1: scenario default (1 for simulate, 0 otherwise)

    def domain(self, *, slave: bool = False) -> DomainConfig:
        return DomainConfig(X=self.X, K=self.K if slave else self.M, h=self.h, T=self.T)

    def params(self) -> ModelParams:
        return ModelParams(self.alpha, self.beta, self.gamma)

    def sweep(self) -> SweepSpec | None:
        if self.scenario != "sweep":
            return None
        return SweepSpec(self.sweep_axis, _parse_values(self.sweep_values))

    def resolved_field_stride(self) -> int:
        if self.field_stride >= 0:
            return self.field_stride
        return 1 if self.scenario == "simulate" else 0


_INT_KEYS = {"M", "K", "grid_J", "runs", "store_stride", "decimate_obs", "base_seed", "field_stride"}
_STR_KEYS = {"scenario", "noise_mode", "output_dir", "sweep_axis", "sweep_values"}
_KNOWN = {f.name for f in fields(ExperimentConfig)}


def _parse_values(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(tok) for tok in text.split(",") if tok.strip())
    except ValueError as exc:
        raise ConfigError(f"sweep_values must be comma-separated numbers: {text!r}") from exc
    return vals


def parse_config_text(text: str) -> ExperimentConfig:
    """Parse assignments into a config; raises ConfigError on any malformed
    or unknown entry."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected key = value, got {line.strip()!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _KNOWN:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value

    cfg = ExperimentConfig()
    for key, value in raw.items():
        try:
            if key in _STR_KEYS:
                setattr(cfg, key, value)
            elif key in _INT_KEYS:
                setattr(cfg, key, int(value))
            elif key == "noise_snr_db":
                setattr(cfg, key, float(value))
            else:
                setattr(cfg, key, float(value))
        except ValueError as exc:
            raise ConfigError(f"key {key!r}: cannot parse value {value!r}") from exc
    return cfg


def load_config(path, *, scenario: str | None = None) -> ExperimentConfig:
    """Read and validate a config file.

    scenario, when given (e.g. from a CLI subcommand), fills a missing
    scenario key and must agree with an explicit one.
    """
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {p}: {exc}") from exc
    cfg = parse_config_text(text)
    if scenario is not None:
        if cfg.scenario and cfg.scenario != scenario:
            raise ConfigError(
                f"config declares scenario {cfg.scenario!r} but the command is {scenario!r}"
            )
        cfg.scenario = scenario
    validate_config(cfg)
    return cfg


def validate_config(cfg: ExperimentConfig) -> None:
    if cfg.scenario not in SCENARIOS:
        raise ConfigError(
            f"scenario must be one of {', '.join(SCENARIOS)}; got {cfg.scenario!r}"
        )
    if not (cfg.X > 0 and np.isfinite(cfg.X)):
        raise ConfigError("X must be positive and finite")
    if not (cfg.h > 0 and cfg.T >= 0 and np.isfinite(cfg.h) and np.isfinite(cfg.T)):
        raise ConfigError("h must be positive and T non-negative")
    if cfg.M < 1 or cfg.K < 1:
        raise ConfigError("M and K must be at least 1")
    if cfg.runs < 1:
        raise ConfigError("runs must be at least 1")
    if cfg.store_stride < 1:
        raise ConfigError("store_stride must be at least 1")
    if cfg.decimate_obs < 1:
        raise ConfigError("decimate_obs must be at least 1")
    if cfg.burn_T < 0:
        raise ConfigError("burn_T must be non-negative")
    if cfg.coupling_d < 0:
        raise ConfigError("coupling_d must be non-negative")
    if cfg.mu < 0:
        raise ConfigError("mu must be non-negative")
    if cfg.noise_mode not in NOISE_MODES:
        raise ConfigError(f"noise_mode must be one of {', '.join(NOISE_MODES)}")
    if cfg.noise_mode == "fixed_sigma" and not cfg.noise_sigma > 0:
        raise ConfigError("fixed_sigma noise requires noise_sigma > 0")
    if cfg.noise_mode == "target_snr" and cfg.noise_snr_db is None:
        raise ConfigError("target_snr noise requires noise_snr_db")
    if cfg.scenario in _FITTING:
        # control builds its drive at the slave order; M never enters
        k_max = cfg.K if cfg.scenario == "control" else max(cfg.M, cfg.K)
        if cfg.scenario == "sweep" and cfg.sweep_axis == "K":
            k_max = max(k_max, *(int(v) for v in _parse_values(cfg.sweep_values) or (0,)))
        if cfg.grid_J < 2 * k_max + 1:
            raise ConfigError(
                f"grid_J = {cfg.grid_J} under-determines the fit; need at least {2 * k_max + 1}"
            )
    if cfg.scenario == "sweep":
        if cfg.sweep_axis not in SWEEP_AXES:
            raise ConfigError(f"sweep_axis must be one of {', '.join(SWEEP_AXES)}")
        vals = _parse_values(cfg.sweep_values)
        if not vals:
            raise ConfigError("sweep_values must list at least one value")
        diffs = np.diff(vals)
        if not (np.all(diffs > 0) or np.all(diffs < 0)):
            raise ConfigError("sweep_values must be strictly monotone")
        if cfg.sweep_axis == "K" and any(v != int(v) or v < 1 for v in vals):
            raise ConfigError("sweep over K requires positive integer values")
        if cfg.sweep_axis == "snr" and cfg.noise_mode != "target_snr":
            raise ConfigError("sweep over snr requires noise_mode = target_snr")
    if cfg.scenario == "control":
        if cfg.control_ramp_T <= 0:
            raise ConfigError("control_ramp_T must be positive")
    if cfg.field_stride < -1:
        raise ConfigError("field_stride must be -1 (auto), 0 (off), or positive")
