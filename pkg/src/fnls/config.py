"""Experiment configuration: JSON file plus command-line overrides."""
from __future__ import annotations

import json
import math
import secrets
from dataclasses import asdict, dataclass, fields, replace
from typing import Any, Mapping, Optional

from .dynamics import SIGNS
from .errors import ConfigError
from .lemmas import MAX_SCALE

COMMANDS = ("evolve", "density", "transport-test", "twopoint", "lemmas", "partition", "conserve")


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters shared by every subcommand; each uses the subset it needs.

    ``state`` optionally names a JSON file holding a FourierState; when
    absent the initial datum is drawn from ``mu_{s,N}`` with ``seed``.
    ``quad_steps`` left unset means the command's own default.
    """

    command: str = "evolve"
    alpha: float = 1.0
    sign: str = "defocusing"
    s: float = 1.0
    n_max: int = 2
    t: float = 0.2
    r: Optional[float] = None
    M: int = 100000
    seed: Optional[int] = None
    rel_tol: float = 1e-10
    quad_steps: Optional[int] = None
    scale: int = 32
    output_path: str = "."
    sigma: float = 0.2
    q: float = 1.5
    state: Optional[str] = None
    z_threshold: float = 3.0
    density_threshold: float = 1e-5
    identity_threshold: float = 1e-4
    hamiltonian_threshold: float = 1e-6

    def to_dict(self) -> dict:
        return asdict(self)

    def with_seed(self) -> "ExperimentConfig":
        """Fill a missing seed with a fresh random 63-bit value."""
        if self.seed is not None:
            return self
        return replace(self, seed=secrets.randbits(63))


FIELD_NAMES = frozenset(f.name for f in fields(ExperimentConfig))
_INT_KEYS = {"n_max", "M", "seed", "quad_steps", "scale"}
_FLOAT_KEYS = {
    "alpha", "s", "t", "r", "rel_tol", "sigma", "q",
    "z_threshold", "density_threshold", "identity_threshold", "hamiltonian_threshold",
}


def _coerce(key: str, value: Any):
    if value is None:
        if key in {"r", "seed", "state", "quad_steps"}:
            return None
        raise ConfigError(key, "may not be null")
    if key in _INT_KEYS:
        if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
            raise ConfigError(key, f"expected an integer, got {value!r}")
        return int(value)
    if key in _FLOAT_KEYS:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(key, f"expected a number, got {value!r}")
        if not math.isfinite(value):
            raise ConfigError(key, "must be finite")
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(key, f"expected a string, got {value!r}")
    return value


def validate(cfg: ExperimentConfig) -> ExperimentConfig:
    """Check every module precondition the chosen command relies on."""
    checks = [
        ("command", cfg.command in COMMANDS, f"must be one of {', '.join(COMMANDS)}"),
        ("alpha", cfg.alpha > 0.5, "alpha must exceed 0.5"),
        ("sign", cfg.sign in SIGNS, f"must be one of {sorted(SIGNS)}"),
        ("n_max", cfg.n_max >= 0, "must be >= 0"),
        ("rel_tol", 0 < cfg.rel_tol <= 1e-2, "must lie in (0, 1e-2]"),
        ("M", cfg.M >= 2, "must be >= 2"),
        ("quad_steps", cfg.quad_steps is None or cfg.quad_steps >= 2, "must be >= 2"),
        ("scale", 2 <= cfg.scale <= MAX_SCALE, f"must lie in [2, {MAX_SCALE}]"),
        ("r", cfg.r is None or cfg.r > 0, "must be positive"),
        ("seed", cfg.seed is None or 0 <= cfg.seed < 2**63, "must lie in [0, 2^63)"),
        ("z_threshold", cfg.z_threshold > 0, "must be positive"),
        ("density_threshold", cfg.density_threshold > 0, "must be positive"),
        ("identity_threshold", cfg.identity_threshold > 0, "must be positive"),
        ("hamiltonian_threshold", cfg.hamiltonian_threshold > 0, "must be positive"),
    ]
    if cfg.command == "partition":
        checks += [
            ("r", cfg.r is not None, "partition needs a cutoff radius r"),
            ("q", cfg.q >= 1, "q must be >= 1"),
            ("sigma", cfg.sigma * cfg.q < cfg.s, "need sigma * q < s"),
        ]
    if cfg.command == "lemmas":
        checks.append(("s", cfg.s >= 0.5, "ratio scan needs s >= 1/2"))
    if cfg.command == "transport-test":
        checks.append(("n_max", cfg.n_max >= 1, "transport-test needs n_max >= 1"))
    for key, ok, msg in checks:
        if not ok:
            raise ConfigError(key, msg)
    return cfg


def from_mapping(data: Mapping, base: Optional[ExperimentConfig] = None) -> ExperimentConfig:
    """Overlay ``data`` on ``base``; unknown keys are rejected."""
    base = base or ExperimentConfig()
    unknown = sorted(set(data) - FIELD_NAMES)
    if unknown:
        raise ConfigError(unknown[0], "unknown configuration key")
    return replace(base, **{k: _coerce(k, v) for k, v in data.items()})


def load_file(path) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as err:
        raise ConfigError("config", f"cannot read {path}: {err.strerror}") from None
    except json.JSONDecodeError as err:
        raise ConfigError("config", f"invalid JSON in {path}: {err.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError("config", "top level must be a JSON object")
    return data


def parse_config(path=None, overrides: Optional[Mapping] = None) -> ExperimentConfig:
    """File values first, then ``overrides`` (command-line flags) on top."""
    cfg = ExperimentConfig()
    if path is not None:
        cfg = from_mapping(load_file(path), cfg)
    if overrides:
        cfg = from_mapping({k: v for k, v in overrides.items() if v is not None}, cfg)
    return validate(cfg)
