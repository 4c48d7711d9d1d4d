"""Experiment configuration: a flat key-value text format with a strict
typed schema.

Unknown keys are errors (silent typos destroy reproducibility).  Every CLI
run resolves its flags against an optional config file and embeds the full
resolved configuration in its output artifact, so identical config + seed
+ version reproduces artifacts byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from fractions import Fraction
from typing import Any

from .errors import ConfigError
from .numerics import format_fraction


def _parse_bool(s: str) -> bool:
    low = s.strip().lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {s!r}")


def _parse_rational(s: str) -> Fraction:
    try:
        return Fraction(s.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"expected a rational like 3/2, got {s!r}") from exc


def parse_seed_range(s: str) -> tuple[int, ...]:
    """'0..99' or a comma list '0,3,17'."""
    s = s.strip()
    if ".." in s:
        lo, _, hi = s.partition("..")
        try:
            a, b = int(lo), int(hi)
        except ValueError as exc:
            raise ConfigError(f"bad seed range {s!r}") from exc
        if b < a:
            raise ConfigError(f"empty seed range {s!r}")
        return tuple(range(a, b + 1))
    try:
        return tuple(int(tok) for tok in s.split(",") if tok.strip())
    except ValueError as exc:
        raise ConfigError(f"bad seed list {s!r}") from exc


@dataclass
class ExperimentConfig:
    """Everything a run needs; field names are the config-file keys."""

    graph: str = "hypercube:d=3"
    lam: Fraction = Fraction(1)
    precision: str = "rational"  # rational | float64 | float128
    seeds: tuple[int, ...] = (0,)
    base_seed: int = 0
    max_steps: int = 100_000_000
    start: str = "even-full"
    stop_region: str = "balanced"
    threads: int = 1
    tv_threshold: str = "1/e"  # 1/e | 1/4
    psi: int = 1
    all_a: bool = False
    by_family: bool = False
    exact: bool = False
    out: str = ""
    # caps
    enumeration_cap: int = 48
    matrix_cap: int = 20_000
    scan_cap: int = 22
    exact_scan_cap: int = 12
    mixing_budget: int = 1_000_000
    family_cap: int = 16
    # stand-in constants for unstated asymptotic factors (configuration,
    # not published values)
    c: float = 1.0
    c_exp: float = 1.0
    c_prime: float = 1.0
    delta_constant: float = 1.0
    regime_threshold_c: float = 1.0
    regime_small_limit: float = 1.0
    regime_large_coeff: float = 1.0

    def resolved(self) -> dict[str, Any]:
        """JSON-ready view, embedded in every artifact."""
        out: dict[str, Any] = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, Fraction):
                out[f.name] = format_fraction(v)
            elif isinstance(v, tuple):
                out[f.name] = list(v)
            else:
                out[f.name] = v
        return out


_PARSERS = {
    "graph": str,
    "lam": _parse_rational,
    "precision": str,
    "seeds": parse_seed_range,
    "base_seed": int,
    "max_steps": lambda s: int(float(s)),
    "start": str,
    "stop_region": str,
    "threads": int,
    "tv_threshold": str,
    "psi": int,
    "all_a": _parse_bool,
    "by_family": _parse_bool,
    "exact": _parse_bool,
    "out": str,
    "enumeration_cap": int,
    "matrix_cap": int,
    "scan_cap": int,
    "exact_scan_cap": int,
    "mixing_budget": int,
    "family_cap": int,
    "c": float,
    "c_exp": float,
    "c_prime": float,
    "delta_constant": float,
    "regime_threshold_c": float,
    "regime_small_limit": float,
    "regime_large_coeff": float,
}

_VALIDATORS = {
    "precision": {"rational", "float64", "float128"},
    "tv_threshold": {"1/e", "1/4"},
    "start": {"even-full", "odd-full", "empty"},
    "stop_region": {"balanced"},
}


def parse_config_text(text: str) -> ExperimentConfig:
    """Parse `key = value` lines; '#' comments; unknown keys are errors."""
    cfg = ExperimentConfig()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key = key.strip()
        value = value.strip()
        if key not in _PARSERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            parsed = _PARSERS[key](value)
        except ConfigError:
            raise
        except Exception as exc:
            raise ConfigError(
                f"line {lineno}: bad value for {key}: {value!r} ({exc})"
            ) from exc
        if key in _VALIDATORS and parsed not in _VALIDATORS[key]:
            raise ConfigError(
                f"line {lineno}: {key} must be one of {sorted(_VALIDATORS[key])}"
            )
        setattr(cfg, key, parsed)
    return cfg


def config_to_text(cfg: ExperimentConfig) -> str:
    """Serialize so that parse_config_text round-trips losslessly."""
    lines = []
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if isinstance(v, Fraction):
            s = format_fraction(v)
        elif isinstance(v, tuple):
            s = ",".join(str(x) for x in v)
        elif isinstance(v, bool):
            s = "true" if v else "false"
        else:
            s = str(v)
        lines.append(f"{f.name} = {s}")
    return "\n".join(lines) + "\n"


def load_config(path: str) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read())
