"""Plain-text ``key = value`` documents for parameters and scenarios.

One scalar per line, ``#`` starts a comment. Numeric values are parsed as
floats; anything else is kept as a string.
"""

from __future__ import annotations

import math
from dataclasses import asdict
from pathlib import Path
from typing import Iterable, Mapping

from .model import PARAM_KEYS, PORTFOLIO_KEYS, ModelParams, PortfolioMatrix


class ConfigError(ValueError):
    pass


def parse_kv(text: str, source: str = "<string>") -> dict[str, float | str]:
    out: dict[str, float | str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        if key in out:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        out[key] = parse_value(value)
    return out


def parse_value(value: str) -> float | str:
    try:
        return float(value)
    except ValueError:
        return value


def parse_overrides(items: Iterable[str]) -> list[tuple[str, float | str]]:
    """Parse ``KEY=VALUE`` strings, keeping command-line order."""
    out = []
    for item in items:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form KEY=VALUE")
        key, value = (s.strip() for s in item.split("=", 1))
        out.append((key, parse_value(value)))
    return out


def format_value(value: float | str) -> str:
    if isinstance(value, str):
        return value
    return repr(float(value))


def format_kv(items: Mapping[str, float | str], prefix: str = "") -> str:
    return "".join(f"{prefix}{k} = {format_value(v)}\n" for k, v in items.items())


def read_kv(path: str | Path) -> dict[str, float | str]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror or exc}") from exc
    return parse_kv(text, str(path))


def _number(key: str, value: float | str) -> float:
    if isinstance(value, str):
        raise ConfigError(f"{key}: expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(f"{key}: value must be finite")
    return value


def params_from_mapping(
    values: Mapping[str, float | str], *, require_all: bool = True
) -> tuple[ModelParams, PortfolioMatrix]:
    """Build parameters from a flat mapping.

    Unknown keys are rejected. With ``require_all`` every parameter and free
    portfolio entry must be present; otherwise baseline defaults fill gaps.
    ``lambda0`` may be given but must agree with the intercepts.
    """
    known = set(PARAM_KEYS) | set(PORTFOLIO_KEYS) | {"lambda0"}
    unknown = sorted(set(values) - known)
    if unknown:
        raise ConfigError(f"unknown parameter key(s): {', '.join(unknown)}")
    if require_all:
        missing = [k for k in (*PARAM_KEYS, *PORTFOLIO_KEYS) if k not in values]
        if missing:
            raise ConfigError(f"missing parameter key(s): {', '.join(missing)}")
    params = ModelParams(**{k: _number(k, values[k]) for k in PARAM_KEYS if k in values})
    portfolio = PortfolioMatrix(**{k: _number(k, values[k]) for k in PORTFOLIO_KEYS if k in values})
    if "lambda0" in values:
        lam0 = _number("lambda0", values["lambda0"])
        if abs(lam0 - portfolio.lambda0) > 1e-12:
            raise ConfigError(
                f"lambda0 = {lam0} inconsistent with intercepts (adding-up requires {portfolio.lambda0})"
            )
    return params, portfolio


def load_params(path: str | Path) -> tuple[ModelParams, PortfolioMatrix]:
    return params_from_mapping(read_kv(path))


def params_to_mapping(params: ModelParams, portfolio: PortfolioMatrix) -> dict[str, float]:
    return {**asdict(params), **asdict(portfolio)}


def dump_params(params: ModelParams, portfolio: PortfolioMatrix) -> str:
    return format_kv(params_to_mapping(params, portfolio))
