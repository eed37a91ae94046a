"""Scenario configuration: line-oriented key=value documents and built-ins.

The format is deliberately small: one ``key = value`` pair per line, ``#``
comments, vectors as bracketed comma lists.  Unknown keys are rejected;
missing keys fall back to the documented defaults (the sufficient-excitation
first-order benchmark).
"""

from __future__ import annotations

import numpy as np

from .simulate import LYAPUNOV_KINDS, UPDATE_LAWS, Z_MODES, ScenarioConfig
from .plants import PLANTS

__all__ = [
    "ConfigError",
    "parse_config",
    "apply_overrides",
    "builtin_scenario_text",
    "scenario_config",
    "SCENARIO_NAMES",
]


class ConfigError(ValueError):
    """Malformed or out-of-domain configuration; carries the offending line."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def _parse_float(text):
    return float(text)


def _parse_int(text):
    value = int(text)
    return value


def _parse_vector(text):
    text = text.strip()
    if not (text.startswith("[") and text.endswith("]")):
        raise ValueError("vectors are written as [a, b, c]")
    inner = text[1:-1].strip()
    if not inner:
        return []
    return [float(part) for part in inner.split(",")]


def _parse_choice(options):
    def parse(text):
        if text not in options:
            raise ValueError(f"must be one of {', '.join(options)}")
        return text

    return parse


# key -> (parser, default)
_KEYS = {
    "plant": (_parse_choice(tuple(PLANTS)), "fo_benchmark"),
    "law": (_parse_choice(UPDATE_LAWS), "spectral_cl"),
    "x0": (_parse_vector, [3.0, 5.0, -3.0]),
    "theta_hat0": (_parse_vector, [0.5, 0.5, 0.5]),
    "k1": (_parse_float, 2.0),
    "c": (_parse_vector, [8.0, 8.0]),
    "gamma": (_parse_float, 0.05),
    "k3": (_parse_float, 1.0),
    "k4": (_parse_float, 4.0),
    "filter_a": (_parse_float, 10.0),
    "sigma_min": (_parse_float, 5.0),
    "sigma_max": (_parse_float, 10.0),
    "dt": (_parse_float, 1e-3),
    "horizon": (_parse_float, 40.0),
    "z_mode": (_parse_choice(Z_MODES), "derivative"),
    "log_stride": (_parse_int, 10),
    "lyapunov": (_parse_choice(LYAPUNOV_KINDS), None),  # default depends on plant
}


def parse_config(text, name="custom"):
    """Parse a configuration document into a validated :class:`ScenarioConfig`.

    Raises :class:`ConfigError` with the line number for syntax problems and
    unknown keys, and with the named violation for domain errors.
    """
    return _build(raw_values(text), name)


def apply_overrides(values, overrides):
    """Apply ``key=value`` override strings on top of parsed raw values."""
    out = dict(values)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override must look like key=value, got {item!r}")
        key, _, rhs = item.partition("=")
        key = key.strip()
        if key not in _KEYS:
            raise ConfigError(f"unknown key {key!r}")
        parser, _ = _KEYS[key]
        try:
            out[key] = parser(rhs.strip())
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}") from None
    return out


def raw_values(text):
    """Parse a document into its raw key/value dict without building the config."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", line=lineno)
        key, _, rhs = line.partition("=")
        key = key.strip()
        if key not in _KEYS:
            raise ConfigError(f"unknown key {key!r}", line=lineno)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", line=lineno)
        parser, _ = _KEYS[key]
        try:
            values[key] = parser(rhs.strip())
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}", line=lineno) from None
    return values


def build_config(values, name="custom"):
    """Build a validated config from a raw key/value dict."""
    return _build(values, name)


def _build(values, name):
    filled = {key: default for key, (_, default) in _KEYS.items()}
    filled.update(values)
    if filled["lyapunov"] is None:
        filled["lyapunov"] = "va" if filled["plant"] == "fo_benchmark" else "vn"
    try:
        return ScenarioConfig(
            name=name,
            plant=filled["plant"],
            law=filled["law"],
            x0=np.asarray(filled["x0"], dtype=float),
            theta_hat0=np.asarray(filled["theta_hat0"], dtype=float),
            k1=filled["k1"],
            c=tuple(filled["c"]),
            gamma=filled["gamma"],
            k3=filled["k3"],
            k4=filled["k4"],
            filter_a=filled["filter_a"],
            sigma_min=filled["sigma_min"],
            sigma_max=filled["sigma_max"],
            dt=filled["dt"],
            horizon=filled["horizon"],
            z_mode=filled["z_mode"],
            log_stride=filled["log_stride"],
            lyapunov_kind=filled["lyapunov"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


_BUILTINS = {
    "fo_sufficient": """\
# First-order benchmark, initial state rich enough to excite every direction.
plant = fo_benchmark
law = spectral_cl
x0 = [3, 5, -3]
theta_hat0 = [0.5, 0.5, 0.5]
k1 = 2
k4 = 4
gamma = 0.05
sigma_min = 5
sigma_max = 10
lyapunov = va
""",
    "fo_insufficient": """\
# First-order benchmark started on the x1 = x2 diagonal: one regressor
# direction is never excited and the matching estimate component must freeze.
plant = fo_benchmark
law = spectral_cl
x0 = [4, 4, -3]
theta_hat0 = [0.5, 0.5, 0.5]
k1 = 2
k4 = 4
gamma = 0.05
sigma_min = 5
sigma_max = 10
lyapunov = vkappa
""",
    "bs_lyapunov": """\
# Strict-feedback benchmark under the pure tuning-function update law.
plant = bs_benchmark
law = lyapunov
x0 = [1, 0]
theta_hat0 = [0.5, 1.5, 0.5]
c = [8, 8]
k4 = 8
gamma = 0.01
sigma_min = 5
sigma_max = 10
lyapunov = vn
""",
    "bs_composite": """\
# Strict-feedback benchmark with the collector-driven composite update law.
plant = bs_benchmark
law = spectral_cl
x0 = [1, 0]
theta_hat0 = [0.5, 1.5, 0.5]
c = [8, 8]
k4 = 8
gamma = 0.01
sigma_min = 5
sigma_max = 10
lyapunov = vn
""",
}

SCENARIO_NAMES = tuple(_BUILTINS)


def builtin_scenario_text(name):
    """Canonical configuration document of a built-in scenario."""
    if name not in _BUILTINS:
        raise KeyError(f"unknown scenario '{name}'; known: {', '.join(_BUILTINS)}")
    return _BUILTINS[name]


def scenario_config(name, overrides=()):
    """Parsed configuration of a built-in scenario, with optional overrides."""
    values = raw_values(builtin_scenario_text(name))
    if overrides:
        values = apply_overrides(values, overrides)
    return _build(values, name)
