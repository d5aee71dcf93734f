"""Plain-text run configuration: `key = value` lines under four sections.

Unknown keys or sections are hard errors; every key can be overridden by the
command-line flag of the same name.  The resolved configuration has a
canonical text form whose SHA-256 digest goes into the run manifest.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

from .analysis import ClassifierThresholds
from .errors import ConfigError
from .model import ModelParams
from .simulate import ConvolutionPath, Grid2D, SimConfig


def _parse_bool(s: str) -> bool:
    t = s.strip().lower()
    if t in ("true", "1", "yes", "on"):
        return True
    if t in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {s!r}")


def _parse_float_list(s: str) -> tuple[float, ...]:
    s = s.strip()
    if not s:
        return ()
    return tuple(float(tok) for tok in s.split(","))


def _parse_path(s: str) -> str:
    return s.strip()


# section -> key -> (parser, default)
SCHEMA: dict[str, dict[str, tuple[Any, Any]]] = {
    "model": {
        "eta": (float, 0.92),
        "kappa": (float, 0.65),
        "alpha": (float, 10.0),
        "d": (float, 0.271),
        "sigma": (float, 0.0),
    },
    "grid": {
        "nx": (int, 200),
        "ny": (int, 200),
        "dx": (float, 0.25),
        "dy": (float, 0.25),
    },
    "time": {
        "dt": (float, 0.01),
        "t_max": (float, 5000.0),
        "snapshot_interval": (float, 100.0),
        "steady_tol": (float, 1e-6),
        "steady_window": (float, 100.0),
        "seed": (int, 1),
        "perturbation_amplitude": (float, -1.0),  # negative: default 1e-2 of u*
        "convolution_path": (str, "Spectral"),
    },
    "analysis": {
        "sigmas": (_parse_float_list, (0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5)),
        "eta_min": (float, 0.9),
        "eta_max": (float, 1.1),
        "eta_count": (int, 11),
        "scan_eta_min": (float, 0.2),
        "scan_eta_max": (float, 2.0),
        "scan_kappa_min": (float, 0.2),
        "scan_kappa_max": (float, 1.5),
        "scan_alpha_min": (float, 1.0),
        "scan_alpha_max": (float, 20.0),
        "scan_count": (int, 15),
        "target": (str, "prey"),
        "power_fraction_threshold": (float, 0.05),
        "homogeneous_range_threshold": (float, 1e-4),
        "skewness_threshold": (float, 0.2),
        "ring_peak_threshold": (float, 0.5),
        "min_separation_deg": (float, 15.0),
        "k_max": (float, 3.0),
        "k_count": (int, 2000),
    },
}

_KEY_SECTION = {key: section for section, keys in SCHEMA.items() for key in keys}
assert len(_KEY_SECTION) == sum(len(k) for k in SCHEMA.values()), "duplicate config key"


@dataclass
class RunConfig:
    values: dict[str, Any]

    def __getitem__(self, key: str) -> Any:
        return self.values[key]

    def model_params(self) -> ModelParams:
        return ModelParams(self["eta"], self["kappa"], self["alpha"],
                           self["d"], self["sigma"])

    def grid(self) -> Grid2D:
        return Grid2D(self["nx"], self["ny"], self["dx"], self["dy"])

    def sim_config(self) -> SimConfig:
        amp = self["perturbation_amplitude"]
        try:
            path = ConvolutionPath(self["convolution_path"])
        except ValueError:
            raise ConfigError(
                f"convolution_path must be Spectral or DirectQuadrature, "
                f"got {self['convolution_path']!r}")
        return SimConfig(
            params=self.model_params(),
            grid=self.grid(),
            dt=self["dt"],
            t_max=self["t_max"],
            seed=self["seed"],
            perturbation_amplitude=None if amp < 0 else amp,
            snapshot_interval=self["snapshot_interval"],
            convolution_path=path,
            steady_tol=self["steady_tol"],
            steady_window=self["steady_window"],
        )

    def thresholds(self) -> ClassifierThresholds:
        return ClassifierThresholds(
            power_fraction=self["power_fraction_threshold"],
            homogeneous_range=self["homogeneous_range_threshold"],
            skewness=self["skewness_threshold"],
            ring_peak=self["ring_peak_threshold"],
            min_separation_deg=self["min_separation_deg"],
        )

    def canonical_text(self) -> str:
        lines = []
        for section in sorted(SCHEMA):
            lines.append(f"[{section}]")
            for key in sorted(SCHEMA[section]):
                val = self.values[key]
                if isinstance(val, tuple):
                    val = ",".join(repr(float(x)) for x in val)
                elif isinstance(val, float):
                    val = repr(val)
                lines.append(f"{key} = {val}")
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_text().encode()).hexdigest()


def defaults() -> RunConfig:
    return RunConfig({key: default for keys in SCHEMA.values()
                      for key, (_, default) in keys.items()})


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    """Raw key -> string value mapping; unknown keys/sections are errors."""
    raw: dict[str, str] = {}
    section: Optional[str] = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#") or stripped.startswith(";"):
            continue
        if stripped.startswith("[") and stripped.endswith("]"):
            section = stripped[1:-1].strip()
            if section not in SCHEMA:
                raise ConfigError(f"{source}:{lineno}: unknown section [{section}]")
            continue
        if "=" not in stripped:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, _, value = stripped.partition("=")
        key = key.strip()
        if section is None:
            raise ConfigError(f"{source}:{lineno}: key {key!r} outside any section")
        if key not in SCHEMA[section]:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r} in [{section}]")
        if key in raw:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        raw[key] = value.strip()
    return raw


def load_config(path: Optional[Path] = None,
                overrides: Optional[dict[str, str]] = None) -> RunConfig:
    """Defaults, then the config file, then command-line overrides."""
    cfg = defaults()
    raw: dict[str, str] = {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}")
        raw.update(parse_config_text(text, source=str(path)))
    for key, value in (overrides or {}).items():
        if key not in _KEY_SECTION:
            raise ConfigError(f"unknown configuration key {key!r}")
        raw[key] = value
    for key, value in raw.items():
        parser = SCHEMA[_KEY_SECTION[key]][key][0]
        try:
            cfg.values[key] = parser(value)
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key!r}: {value!r} ({exc})")
    return cfg
