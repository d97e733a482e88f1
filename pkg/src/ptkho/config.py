"""Experiment configuration: validated parameter bundles and named presets.

A configuration document is a flat JSON object whose keys mirror the
:class:`ExperimentConfig` fields.  Parsing is strict in both directions:
unknown keys are rejected (no silent typos) and every required key must be
present.  ``parse_config(render_config(cfg))`` round-trips exactly because
values are emitted with shortest round-trip float formatting.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass

from .evolution import FloquetParams, RunConfig

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "parse_config",
    "render_config",
    "preset_names",
    "preset_config",
]


class ConfigError(ValueError):
    """Raised for malformed, incomplete, or out-of-range configuration input."""


_REQUIRED_KEYS = (
    "kick_strength",
    "kick_gain",
    "osc_freq",
    "hbar_eff",
    "substeps",
    "grid_size",
    "total_kicks",
)

_OPTIONAL_DEFAULTS = {
    "snapshot_times": (),
    "renormalize": True,
    "edge_guard": 1e-8,
    "output_dir": ".",
    "emit_snapshots": True,
}


@dataclass(frozen=True)
class ExperimentConfig:
    """One fully specified simulation run.

    Physics fields match :class:`~ptkho.evolution.FloquetParams`; run-control
    fields match :class:`~ptkho.evolution.RunConfig`.  ``output_dir`` and
    ``emit_snapshots`` only affect where and whether the CLI writes files.
    """

    kick_strength: float
    kick_gain: float
    osc_freq: float
    hbar_eff: float
    substeps: int
    grid_size: int
    total_kicks: int
    snapshot_times: tuple[int, ...] = ()
    renormalize: bool = True
    edge_guard: float = 1e-8
    output_dir: str = "."
    emit_snapshots: bool = True

    def __post_init__(self) -> None:
        if not isinstance(self.grid_size, int) or isinstance(self.grid_size, bool):
            raise ConfigError("grid_size must be an integer")
        if self.grid_size < 8 or self.grid_size % 2 != 0:
            raise ConfigError(f"grid_size must be an even integer >= 8, got {self.grid_size}")
        if not isinstance(self.output_dir, str) or not self.output_dir:
            raise ConfigError("output_dir must be a non-empty string")
        for name in ("renormalize", "emit_snapshots"):
            if not isinstance(getattr(self, name), bool):
                raise ConfigError(f"{name} must be a boolean")
        # Delegate the physics and run-control validation so the rules live
        # in one place; re-raise uniformly as ConfigError for the CLI.
        try:
            self.to_run_config()
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    def to_params(self) -> FloquetParams:
        """Physics parameters for :func:`ptkho.evolution.run`."""
        return FloquetParams(
            kick_strength=self.kick_strength,
            kick_gain=self.kick_gain,
            osc_freq=self.osc_freq,
            hbar_eff=self.hbar_eff,
            substeps=self.substeps,
        )

    def to_run_config(self) -> RunConfig:
        """Run-control bundle for :func:`ptkho.evolution.run`."""
        return RunConfig(
            params=self.to_params(),
            total_kicks=self.total_kicks,
            renormalize=self.renormalize,
            snapshot_times=self.snapshot_times,
            edge_guard=self.edge_guard,
        )


def _coerce_float(key: str, value: object) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key} must be a number, got {value!r}")
    result = float(value)
    if not math.isfinite(result):
        raise ConfigError(f"{key} must be finite, got {value!r}")
    return result


def _coerce_int(key: str, value: object) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{key} must be an integer, got {value!r}")
    return value


def _coerce_snapshot_times(value: object) -> tuple[int, ...]:
    if not isinstance(value, (list, tuple)):
        raise ConfigError(f"snapshot_times must be a list of integers, got {value!r}")
    return tuple(_coerce_int("snapshot_times entry", item) for item in value)


def parse_config(text: str) -> ExperimentConfig:
    """Parse a JSON configuration document into a validated config.

    Raises ConfigError listing every missing required key at once, naming
    any unknown keys, and rejecting out-of-range or mistyped values.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"configuration is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a JSON object of key-value pairs")

    known = set(_REQUIRED_KEYS) | set(_OPTIONAL_DEFAULTS)
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
    missing = sorted(key for key in _REQUIRED_KEYS if key not in raw)
    if missing:
        raise ConfigError(f"missing required configuration keys: {', '.join(missing)}")

    kwargs: dict[str, object] = {}
    for key in ("kick_strength", "kick_gain", "osc_freq", "hbar_eff"):
        kwargs[key] = _coerce_float(key, raw[key])
    for key in ("substeps", "grid_size", "total_kicks"):
        kwargs[key] = _coerce_int(key, raw[key])
    if "snapshot_times" in raw:
        kwargs["snapshot_times"] = _coerce_snapshot_times(raw["snapshot_times"])
    if "edge_guard" in raw:
        kwargs["edge_guard"] = _coerce_float("edge_guard", raw["edge_guard"])
    for key in ("renormalize", "emit_snapshots"):
        if key in raw:
            if not isinstance(raw[key], bool):
                raise ConfigError(f"{key} must be a boolean, got {raw[key]!r}")
            kwargs[key] = raw[key]
    if "output_dir" in raw:
        if not isinstance(raw["output_dir"], str):
            raise ConfigError(f"output_dir must be a string, got {raw['output_dir']!r}")
        kwargs["output_dir"] = raw["output_dir"]
    return ExperimentConfig(**kwargs)  # type: ignore[arg-type]


def render_config(config: ExperimentConfig) -> str:
    """Serialize a config to JSON such that parse_config round-trips exactly."""
    payload = dataclasses.asdict(config)
    payload["snapshot_times"] = list(config.snapshot_times)
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


# Named presets: the canonical parameter tuples (kick_strength 5, hbar_eff 0.1,
# non-resonant frequency 2*pi/e^2 or resonant 2*pi, gain in {0, 0.01, 0.5, 1, 3}).
# Grid sizes, horizons, substep counts, and edge-guard levels are measured
# choices, not physics: see the per-preset notes.
#
#  * Non-resonant runs develop a numerical noise floor in the outer momentum
#    band (power-law tails seeded by the wrapped-potential kink plus, at high
#    gain, round-off amplified through the e^{+-gain} dynamic range).  Measured
#    worst-case outer-band fractions over the preset horizons: 9.7e-9 for
#    gain 3 at 2^15, 3.4e-5 for gain 1 at 2^15, 4.7e-4 for gain 0.5 at 2^17.
#    Observable corruption (wrap-around bias in p_mean / e_kin) only sets in
#    near 1e-2, so these presets pin edge_guard at 2e-3: tight enough to catch
#    a real wrap within a few kicks, loose enough to clear the measured floors
#    by >= 4x.
#  * Gain 0.5 spreads far more violently than its neighbours (transient tail
#    excursions past |p| ~ 5000 near t ~ 100) and genuinely outgrows 2^15/2^16;
#    it gets a 2^17 grid.
#  * Resonant runs with gain hold a compact state; their outer-band floor
#    stays near 5e-8 over the full horizon, so the fig3 presets use a 1e-4
#    guard (2000x above the floor, still catching real trouble while the
#    wrap bias on p_mean is ~0.2%).  The gain-0 resonant state instead keeps
#    absorbing energy until its momentum distribution genuinely reaches the
#    2^12 band edge (measured 4.9e-3 outer fraction by kick 500, 2.1e-2 by
#    kick 3000), which caps the slow approach to kinetic-energy saturation;
#    the long gain-0 run therefore uses 2^13, where the same tail only grows
#    to 1.6e-3 by kick 4000 (a ~4% kinetic-energy bias at the very end, too
#    small to shift the saturation timescales) - hence its 5e-3 guard.
#  * Resonant runs need 800 splitting substeps for the oscillation frequency
#    to converge (200 lands on a wrong dominant peak, 400 is still 6% off);
#    non-resonant observables are converged at 200.
_PRESET_FIELDS: dict[str, dict[str, object]] = {
    "fig1_lambda0": dict(kick_gain=0.0, osc_freq="nonres", grid_size=2**15,
                         total_kicks=200, substeps=200, edge_guard=2e-3),
    "fig1_lambda001": dict(kick_gain=0.01, osc_freq="nonres", grid_size=2**15,
                           total_kicks=200, substeps=200, edge_guard=2e-3),
    "fig1_lambda05": dict(kick_gain=0.5, osc_freq="nonres", grid_size=2**17,
                          total_kicks=200, substeps=200, edge_guard=2e-3),
    "fig1_lambda1": dict(kick_gain=1.0, osc_freq="nonres", grid_size=2**15,
                         total_kicks=200, substeps=200, edge_guard=2e-3),
    "fig1_lambda3": dict(kick_gain=3.0, osc_freq="nonres", grid_size=2**15,
                         total_kicks=200, substeps=200, edge_guard=2e-3,
                         snapshot_times=(101,)),
    "fig3_lambda05": dict(kick_gain=0.5, osc_freq="res", grid_size=2**12,
                          total_kicks=500, substeps=800, edge_guard=1e-4),
    "fig3_lambda1": dict(kick_gain=1.0, osc_freq="res", grid_size=2**12,
                         total_kicks=600, substeps=800, edge_guard=1e-4),
    "fig4_lambda0": dict(kick_gain=0.0, osc_freq="res", grid_size=2**13,
                         total_kicks=4000, substeps=800, edge_guard=5e-3),
}


def _build_preset(name: str) -> ExperimentConfig:
    fields = dict(_PRESET_FIELDS[name])
    freq = 2.0 * math.pi if fields.pop("osc_freq") == "res" else 2.0 * math.pi / math.e**2
    return ExperimentConfig(
        kick_strength=5.0,
        hbar_eff=0.1,
        osc_freq=freq,
        **fields,  # type: ignore[arg-type]
    )


def preset_names() -> tuple[str, ...]:
    """All preset names, sorted."""
    return tuple(sorted(_PRESET_FIELDS))


def preset_config(name: str) -> ExperimentConfig:
    """Look up a preset by name; raises ConfigError naming the valid choices."""
    if name not in _PRESET_FIELDS:
        choices = ", ".join(preset_names())
        raise ConfigError(f"unknown preset {name!r}; available presets: {choices}")
    return _build_preset(name)
