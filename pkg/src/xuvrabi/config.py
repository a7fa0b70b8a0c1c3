"""Run configuration: JSON key/value tree with validated sections.

Sections [atom], [pulse], [grid] are shared; each CLI command adds its
own block.  Energies are accepted in eV/meV with explicit unit suffixes
in the key names; unknown keys are rejected with their path.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

from .amplitudes import TwoPhotonOptions
from .deconv import DeconvolutionConfig
from .focal import BeamGeometry
from .model import (ATOM_PRESETS, AtomModel, Envelope, PulseParams,
                    SpectrumGrid, flat_top_pulse)
from .units import ev_to_au, fs_to_au, mev_to_au


class ConfigError(ValueError):
    """Invalid configuration; the message carries the offending path."""


def _require_mapping(node: Any, path: str) -> Mapping:
    if not isinstance(node, Mapping):
        raise ConfigError(f"{path}: expected an object")
    return node


def _check_keys(node: Mapping, path: str, allowed: set[str],
                required: set[str] = frozenset()):
    for key in node:
        if key not in allowed:
            raise ConfigError(f"{path}.{key}: unknown key "
                              f"(allowed: {', '.join(sorted(allowed))})")
    for key in required:
        if key not in node:
            raise ConfigError(f"{path}.{key}: required key missing")


def _get_number(node: Mapping, path: str, key: str, default=None):
    if key not in node:
        if default is None:
            raise ConfigError(f"{path}.{key}: required key missing")
        return default
    value = node[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}.{key}: expected a number")
    return float(value)


def load_config(path) -> dict:
    """Read a JSON config; a run manifest re-fed as config is unwrapped."""
    try:
        payload = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})")
    if not isinstance(payload, dict):
        raise ConfigError(f"{path}: top level must be an object")
    if "config" in payload and isinstance(payload["config"], dict):
        return payload["config"]  # run manifest round-trip
    return payload


def parse_atom(config: Mapping) -> AtomModel:
    node = _require_mapping(config.get("atom", {"preset": "helium_cis"}), "atom")
    if "preset" in node:
        _check_keys(node, "atom", {"preset"})
        name = node["preset"]
        if name not in ATOM_PRESETS:
            raise ConfigError(f"atom.preset: unknown preset {name!r} "
                              f"(available: {', '.join(sorted(ATOM_PRESETS))})")
        return ATOM_PRESETS[name]()
    allowed = {"eps_ground_ev", "transition_energy_ev", "z_bound",
               "z_one_photon", "z_two_photon", "intermediate_offset_ev"}
    _check_keys(node, "atom", allowed,
                {"eps_ground_ev", "transition_energy_ev", "z_bound",
                 "z_one_photon", "z_two_photon"})
    eps_ground = ev_to_au(_get_number(node, "atom", "eps_ground_ev"))
    offset = node.get("intermediate_offset_ev")
    try:
        return AtomModel(
            eps_ground=eps_ground,
            eps_excited=eps_ground
            + ev_to_au(_get_number(node, "atom", "transition_energy_ev")),
            z_bound=_get_number(node, "atom", "z_bound"),
            z_one_photon=dict(_require_mapping(node["z_one_photon"],
                                               "atom.z_one_photon")),
            z_two_photon=dict(_require_mapping(node["z_two_photon"],
                                               "atom.z_two_photon")),
            intermediate_offset=None if offset is None else ev_to_au(offset),
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"atom: {exc}")


def parse_pulse(config: Mapping, atom: AtomModel) -> PulseParams:
    node = _require_mapping(config.get("pulse"), "pulse") \
        if "pulse" in config else None
    if node is None:
        raise ConfigError("pulse: section missing")
    allowed = {"intensity_w_cm2", "field_au", "detuning_mev",
               "photon_energy_ev", "envelope", "duration"}
    _check_keys(node, "pulse", allowed)
    if ("intensity_w_cm2" in node) == ("field_au" in node):
        raise ConfigError("pulse: give exactly one of intensity_w_cm2 / field_au")
    if "detuning_mev" in node and "photon_energy_ev" in node:
        raise ConfigError("pulse: give detuning_mev or photon_energy_ev, not both")
    if "detuning_mev" in node:
        detuning = mev_to_au(_get_number(node, "pulse", "detuning_mev"))
    elif "photon_energy_ev" in node:
        detuning = ev_to_au(_get_number(node, "pulse", "photon_energy_ev")) \
            - atom.transition_energy
    else:
        detuning = 0.0
    envelope = node.get("envelope", "flat_top")
    try:
        envelope = Envelope(envelope)
    except ValueError:
        raise ConfigError(f"pulse.envelope: unknown envelope {envelope!r}")
    dur = _require_mapping(node.get("duration"), "pulse.duration") \
        if "duration" in node else None
    if dur is None:
        raise ConfigError("pulse.duration: section missing")
    _check_keys(dur, "pulse.duration", {"rabi_periods", "fs", "au"})
    if sum(k in dur for k in ("rabi_periods", "fs", "au")) != 1:
        raise ConfigError("pulse.duration: give exactly one of "
                          "rabi_periods / fs / au")
    try:
        kwargs = dict(
            intensity_w_cm2=node.get("intensity_w_cm2"),
            e0=node.get("field_au"),
            detuning=detuning,
        )
        if "rabi_periods" in dur:
            kwargs["rabi_periods"] = _get_number(dur, "pulse.duration",
                                                 "rabi_periods")
        elif "fs" in dur:
            kwargs["duration"] = fs_to_au(_get_number(dur, "pulse.duration", "fs"))
        else:
            kwargs["duration"] = _get_number(dur, "pulse.duration", "au")
        pulse = flat_top_pulse(atom, **kwargs)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"pulse: {exc}")
    if envelope is Envelope.GAUSSIAN:
        pulse = PulseParams(e0=pulse.e0, omega=pulse.omega,
                            envelope=envelope, duration=pulse.duration)
    return pulse


def parse_grid(config: Mapping, atom: AtomModel) -> SpectrumGrid:
    node = _require_mapping(config.get("grid", {}), "grid")
    allowed = {"half_width_ev", "points", "delta_min_ev", "delta_max_ev"}
    _check_keys(node, "grid", allowed)
    points = int(_get_number(node, "grid", "points", 2401))
    if points < 2:
        raise ConfigError("grid.points: need at least 2")
    if "delta_min_ev" in node or "delta_max_ev" in node:
        lo = _get_number(node, "grid", "delta_min_ev", -0.6)
        hi = _get_number(node, "grid", "delta_max_ev", 0.6)
        if not lo < hi:
            raise ConfigError("grid: delta_min_ev must be below delta_max_ev")
        center = atom.two_photon_line
        return SpectrumGrid.uniform_grid(center + ev_to_au(lo),
                                         center + ev_to_au(hi), points)
    half = _get_number(node, "grid", "half_width_ev", 0.6)
    if half <= 0:
        raise ConfigError("grid.half_width_ev: must be > 0")
    return SpectrumGrid.around_line(atom, half_width_ev=half, n=points)


def parse_two_photon_options(config: Mapping, atom: AtomModel) -> TwoPhotonOptions:
    node = _require_mapping(config.get("two_photon", {}), "two_photon")
    _check_keys(node, "two_photon",
                {"include_transient_term", "effective_eps_c_offset_ev"})
    include = bool(node.get("include_transient_term", False))
    eps_c = None
    if "effective_eps_c_offset_ev" in node:
        eps_c = atom.eps_excited + ev_to_au(
            _get_number(node, "two_photon", "effective_eps_c_offset_ev"))
    return TwoPhotonOptions(include_transient_term=include,
                            effective_eps_c=eps_c)


def parse_beam(node: Mapping, path: str = "average.beam") -> BeamGeometry:
    node = _require_mapping(node, path)
    allowed = {"intensity_w_cm2", "waist_um", "rayleigh_mm",
               "target_length_mm", "rho_max_in_waists"}
    _check_keys(node, path, allowed,
                {"intensity_w_cm2", "waist_um", "rayleigh_mm",
                 "target_length_mm"})
    try:
        return BeamGeometry(
            peak_intensity_w_cm2=_get_number(node, path, "intensity_w_cm2"),
            waist_um=_get_number(node, path, "waist_um"),
            rayleigh_um=1e3 * _get_number(node, path, "rayleigh_mm"),
            target_length_um=1e3 * _get_number(node, path, "target_length_mm"),
            rho_max_in_waists=_get_number(node, path, "rho_max_in_waists", 5.0),
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}")


def parse_deconvolution(node: Mapping,
                        path: str = "deconvolve") -> DeconvolutionConfig:
    allowed = {"iterations_signal", "iterations_psf", "blind_rounds",
               "tikhonov_lambda", "psf_init_fwhm_mev", "stop_rel_residual",
               "input_csv", "synthetic"}
    _check_keys(_require_mapping(node, path), path, allowed)
    try:
        return DeconvolutionConfig(
            iterations_signal=int(_get_number(node, path, "iterations_signal", 25)),
            iterations_psf=int(_get_number(node, path, "iterations_psf", 10)),
            blind_rounds=int(_get_number(node, path, "blind_rounds", 10)),
            tikhonov_lambda=_get_number(node, path, "tikhonov_lambda", 1e-3),
            psf_init_fwhm_ev=1e-3 * _get_number(node, path,
                                                "psf_init_fwhm_mev", 50.0),
            stop_rel_residual=_get_number(node, path, "stop_rel_residual", 1e-4),
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}")


@dataclass(frozen=True)
class SharedConfig:
    atom: AtomModel
    pulse: PulseParams
    grid: SpectrumGrid
    two_photon: TwoPhotonOptions
    raw: dict


TOP_LEVEL_KEYS = {"atom", "pulse", "grid", "two_photon", "spectrum", "scan",
                  "average", "oracle", "deconvolve", "output"}


def parse_shared(config: dict) -> SharedConfig:
    _check_keys(config, "<top>", TOP_LEVEL_KEYS)
    atom = parse_atom(config)
    return SharedConfig(
        atom=atom,
        pulse=parse_pulse(config, atom),
        grid=parse_grid(config, atom),
        two_photon=parse_two_photon_options(config, atom),
        raw=dict(config),
    )
