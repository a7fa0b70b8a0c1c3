"""Physical constants and unit conversions.

Everything internal is in Hartree atomic units (e = hbar = m_e = 1);
eV / meV / fs / W/cm^2 appear only at the I/O boundary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Hartree energy in eV
HARTREE_EV = 27.211386
# atomic unit of time in femtoseconds
ATOMIC_TIME_FS = 0.02418884
# peak intensity (W/cm^2) corresponding to unit field amplitude squared,
# I[W/cm^2] = E0^2[a.u.] * INTENSITY_AU_W_CM2
INTENSITY_AU_W_CM2 = 3.51e16


@dataclass(frozen=True)
class PhysicalConstants:
    """Conversion constants shared by all modules."""

    hartree_in_ev: float = HARTREE_EV
    atomic_time_in_fs: float = ATOMIC_TIME_FS
    bohr_radius_label: str = "a0"
    intensity_conversion: float = INTENSITY_AU_W_CM2


CONST = PhysicalConstants()

_EV_ALIASES = {"ev": 1.0, "mev": 1e-3}


def _unit_factor(unit: str) -> float | None:
    """eV-equivalent scale of ``unit``; None marks atomic units."""
    key = unit.strip().lower().replace(".", "")
    if key in ("au", "hartree", "ha"):
        return None
    if key in _EV_ALIASES:
        return _EV_ALIASES[key]
    raise ValueError(f"unknown energy unit: {unit!r}")


def convert_energy(value, from_unit: str, to_unit: str):
    """Convert an energy between 'au', 'eV' and 'meV'."""
    f_from = _unit_factor(from_unit)
    f_to = _unit_factor(to_unit)
    ev = np.asarray(value, dtype=float) * f_from if f_from is not None \
        else np.asarray(value, dtype=float) * HARTREE_EV
    out = ev / f_to if f_to is not None else ev / HARTREE_EV
    return out if np.ndim(value) else float(out)


def ev_to_au(value):
    return np.multiply(value, 1.0 / HARTREE_EV)


def au_to_ev(value):
    return np.multiply(value, HARTREE_EV)


def mev_to_au(value):
    return np.multiply(value, 1e-3 / HARTREE_EV)


def au_to_mev(value):
    return np.multiply(value, 1e3 * HARTREE_EV)


def fs_to_au(value):
    return np.multiply(value, 1.0 / ATOMIC_TIME_FS)


def au_to_fs(value):
    return np.multiply(value, ATOMIC_TIME_FS)


def field_from_intensity(intensity_w_cm2: float) -> float:
    """Peak field amplitude E0 (a.u.) for a peak intensity in W/cm^2."""
    if intensity_w_cm2 < 0:
        raise ValueError(f"intensity must be >= 0, got {intensity_w_cm2}")
    return float(np.sqrt(intensity_w_cm2 / INTENSITY_AU_W_CM2))


def intensity_from_field(e0_au: float) -> float:
    """Peak intensity (W/cm^2) for a field amplitude in a.u."""
    return float(e0_au**2 * INTENSITY_AU_W_CM2)
