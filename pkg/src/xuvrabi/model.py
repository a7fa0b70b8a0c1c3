"""Atom, pulse and spectral-grid value objects.

Continuum energies are measured from the ionization threshold, so a
continuum energy equals the photoelectron kinetic energy and bound-state
energies are negative.  All value objects are frozen; share them freely
across workers.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .units import HARTREE_EV, ev_to_au, field_from_intensity

#: partial waves reachable by one photon from the excited p state and by
#: two photons from the s ground state; p final states are parity-forbidden
PARTIAL_WAVES = ("s", "d")


class Envelope(enum.Enum):
    """Pulse envelope shape."""

    FLAT_TOP = "flat_top"
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class AtomModel:
    """Two bound levels plus per-partial-wave continuum dipoles.

    Parameters
    ----------
    eps_ground, eps_excited:
        Bound-state energies in a.u. (negative; -eps_ground is the
        ionization potential).
    z_bound:
        Bound-bound dipole length in a.u. (a0).
    z_one_photon:
        Partial wave -> continuum dipole from the excited state (a0).
    z_two_photon:
        Partial wave -> effective continuum dipole for the two-photon
        route from the ground state through the summed non-resonant
        intermediate states (a0).  Signs are physical; do not normalize.
    intermediate_offset:
        Energy of the nearest neglected intermediate state above the
        excited state (a.u.), used only when the transient term of the
        two-photon amplitude is switched on.
    """

    eps_ground: float
    eps_excited: float
    z_bound: float
    z_one_photon: Mapping[str, float]
    z_two_photon: Mapping[str, float]
    intermediate_offset: float | None = None

    def __post_init__(self):
        if not self.eps_excited > self.eps_ground:
            raise ValueError("excited level must lie above the ground level")
        if not -self.eps_ground > 0:
            raise ValueError("ground level must be bound (eps_ground < 0)")
        for dmap in (self.z_one_photon, self.z_two_photon):
            for wave, z in dmap.items():
                if wave not in PARTIAL_WAVES:
                    raise ValueError(f"unknown partial wave {wave!r}")
                if not math.isfinite(z):
                    raise ValueError(f"dipole for wave {wave!r} not finite")
            object.__setattr__(self, "z_one_photon" if dmap is self.z_one_photon
                               else "z_two_photon", MappingProxyType(dict(dmap)))

    @property
    def ionization_potential(self) -> float:
        return -self.eps_ground

    @property
    def transition_energy(self) -> float:
        """Resonance energy of the bound-bound transition (a.u.)."""
        return self.eps_excited - self.eps_ground

    @property
    def two_photon_line(self) -> float:
        """Kinetic energy reached by two resonant photons (a.u.)."""
        return 2.0 * self.transition_energy - self.ionization_potential


def helium_cis() -> AtomModel:
    """Helium 1s^2 <-> 1s4p model with CIS energies and dipoles.

    Ip = 24.9788 eV, transition energy 0.887246 a.u. (24.1432 eV),
    z = 0.124 a0 for the bound-bound transition; continuum dipoles per
    partial wave for the one-photon route from 1s4p and the collapsed
    two-photon route from the ground state.
    """
    eps_ground = ev_to_au(-24.9788)
    return AtomModel(
        eps_ground=eps_ground,
        eps_excited=eps_ground + 0.887246,
        z_bound=0.124,
        z_one_photon={"s": 0.009311, "d": 0.01298},
        z_two_photon={"s": 0.1056, "d": -1.300},
        intermediate_offset=ev_to_au(0.3),
    )


def helium_experimental() -> AtomModel:
    """Helium model with tabulated (non-CIS) energies and z = 0.1318 a0.

    The continuum dipoles are the CIS values; no measured alternative
    exists for them.
    """
    eps_ground = ev_to_au(-24.5873)
    return AtomModel(
        eps_ground=eps_ground,
        eps_excited=eps_ground + ev_to_au(23.742),
        z_bound=0.1318,
        z_one_photon={"s": 0.009311, "d": 0.01298},
        z_two_photon={"s": 0.1056, "d": -1.300},
        intermediate_offset=ev_to_au(0.3),
    )


ATOM_PRESETS = {
    "helium_cis": helium_cis,
    "helium_experimental": helium_experimental,
}


@dataclass(frozen=True)
class PulseParams:
    """Pulse with peak field e0 (a.u.), carrier omega (a.u.) and envelope.

    ``duration`` is the total on-time for a flat top.  For a Gaussian it
    is the tau of the field envelope exp[-2 ln2 t^2 / tau^2], i.e. the
    FWHM of the *intensity* envelope; the field-amplitude FWHM is
    tau * sqrt(2).
    """

    e0: float
    omega: float
    envelope: Envelope = Envelope.FLAT_TOP
    duration: float = 0.0

    def __post_init__(self):
        if self.e0 < 0:
            raise ValueError("field amplitude must be >= 0")
        if self.omega <= 0:
            raise ValueError("carrier frequency must be > 0")
        if self.duration <= 0:
            raise ValueError("duration must be > 0")
        if not isinstance(self.envelope, Envelope):
            object.__setattr__(self, "envelope", Envelope(self.envelope))

    def detuning(self, atom: AtomModel) -> float:
        return self.omega - atom.transition_energy

    def rabi_frequency(self, atom: AtomModel) -> float:
        return self.e0 * atom.z_bound

    def rabi_period(self, atom: AtomModel) -> float:
        omega_r = self.rabi_frequency(atom)
        if omega_r == 0:
            raise ValueError("Rabi period undefined for zero coupling")
        return 2.0 * math.pi / omega_r

    def with_field(self, e0: float) -> "PulseParams":
        """Same pulse at a different peak field (duration unchanged)."""
        return replace(self, e0=e0)


def flat_top_pulse(atom: AtomModel, intensity_w_cm2: float | None = None,
                   e0: float | None = None, rabi_periods: float | None = None,
                   duration: float | None = None,
                   detuning: float = 0.0) -> PulseParams:
    """Flat-top pulse builder.

    Give either ``intensity_w_cm2`` or ``e0``, and either ``rabi_periods``
    (duration = N * 2 pi / Omega) or an absolute ``duration`` in a.u.
    """
    if (intensity_w_cm2 is None) == (e0 is None):
        raise ValueError("give exactly one of intensity_w_cm2 / e0")
    if e0 is None:
        e0 = field_from_intensity(intensity_w_cm2)
    if (rabi_periods is None) == (duration is None):
        raise ValueError("give exactly one of rabi_periods / duration")
    if duration is None:
        omega_r = e0 * atom.z_bound
        if omega_r <= 0:
            raise ValueError("rabi_periods needs a nonzero coupling")
        duration = rabi_periods * 2.0 * math.pi / omega_r
    return PulseParams(e0=e0, omega=atom.transition_energy + detuning,
                       envelope=Envelope.FLAT_TOP, duration=duration)


@dataclass(frozen=True)
class SpectrumGrid:
    """Strictly increasing photoelectron energy samples (a.u., kinetic)."""

    energies: np.ndarray
    uniform: bool = field(init=False, default=False)

    def __post_init__(self):
        e = np.asarray(self.energies, dtype=float)
        if e.ndim != 1 or e.size < 2:
            raise ValueError("grid needs a 1-D array with >= 2 energies")
        d = np.diff(e)
        if not (d > 0).all():
            raise ValueError("grid energies must be strictly increasing")
        object.__setattr__(self, "energies", e)
        object.__setattr__(self, "uniform",
                           bool(np.allclose(d, d[0], rtol=1e-9, atol=0.0)))

    def __len__(self):
        return self.energies.size

    @property
    def step(self) -> float:
        if not self.uniform:
            raise ValueError("step undefined on a non-uniform grid")
        return float(self.energies[1] - self.energies[0])

    @property
    def energies_ev(self) -> np.ndarray:
        return self.energies * HARTREE_EV

    def delta(self, atom: AtomModel) -> np.ndarray:
        """Energies relative to the two-resonant-photon line (a.u.)."""
        return self.energies - atom.two_photon_line

    @classmethod
    def uniform_grid(cls, emin: float, emax: float, n: int) -> "SpectrumGrid":
        return cls(np.linspace(emin, emax, n))

    @classmethod
    def around_line(cls, atom: AtomModel, half_width_ev: float = 0.6,
                    n: int = 2401) -> "SpectrumGrid":
        """Default window: +-half_width_ev around the two-photon line."""
        center = atom.two_photon_line
        hw = ev_to_au(half_width_ev)
        return cls(np.linspace(center - hw, center + hw, n))


@dataclass(frozen=True)
class Spectrum:
    """Per-partial-wave complex amplitudes on a common grid."""

    grid: SpectrumGrid
    channels: Mapping[str, np.ndarray]

    def __post_init__(self):
        ch = {}
        for wave, amp in self.channels.items():
            amp = np.asarray(amp, dtype=complex)
            if amp.shape != self.grid.energies.shape:
                raise ValueError(f"channel {wave!r} does not conform to grid")
            ch[wave] = amp
        object.__setattr__(self, "channels", MappingProxyType(ch))

    @property
    def intensity(self) -> np.ndarray:
        """Angle-integrated signal: incoherent sum over partial waves."""
        out = np.zeros(self.grid.energies.shape)
        for amp in self.channels.values():
            out += np.abs(amp) ** 2
        return out

    def channel_intensity(self, wave: str) -> np.ndarray:
        return np.abs(self.channels[wave]) ** 2


def spectrum_from_intensity(grid: SpectrumGrid, intensity: np.ndarray,
                            wave: str = "s") -> Spectrum:
    """Wrap a nonnegative intensity as a single-channel Spectrum."""
    intensity = np.asarray(intensity, dtype=float)
    if (intensity < 0).any():
        raise ValueError("intensity must be nonnegative")
    return Spectrum(grid=grid, channels={wave: np.sqrt(intensity) + 0j})
