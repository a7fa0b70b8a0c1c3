"""Analytic photoionization amplitudes for flat-top pulses.

The one-photon route leaves from the excited state while the atom Rabi
cycles; the two-photon route leaves from the ground state through the
summed non-resonant intermediate states, collapsed into one effective
dipole per partial wave.  Both routes are evaluated relative to the
two-resonant-photon line, delta = eps - two_photon_line, and both peak
near delta = 3*dw/2 +- W/2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import (PARTIAL_WAVES, AtomModel, Envelope, PulseParams,
                    Spectrum, SpectrumGrid)

SELECTORS = ("one_photon_only", "two_photon_only", "coherent_total")


class UnsupportedEnvelopeError(ValueError):
    """Raised when a closed-form amplitude is asked for a shaped pulse."""


@dataclass(frozen=True)
class TwoPhotonOptions:
    """Switches for the two-photon amplitude.

    The transient term adds the contribution peaked at the nearest
    neglected intermediate state; summed over many such states it washes
    out, so it is off by default.  ``effective_eps_c`` is the absolute
    energy (a.u.) used when the term is on; None means excited level +
    the atom's ``intermediate_offset``.
    """

    include_transient_term: bool = False
    effective_eps_c: float | None = None

    def resolve_eps_c(self, atom: AtomModel) -> float:
        eps_c = self.effective_eps_c
        if eps_c is None:
            offset = atom.intermediate_offset
            if offset is None:
                raise ValueError("atom has no intermediate_offset; give "
                                 "effective_eps_c explicitly")
            eps_c = atom.eps_excited + offset
        if not eps_c > atom.eps_excited:
            raise ValueError("effective intermediate must lie above the "
                             "excited state")
        return eps_c


DEFAULT_TWO_PHOTON = TwoPhotonOptions()


def _check_flat_top(pulse: PulseParams, t: float):
    if pulse.envelope is not Envelope.GAUSSIAN and pulse.envelope is not Envelope.FLAT_TOP:
        raise UnsupportedEnvelopeError(f"unknown envelope {pulse.envelope}")
    if pulse.envelope is Envelope.GAUSSIAN:
        raise UnsupportedEnvelopeError(
            "closed-form amplitudes exist for flat-top pulses only; "
            "use the time-propagation oracle for shaped pulses")
    if t < 0 or t > pulse.duration * (1 + 1e-12):
        raise ValueError(f"t={t} outside the pulse on-time [0, {pulse.duration}]")


def _lobe(x, t):
    """exp(i x t/2) sin(x t/2) / x, exact at the removable x = 0 point."""
    x = np.asarray(x, dtype=float)
    return (t / 2.0) * np.sinc(x * t / (2.0 * np.pi)) * np.exp(0.5j * x * t)


def _sinc_args(delta, detuning, w):
    """Arguments of the two Autler-Townes lobes (doublet at 3dw/2 -+ w/2)."""
    p = w / 2.0 - 1.5 * detuning + delta
    q = w / 2.0 + 1.5 * detuning - delta
    return p, q


def _one_photon_core(delta, t, e0, atom: AtomModel, detuning, wave: str):
    """One-photon amplitude; broadcasts e0 against delta."""
    e0 = np.asarray(e0, dtype=float)
    omega_r = e0 * atom.z_bound
    w = np.hypot(omega_r, detuning)
    z = atom.z_one_photon[wave]
    with np.errstate(invalid="ignore", divide="ignore"):
        pref = np.where(w > 0, 1j * z * e0 * omega_r / (2.0 * w), 0.0)
    p, q = _sinc_args(delta, detuning, w)
    return pref * (_lobe(p, t) - np.conj(_lobe(q, t)))


def _two_photon_core(delta, t, e0, atom: AtomModel, detuning, wave: str,
                     opts: TwoPhotonOptions):
    """Two-photon amplitude with the collapsed intermediate channel."""
    e0 = np.asarray(e0, dtype=float)
    omega_r = e0 * atom.z_bound
    w = np.hypot(omega_r, detuning)
    with np.errstate(invalid="ignore", divide="ignore"):
        x = np.where(w > 0, detuning / np.where(w > 0, w, 1.0), 0.0)
    z = atom.z_two_photon[wave]
    pref = -0.25j * z * e0**2
    p, q = _sinc_args(delta, detuning, w)
    amp = (1.0 - x) * _lobe(p, t) + (1.0 + x) * np.conj(_lobe(q, t))
    if opts.include_transient_term:
        eps_c = opts.resolve_eps_c(atom)
        arg = delta + atom.eps_excited - eps_c - detuning
        amp = amp - 2.0 * _lobe(arg, t)
    return pref * amp


def one_photon_amplitude(eps, t: float, atom: AtomModel, pulse: PulseParams,
                         wave: str):
    """Continuum amplitude for one-photon ejection from the excited state.

    The two lobes carry opposite signs, so the doublet builds up with a
    sign structure that interferes differently with the two-photon route
    on its two peaks.
    """
    _check_flat_top(pulse, t)
    delta = np.asarray(eps, dtype=float) - atom.two_photon_line
    return _one_photon_core(delta, t, pulse.e0, atom, pulse.detuning(atom), wave)


def two_photon_amplitude(eps, t: float, atom: AtomModel, pulse: PulseParams,
                         wave: str, opts: TwoPhotonOptions = DEFAULT_TWO_PHOTON):
    """Continuum amplitude for two-photon ejection from the ground state.

    The lobe weights are (1 -+ dw/W) for the peaks at 3dw/2 -+ W/2 and
    share a common sign.  The denominators of the collapsed intermediate
    channel neglect dw and W; the effective dipoles absorb them.
    """
    _check_flat_top(pulse, t)
    delta = np.asarray(eps, dtype=float) - atom.two_photon_line
    return _two_photon_core(delta, t, pulse.e0, atom, pulse.detuning(atom),
                            wave, opts)


@dataclass(frozen=True)
class ChannelAmplitudeSet:
    """One- and two-photon amplitudes of a partial wave on a grid."""

    wave: str
    alpha_one: np.ndarray
    alpha_two: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.alpha_one + self.alpha_two


def channel_amplitudes(grid: SpectrumGrid, t: float, atom: AtomModel,
                       pulse: PulseParams, wave: str,
                       opts: TwoPhotonOptions = DEFAULT_TWO_PHOTON) -> ChannelAmplitudeSet:
    return ChannelAmplitudeSet(
        wave=wave,
        alpha_one=one_photon_amplitude(grid.energies, t, atom, pulse, wave),
        alpha_two=two_photon_amplitude(grid.energies, t, atom, pulse, wave, opts),
    )


def amplitude_ratio(atom: AtomModel, pulse: PulseParams, wave: str) -> float:
    """|(E0/2) z_two_photon / z_one_photon| for a partial wave.

    Measures how the two-photon route from the ground state compares with
    the one-photon route from the excited state at this field strength.
    """
    z1 = atom.z_one_photon[wave]
    if z1 == 0:
        raise ZeroDivisionError(f"one-photon dipole vanishes for wave {wave!r}")
    return abs(0.5 * pulse.e0 * atom.z_two_photon[wave] / z1)


def single_atom_spectrum(grid: SpectrumGrid, t: float, atom: AtomModel,
                         pulse: PulseParams,
                         opts: TwoPhotonOptions = DEFAULT_TWO_PHOTON,
                         selector: str = "coherent_total") -> Spectrum:
    """Spectrum of one atom at the pulse's peak field.

    Within each partial wave the two routes add coherently; different
    partial waves never interfere in the angle-integrated signal.
    ``selector`` restricts the pathway: 'one_photon_only',
    'two_photon_only' or 'coherent_total'.
    """
    if selector not in SELECTORS:
        raise ValueError(f"unknown selector {selector!r}; pick from {SELECTORS}")
    channels = {}
    for wave in PARTIAL_WAVES:
        amp = np.zeros(grid.energies.shape, dtype=complex)
        if selector in ("one_photon_only", "coherent_total"):
            amp = amp + one_photon_amplitude(grid.energies, t, atom, pulse, wave)
        if selector in ("two_photon_only", "coherent_total"):
            amp = amp + two_photon_amplitude(grid.energies, t, atom, pulse,
                                             wave, opts)
        channels[wave] = amp
    return Spectrum(grid=grid, channels=channels)


def pathway_intensity_vs_field(grid: SpectrumGrid, t: float, atom: AtomModel,
                               pulse: PulseParams, e0_values: np.ndarray,
                               opts: TwoPhotonOptions = DEFAULT_TWO_PHOTON,
                               selector: str = "coherent_total") -> np.ndarray:
    """|c(eps, E0)|^2 for many field amplitudes at once.

    Returns an array of shape (len(e0_values), len(grid)); used by the
    focal-volume average where the local field varies over the target.
    The carrier frequency and the absolute duration are those of
    ``pulse``; only the field amplitude is rescaled.
    """
    if selector not in SELECTORS:
        raise ValueError(f"unknown selector {selector!r}; pick from {SELECTORS}")
    _check_flat_top(pulse, t)
    delta = grid.delta(atom)[None, :]
    e0 = np.asarray(e0_values, dtype=float)[:, None]
    detuning = pulse.detuning(atom)
    out = np.zeros((e0.shape[0], delta.shape[1]))
    for wave in PARTIAL_WAVES:
        amp = np.zeros((e0.shape[0], delta.shape[1]), dtype=complex)
        if selector in ("one_photon_only", "coherent_total"):
            amp += _one_photon_core(delta, t, e0, atom, detuning, wave)
        if selector in ("two_photon_only", "coherent_total"):
            amp += _two_photon_core(delta, t, e0, atom, detuning, wave, opts)
        out += np.abs(amp) ** 2
    return out
