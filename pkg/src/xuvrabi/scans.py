"""Parameter sweeps and doublet observables.

Peak read-out conventions: local maxima above a noise floor, two largest
by height, sub-grid refinement by a 3-point parabola on log intensity,
ties broken toward lower energy.  Flat-top pulses put sinc side lobes a
few percent below the main peaks, so branch tracking across a detuning
scan splits the spectrum at the doublet center instead of trusting the
two largest maxima globally.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .amplitudes import (DEFAULT_TWO_PHOTON, TwoPhotonOptions,
                         single_atom_spectrum)
from .model import AtomModel, PulseParams, Spectrum, SpectrumGrid
from .units import HARTREE_EV, au_to_ev


@dataclass(frozen=True)
class DoubletAnalysis:
    """Positions/heights of up to two peaks; energies in eV.

    ``splitting_ev`` and ``asymmetry`` are None when fewer than two peaks
    clear the noise floor (single-peak report, not an error).  Asymmetry
    is (h_upper - h_lower)/(h_upper + h_lower) with "upper" the peak at
    higher energy.
    """

    n_peaks: int
    positions_ev: tuple[float, ...]
    heights: tuple[float, ...]
    splitting_ev: float | None
    asymmetry: float | None


def _local_maxima(y: np.ndarray, floor: float) -> np.ndarray:
    idx = np.where((y[1:-1] > y[:-2]) & (y[1:-1] >= y[2:]) & (y[1:-1] > floor))[0] + 1
    return idx


def _refine_log_parabola(x: np.ndarray, y: np.ndarray, i: int) -> tuple[float, float]:
    """Sub-grid peak position/height from a 3-point parabola on log y."""
    if i <= 0 or i >= len(y) - 1 or y[i - 1] <= 0 or y[i + 1] <= 0:
        return float(x[i]), float(y[i])
    left, mid, right = np.log(y[i - 1]), np.log(y[i]), np.log(y[i + 1])
    curv = left - 2.0 * mid + right
    if curv >= 0:
        return float(x[i]), float(y[i])
    offset = 0.5 * (left - right) / curv
    pos = x[i] + offset * (x[min(i + 1, len(x) - 1)] - x[i])
    height = math.exp(mid - 0.25 * offset * (left - right))
    return float(pos), float(height)


def analyze_intensity(x: np.ndarray, y: np.ndarray,
                      noise_floor_frac: float = 1e-4) -> DoubletAnalysis:
    """Doublet analysis of a plain intensity profile (x ascending)."""
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    floor = noise_floor_frac * y.max() if y.size and y.max() > 0 else 0.0
    idx = _local_maxima(y, floor)
    if idx.size == 0:
        return DoubletAnalysis(0, (), (), None, None)
    # two largest by height; ties toward lower energy
    order = np.lexsort((x[idx], -y[idx]))
    keep = sorted(idx[order][:2], key=lambda i: x[i])
    peaks = [_refine_log_parabola(x, y, i) for i in keep]
    positions = tuple(p for p, _ in peaks)
    heights = tuple(h for _, h in peaks)
    if len(peaks) < 2:
        return DoubletAnalysis(1, positions, heights, None, None)
    splitting = positions[1] - positions[0]
    asym = (heights[1] - heights[0]) / (heights[1] + heights[0])
    return DoubletAnalysis(2, positions, heights, splitting, asym)


def analyze_doublet(spectrum: Spectrum,
                    noise_floor_frac: float = 1e-4) -> DoubletAnalysis:
    """Doublet analysis of a Spectrum's angle-integrated intensity."""
    return analyze_intensity(spectrum.grid.energies_ev, spectrum.intensity,
                             noise_floor_frac)


def _doublet_center_kinetic(atom: AtomModel, pulse: PulseParams) -> float:
    """Kinetic energy of the doublet midpoint, two_photon_line + 3 dw/2."""
    return atom.two_photon_line + 1.5 * pulse.detuning(atom)


def branch_positions(spectrum: Spectrum, atom: AtomModel, pulse: PulseParams,
                     noise_floor_frac: float = 1e-4):
    """Highest local maximum on each side of the doublet center.

    Returns ((pos_lo_ev, h_lo), (pos_hi_ev, h_hi)); an entry is None when
    no maximum clears the noise floor on that side.  Splitting at the
    center keeps one branch's sinc side lobes from shadowing the other,
    weaker branch.
    """
    x = spectrum.grid.energies_ev
    y = spectrum.intensity
    center = au_to_ev(_doublet_center_kinetic(atom, pulse))
    floor = noise_floor_frac * y.max() if y.max() > 0 else 0.0
    idx = _local_maxima(y, floor)
    out = []
    for mask in (x[idx] < center, x[idx] > center):
        side = idx[mask]
        if side.size == 0:
            out.append(None)
            continue
        i = side[np.argmax(y[side])]
        out.append(_refine_log_parabola(x, y, i))
    return tuple(out)


def central_dip_present(spectrum: Spectrum, atom: AtomModel, pulse: PulseParams,
                        depth_ratio: float = 0.8,
                        noise_floor_frac: float = 1e-4) -> bool:
    """True when a doublet minimum has formed at the doublet center.

    Requires the two largest peaks to bracket the center and the central
    intensity to lie below ``depth_ratio`` times the weaker peak.
    """
    res = analyze_doublet(spectrum, noise_floor_frac)
    if res.n_peaks < 2:
        return False
    center = au_to_ev(_doublet_center_kinetic(atom, pulse))
    lo, hi = res.positions_ev
    if not (lo < center < hi):
        return False
    x = spectrum.grid.energies_ev
    y_center = spectrum.intensity[np.argmin(np.abs(x - center))]
    return bool(y_center <= depth_ratio * min(res.heights))


@dataclass(frozen=True)
class ScanResult2D:
    """Detuning scan: one spectrum column per photon energy."""

    photon_energies_ev: np.ndarray
    kinetic_energies_ev: np.ndarray
    intensity: np.ndarray  # shape (n_kinetic, n_photon)
    metadata: dict

    def __post_init__(self):
        shape = (self.kinetic_energies_ev.size, self.photon_energies_ev.size)
        if self.intensity.shape != shape:
            raise ValueError(f"intensity shape {self.intensity.shape} != {shape}")
        if (self.intensity < 0).any():
            raise ValueError("intensity must be nonnegative")


SpectrumFn = Callable[..., Spectrum]


def detuning_scan(atom: AtomModel, pulse_template: PulseParams,
                  detunings: Sequence[float], grid: SpectrumGrid,
                  selector: str = "coherent_total",
                  opts: TwoPhotonOptions = DEFAULT_TWO_PHOTON,
                  spectrum_fn: SpectrumFn | None = None,
                  map_fn: Callable = map) -> ScanResult2D:
    """Spectra for a list of detunings (a.u.) at fixed pulse duration.

    The coupling does not depend on the carrier, so fixing the duration
    in Rabi periods and fixing it absolutely coincide within one scan.
    ``spectrum_fn(grid, t, atom, pulse, opts, selector)`` defaults to the
    single-atom model; pass a volume-averaged variant to scan macroscopic
    spectra.  ``map_fn`` may be an executor map; output ordering follows
    ``detunings`` regardless.
    """
    detunings = list(detunings)
    if not detunings:
        raise ValueError("need at least one detuning")
    fn = spectrum_fn or (lambda g, t, a, p, o, sel:
                         single_atom_spectrum(g, t, a, p, o, sel))

    def column(dw: float) -> np.ndarray:
        pulse = replace(pulse_template, omega=atom.transition_energy + dw)
        spec = fn(grid, pulse.duration, atom, pulse, opts, selector)
        return spec.intensity

    columns = list(map_fn(column, detunings))
    photon_ev = au_to_ev(atom.transition_energy + np.asarray(detunings))
    return ScanResult2D(
        photon_energies_ev=photon_ev,
        kinetic_energies_ev=grid.energies_ev,
        intensity=np.column_stack(columns),
        metadata={
            "selector": selector,
            "e0_au": pulse_template.e0,
            "duration_au": pulse_template.duration,
            "envelope": pulse_template.envelope.value,
            "detunings_au": [float(d) for d in detunings],
        },
    )


def branch_gap_curve(scan: ScanResult2D, atom: AtomModel,
                     min_height_ratio: float = 0.06,
                     noise_floor_frac: float = 1e-4):
    """Measured branch separation per scan column (meV; NaN when invalid).

    A column counts only when both half-plane branches are found and the
    weaker is at least ``min_height_ratio`` of the stronger; below that
    the weak branch is not reliably separable from the strong branch's
    side lobes.
    """
    detunings_mev = (scan.photon_energies_ev - au_to_ev(atom.transition_energy)) * 1e3
    x = scan.kinetic_energies_ev
    gaps = np.full(detunings_mev.shape, np.nan)
    for j, dw_mev in enumerate(detunings_mev):
        y = scan.intensity[:, j]
        if y.max() <= 0:
            continue
        center = au_to_ev(atom.two_photon_line) + 1.5 * dw_mev * 1e-3
        floor = noise_floor_frac * y.max()
        idx = _local_maxima(y, floor)
        sides = []
        for mask in (x[idx] < center, x[idx] > center):
            side = idx[mask]
            sides.append(None if side.size == 0
                         else _refine_log_parabola(x, y, side[np.argmax(y[side])]))
        if sides[0] is None or sides[1] is None:
            continue
        (p_lo, h_lo), (p_hi, h_hi) = sides
        if min(h_lo, h_hi) < min_height_ratio * max(h_lo, h_hi):
            continue
        gaps[j] = (p_hi - p_lo) * 1e3
    return detunings_mev, gaps


def min_branch_gap(scan: ScanResult2D, atom: AtomModel,
                   min_height_ratio: float = 0.06) -> tuple[float, float]:
    """(smallest branch gap in meV, detuning in meV where it occurs)."""
    detunings, gaps = branch_gap_curve(scan, atom, min_height_ratio)
    if np.isnan(gaps).all():
        raise ValueError("no scan column shows two separable branches")
    j = np.nanargmin(gaps)
    return float(gaps[j]), float(detunings[j])


def find_symmetric_detuning(atom: AtomModel, pulse_template: PulseParams,
                            search_window: tuple[float, float],
                            selector: str = "coherent_total",
                            grid: SpectrumGrid | None = None,
                            opts: TwoPhotonOptions = DEFAULT_TWO_PHOTON,
                            tol: float = 0.5e-3 / HARTREE_EV,
                            spectrum_fn: SpectrumFn | None = None) -> float:
    """Detuning (a.u.) where the doublet is symmetric, by bisection.

    ``search_window`` must bracket a sign change of the asymmetry; the
    result is resolved to ``tol`` (default 0.5 meV).
    """
    grid = grid or SpectrumGrid.around_line(atom)
    fn = spectrum_fn or (lambda g, t, a, p, o, sel:
                         single_atom_spectrum(g, t, a, p, o, sel))

    def asym(dw: float) -> float:
        pulse = replace(pulse_template, omega=atom.transition_energy + dw)
        res = analyze_doublet(fn(grid, pulse.duration, atom, pulse, opts, selector))
        if res.asymmetry is None:
            raise ValueError(f"no doublet at detuning {au_to_ev(dw)*1e3:.2f} meV; "
                             "shrink the search window")
        return res.asymmetry

    lo, hi = search_window
    if not lo < hi:
        raise ValueError("search window must be ordered (lo, hi)")
    a_lo, a_hi = asym(lo), asym(hi)
    if a_lo == 0.0:
        return lo
    if a_hi == 0.0:
        return hi
    if (a_lo < 0) == (a_hi < 0):
        raise ValueError("asymmetry does not change sign over the window")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        a_mid = asym(mid)
        if a_mid == 0.0:
            return mid
        if (a_mid < 0) == (a_lo < 0):
            lo, a_lo = mid, a_mid
        else:
            hi, a_hi = mid, a_mid
    return 0.5 * (lo + hi)


def buildup_sequence(atom: AtomModel, pulse_template: PulseParams,
                     times_rabi_periods: Sequence[float],
                     grid: SpectrumGrid, selector: str = "coherent_total",
                     opts: TwoPhotonOptions = DEFAULT_TWO_PHOTON) -> list[Spectrum]:
    """Spectra after the given multiples of the Rabi period 2 pi / Omega.

    Each entry truncates the flat top at its own time, i.e. the pulse is
    switched off there.
    """
    period = pulse_template.rabi_period(atom)
    out = []
    for m in times_rabi_periods:
        if m <= 0:
            raise ValueError("times must be positive multiples of the period")
        t = m * period
        pulse = replace(pulse_template, duration=t)
        out.append(single_atom_spectrum(grid, t, atom, pulse, opts, selector))
    return out
