"""Essential-states time propagation: bound levels + discretized continua.

Independent numerical check of the closed-form amplitudes, and the only
route to shaped (non-flat-top) pulses.  Continuum bins are energy
normalized (couplings scaled by sqrt(bin spacing)) so bin populations
approximate a spectral density.  The propagator is the norm-preserving
implicit-midpoint (Crank-Nicolson) step; the linear solve exploits the
arrowhead structure (bins couple only to the few bound "hub" states).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator

from .model import (PARTIAL_WAVES, AtomModel, Envelope, PulseParams,
                    Spectrum, SpectrumGrid)


class StepSizeError(RuntimeError):
    """Norm drift exceeded tolerance; reduce dt."""


@dataclass(frozen=True)
class Intermediate:
    """Explicitly tracked intermediate state for sensitivity studies."""

    label: str
    energy: float                      # absolute, a.u.
    z_from_ground: float               # dipole to the ground state (a0)
    z_to_continuum: Mapping[str, float]  # per partial wave (a0)


@dataclass(frozen=True)
class EssentialStatesSystem:
    """Hamiltonian data for the truncated atom.

    ``coupling_mode`` is 'rwa' (rotating frame, carrier removed; constant
    couplings under a flat top) or 'full_oscillating' (lab frame with the
    carrier resolved).  Without explicit intermediates the two-photon
    route is a reduced ground-continuum coupling quadratic in the field
    envelope; with them it is built from the listed one-photon steps.
    """

    atom: AtomModel
    coupling_mode: str
    channels: tuple[str, ...]
    n_bins: int
    bin_energies: np.ndarray | None    # kinetic, a.u.; shared by channels
    include_one_photon: bool = True
    include_two_photon: bool = True
    intermediates: tuple[Intermediate, ...] = ()

    @property
    def bin_spacing(self) -> float:
        if self.bin_energies is None or self.n_bins < 2:
            raise ValueError("system has no continuum discretization")
        return float(self.bin_energies[1] - self.bin_energies[0])

    @property
    def bound_labels(self) -> tuple[str, ...]:
        return ("ground", "excited") + tuple(c.label for c in self.intermediates)

    @property
    def size(self) -> int:
        nb = 0 if self.bin_energies is None else self.bin_energies.size
        return len(self.bound_labels) + nb * len(self.channels)


def build_system(atom: AtomModel, emin: float, emax: float, n_bins: int,
                 coupling_mode: str = "rwa",
                 channels: Sequence[str] = PARTIAL_WAVES,
                 include_one_photon: bool = True,
                 include_two_photon: bool = True,
                 intermediates: Sequence[Intermediate] = ()) -> EssentialStatesSystem:
    """Discretize the continua over [emin, emax] (kinetic, a.u.).

    ``n_bins`` may be 0 for a pure two-level system; otherwise at least
    64 bins are required for a meaningful density.  The window must
    contain the resonant two-photon line.
    """
    if coupling_mode not in ("rwa", "full_oscillating"):
        raise ValueError(f"unknown coupling mode {coupling_mode!r}")
    for c in channels:
        if c not in PARTIAL_WAVES:
            raise ValueError(f"unknown partial wave {c!r}")
    if n_bins == 0 or not channels:
        return EssentialStatesSystem(
            atom=atom, coupling_mode=coupling_mode, channels=(),
            n_bins=0, bin_energies=None,
            include_one_photon=include_one_photon,
            include_two_photon=include_two_photon,
            intermediates=tuple(intermediates))
    if n_bins < 64:
        raise ValueError("need n_bins >= 64 (or 0 for a two-level system)")
    if not emin < emax:
        raise ValueError("emin must be below emax")
    line = atom.two_photon_line
    if not emin < line < emax:
        raise ValueError("continuum window must contain the two-photon line "
                         f"({line} a.u.)")
    return EssentialStatesSystem(
        atom=atom, coupling_mode=coupling_mode, channels=tuple(channels),
        n_bins=n_bins, bin_energies=np.linspace(emin, emax, n_bins),
        include_one_photon=include_one_photon,
        include_two_photon=include_two_photon,
        intermediates=tuple(intermediates))


@dataclass(frozen=True)
class PropagationResult:
    """Observed populations and final continuum amplitudes."""

    times: np.ndarray
    bound_populations: Mapping[str, np.ndarray]
    norm_history: np.ndarray
    continuum_amplitudes: Mapping[str, np.ndarray]
    bin_energies: np.ndarray | None
    bin_spacing: float | None
    dt: float
    coupling_mode: str
    channels: tuple[str, ...]


def _hamiltonian_parts(system: EssentialStatesSystem, pulse: PulseParams):
    """Diagonal + hub coupling vectors; H = diag + sum_h f^p (e_h v^T + v e_h^T).

    Returns (diag, hubs) where hubs is a list of (hub_index, power, vector):
    ``power`` is the envelope power multiplying that coupling row (1 for
    one-photon couplings, 2 for the reduced two-photon coupling).
    """
    atom = system.atom
    detuning = pulse.detuning(atom)
    nb = len(system.bound_labels)
    nk = 0 if system.bin_energies is None else system.bin_energies.size
    n = nb + nk * len(system.channels)
    diag = np.zeros(n)
    diag[1] = -detuning
    for i, inter in enumerate(system.intermediates):
        diag[2 + i] = (inter.energy - atom.eps_excited) - detuning
    sqde = math.sqrt(system.bin_spacing) if nk else 0.0
    for ci, wave in enumerate(system.channels):
        sl = slice(nb + ci * nk, nb + (ci + 1) * nk)
        diag[sl] = (system.bin_energies - atom.two_photon_line) - 2.0 * detuning

    half = 0.5 * pulse.e0
    v_ground1 = np.zeros(n)   # one-photon couplings out of the ground state
    v_ground1[1] = half * atom.z_bound
    for i, inter in enumerate(system.intermediates):
        v_ground1[2 + i] = half * inter.z_from_ground
    hubs = [(0, 1, v_ground1)]

    if nk:
        v_excited = np.zeros(n)
        for ci, wave in enumerate(system.channels):
            sl = slice(nb + ci * nk, nb + (ci + 1) * nk)
            if system.include_one_photon:
                v_excited[sl] = half * atom.z_one_photon[wave] * sqde
        hubs.append((1, 1, v_excited))

        if system.include_two_photon and not system.intermediates:
            v_ground2 = np.zeros(n)
            for ci, wave in enumerate(system.channels):
                sl = slice(nb + ci * nk, nb + (ci + 1) * nk)
                v_ground2[sl] = 0.25 * pulse.e0**2 * atom.z_two_photon[wave] * sqde
            hubs.append((0, 2, v_ground2))

        for i, inter in enumerate(system.intermediates):
            v_inter = np.zeros(n)
            for ci, wave in enumerate(system.channels):
                sl = slice(nb + ci * nk, nb + (ci + 1) * nk)
                v_inter[sl] = half * inter.z_to_continuum.get(wave, 0.0) * sqde
            hubs.append((2 + i, 1, v_inter))
    return diag, hubs


def _drive_factors(system: EssentialStatesSystem, pulse: PulseParams,
                   t: float) -> tuple[complex, complex]:
    """(one-photon, two-photon) coupling factors at time t.

    Everything propagates in the rotating frame.  Under the RWA the
    factors are real envelope powers.  In full_oscillating mode the
    counter-rotating halves of the sine drive are kept: one-photon
    couplings pick up (1 - e^{-2iwt}), the reduced two-photon coupling
    -(1 + e^{-4iwt}) from the oscillating part of the squared drive.  A
    full-mode flat top ramps on and off with a half-cycle sine over one
    optical cycle so the drive has no envelope step.
    """
    if pulse.envelope is Envelope.FLAT_TOP:
        env = 1.0
        if system.coupling_mode == "full_oscillating":
            cycle = 2.0 * math.pi / pulse.omega
            if t < cycle:
                env = math.sin(0.5 * math.pi * t / cycle)
            elif t > pulse.duration - cycle:
                env = math.sin(0.5 * math.pi * max(pulse.duration - t, 0.0) / cycle)
    else:
        tc = 0.5 * _propagation_window(pulse)
        env = math.exp(-2.0 * math.log(2.0) * (t - tc) ** 2 / pulse.duration**2)
    if system.coupling_mode == "rwa":
        return env, env * env
    counter = np.exp(-2j * pulse.omega * t)
    return env * (1.0 - counter), -(env * env) * (1.0 + counter * counter)


def _propagation_window(pulse: PulseParams) -> float:
    if pulse.envelope is Envelope.FLAT_TOP:
        return pulse.duration
    return 5.0 * pulse.duration  # +-2.5 tau around the Gaussian center


def default_time_step(system: EssentialStatesSystem, pulse: PulseParams) -> float:
    if system.coupling_mode == "full_oscillating":
        return 0.1 / pulse.omega
    return 0.5


def propagate(system: EssentialStatesSystem, pulse: PulseParams,
              dt: float | None = None, observer_stride: int = 25,
              norm_tol: float = 1e-6) -> PropagationResult:
    """Norm-preserving propagation from t = 0 to the end of the pulse.

    Starts in the ground state.  Implicit midpoint steps with the
    Hamiltonian evaluated mid-step; every ``observer_stride`` steps the
    bound populations and the total norm are recorded.
    """
    if dt is None:
        dt = default_time_step(system, pulse)
    if system.coupling_mode == "full_oscillating" and pulse.omega * dt > 0.2:
        raise ValueError("dt too coarse for the carrier (need omega*dt <= 0.2)")
    if system.bin_energies is not None:
        line = 2.0 * pulse.omega - system.atom.ionization_potential
        if not system.bin_energies[0] < line < system.bin_energies[-1]:
            raise ValueError("continuum window excludes the two-photon line "
                             "at this carrier frequency")

    diag, hubs = _hamiltonian_parts(system, pulse)
    n = diag.size
    nb = len(system.bound_labels)
    t_end = _propagation_window(pulse)
    n_steps = max(1, int(math.ceil(t_end / dt)))
    dt = t_end / n_steps

    psi = np.zeros(n, dtype=complex)
    psi[0] = 1.0
    times = [0.0]
    norms = [1.0]
    pops = {label: [abs(psi[i]) ** 2] for i, label in
            enumerate(system.bound_labels)}

    hub_idx = sorted({h for h, _, _ in hubs})
    mu = 0.5j * dt
    t = 0.0
    for step in range(n_steps):
        f1, f2 = _drive_factors(system, pulse, t + 0.5 * dt)
        factors = {1: f1, 2: f2}
        vecs = [(h, factors[p] * v) for h, p, v in hubs]
        # rhs = (I - mu H) psi
        rhs = (1.0 - mu * diag) * psi
        for h, v in vecs:
            rhs[h] -= mu * (v @ psi)
            rhs -= mu * v * psi[h]
        # solve (I + mu H) x = rhs by eliminating the diagonal bin block
        dplus = 1.0 + mu * diag
        nh = len(hub_idx)
        a_hh = np.zeros((nh, nh), dtype=complex)
        for r, i in enumerate(hub_idx):
            a_hh[r, r] = dplus[i]
        b_rows = np.zeros((nh, n), dtype=complex)  # couplings hub -> all
        for h, v in vecs:
            r = hub_idx.index(h)
            b_rows[r] += mu * v
        # hub-hub block is symmetric: entries come from both paired vectors
        a_hh += b_rows[:, hub_idx] + b_rows[:, hub_idx].T
        mask = np.ones(n, dtype=bool)
        mask[hub_idx] = False
        b_k = b_rows[:, mask]
        inv_dk = 1.0 / dplus[mask]
        r_k = rhs[mask]
        schur = a_hh - (b_k * inv_dk) @ b_k.T
        r_h = rhs[hub_idx] - (b_k * inv_dk) @ r_k
        x_h = np.linalg.solve(schur, r_h)
        x = np.empty(n, dtype=complex)
        x[hub_idx] = x_h
        x[mask] = (r_k - b_k.T @ x_h) * inv_dk
        psi = x
        t += dt
        if (step + 1) % observer_stride == 0 or step == n_steps - 1:
            norm = float(np.sqrt(np.sum(np.abs(psi) ** 2)))
            if abs(norm - 1.0) > norm_tol:
                raise StepSizeError(f"norm drifted to {norm} at t={t}")
            times.append(t)
            norms.append(norm)
            for i, label in enumerate(system.bound_labels):
                pops[label].append(abs(psi[i]) ** 2)

    nk = 0 if system.bin_energies is None else system.bin_energies.size
    amps = {}
    for ci, wave in enumerate(system.channels):
        sl = slice(nb + ci * nk, nb + (ci + 1) * nk)
        amps[wave] = psi[sl].copy()
    return PropagationResult(
        times=np.asarray(times),
        bound_populations={k: np.asarray(v) for k, v in pops.items()},
        norm_history=np.asarray(norms),
        continuum_amplitudes=amps,
        bin_energies=None if system.bin_energies is None
        else system.bin_energies.copy(),
        bin_spacing=system.bin_spacing if nk else None,
        dt=dt,
        coupling_mode=system.coupling_mode,
        channels=system.channels,
    )


def oracle_spectrum(result: PropagationResult, grid: SpectrumGrid) -> Spectrum:
    """Interpolate final bin populations onto a grid as a spectral density.

    The density is the derivative of the monotone-cubic interpolant of
    the cumulative bin population over the bin edges, which keeps the
    density nonnegative and the integrated probability exact.  Bin
    phases are frame dependent and are dropped; channel amplitudes are
    sqrt(density).
    """
    if result.bin_energies is None:
        raise ValueError("propagation had no continuum bins")
    de = result.bin_spacing
    edges = np.concatenate((result.bin_energies - 0.5 * de,
                            result.bin_energies[-1:] + 0.5 * de))
    if grid.energies[0] < edges[0] or grid.energies[-1] > edges[-1]:
        raise ValueError("grid extends outside the continuum bin window")
    channels = {}
    for wave, amps in result.continuum_amplitudes.items():
        cdf = np.concatenate(([0.0], np.cumsum(np.abs(amps) ** 2)))
        density = PchipInterpolator(edges, cdf).derivative()(grid.energies)
        channels[wave] = np.sqrt(np.clip(density, 0.0, None)) + 0j
    return Spectrum(grid=grid, channels=channels)
