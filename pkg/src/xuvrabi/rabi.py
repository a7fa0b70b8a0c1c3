"""Closed-form two-level Rabi dynamics in the rotating wave approximation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import AtomModel, PulseParams


@dataclass(frozen=True)
class RabiParams:
    """Coupling strength and detuning of the driven two-level system."""

    omega_rabi: float
    detuning: float

    def __post_init__(self):
        if self.omega_rabi < 0:
            raise ValueError("Rabi frequency must be >= 0")

    @property
    def generalized(self) -> float:
        """Generalized Rabi frequency W = sqrt(Omega^2 + detuning^2)."""
        return math.hypot(self.omega_rabi, self.detuning)

    @classmethod
    def from_atom_pulse(cls, atom: AtomModel, pulse: PulseParams) -> "RabiParams":
        return cls(omega_rabi=pulse.rabi_frequency(atom),
                   detuning=pulse.detuning(atom))


@dataclass(frozen=True)
class RabiAmplitudes:
    """Ground and excited amplitudes at time t (interaction picture)."""

    a: complex | np.ndarray
    b: complex | np.ndarray
    t: float | np.ndarray


def rabi_amplitudes(t, params: RabiParams) -> RabiAmplitudes:
    """Amplitudes of a flat-top-driven two-level atom starting in the ground state.

    a(t) = [cos(Wt/2) - i (dw/W) sin(Wt/2)] e^{+i dw t/2}
    b(t) = -i (Omega/W) sin(Wt/2) e^{-i dw t/2}

    The degenerate W = 0 case (no coupling, no detuning) returns (1, 0).
    """
    t = np.asarray(t, dtype=float)
    if (t < 0).any():
        raise ValueError("time must be >= 0")
    w = params.generalized
    if w == 0.0:
        one = np.ones(t.shape, dtype=complex)
        zero = np.zeros(t.shape, dtype=complex)
        if t.ndim == 0:
            return RabiAmplitudes(a=1.0 + 0j, b=0.0 + 0j, t=float(t))
        return RabiAmplitudes(a=one, b=zero, t=t)
    dw = params.detuning
    half = 0.5 * w * t
    a = (np.cos(half) - 1j * (dw / w) * np.sin(half)) * np.exp(0.5j * dw * t)
    b = -1j * (params.omega_rabi / w) * np.sin(half) * np.exp(-0.5j * dw * t)
    if t.ndim == 0:
        return RabiAmplitudes(a=complex(a), b=complex(b), t=float(t))
    return RabiAmplitudes(a=a, b=b, t=t)


def excited_population(t, params: RabiParams):
    """P_b(t) = (Omega/W)^2 sin^2(Wt/2)."""
    t = np.asarray(t, dtype=float)
    if (t < 0).any():
        raise ValueError("time must be >= 0")
    w = params.generalized
    if w == 0.0:
        out = np.zeros(t.shape)
        return float(out) if t.ndim == 0 else out
    out = (params.omega_rabi / w) ** 2 * np.sin(0.5 * w * t) ** 2
    return float(out) if t.ndim == 0 else out


def dressed_energies(atom: AtomModel, pulse: PulseParams) -> tuple[float, float]:
    """Coupled atom-field energies (eps_plus, eps_minus) on the atomic scale.

    eps_pm = (eps_ground + eps_excited + omega +- W) / 2; their gap is W.
    """
    p = RabiParams.from_atom_pulse(atom, pulse)
    center = 0.5 * (atom.eps_ground + atom.eps_excited + pulse.omega)
    half_gap = 0.5 * p.generalized
    return center + half_gap, center - half_gap


def dressed_kinetic_energies(atom: AtomModel, pulse: PulseParams) -> tuple[float, float]:
    """Photoelectron kinetic energies one photon above the dressed states.

    With continuum energies measured from threshold this is simply
    eps_pm + omega; equivalently (dressed energy above the ground state)
    + omega - Ip.
    """
    e_plus, e_minus = dressed_energies(atom, pulse)
    return e_plus + pulse.omega, e_minus + pulse.omega
