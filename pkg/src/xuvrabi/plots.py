"""Matplotlib rendering of command outputs (PNG files next to the data)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .model import AtomModel, PulseParams, Spectrum  # noqa: E402
from .oracle import PropagationResult  # noqa: E402
from .rabi import dressed_kinetic_energies  # noqa: E402
from .scans import ScanResult2D  # noqa: E402
from .units import au_to_ev, au_to_fs  # noqa: E402


def spectrum_figure(spectra: dict[str, Spectrum], path) -> None:
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for label, spec in spectra.items():
        ax.plot(spec.grid.energies_ev, spec.intensity, label=label, lw=1.2)
    ax.set_xlabel("kinetic energy (eV)")
    ax.set_ylabel("signal (arb. u.)")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=160)
    plt.close(fig)


def scan_figure(scan: ScanResult2D, atom: AtomModel, pulse: PulseParams,
                path) -> None:
    """Heat map of the detuning scan with the dressed-branch overlay."""
    fig, ax = plt.subplots(figsize=(6.0, 4.4))
    mesh = ax.pcolormesh(scan.photon_energies_ev, scan.kinetic_energies_ev,
                         scan.intensity, shading="auto", cmap="inferno")
    fig.colorbar(mesh, ax=ax, label="signal (arb. u.)")
    omegas = scan.photon_energies_ev / au_to_ev(1.0)
    upper, lower = [], []
    for omega in omegas:
        pulse_i = PulseParams(e0=pulse.e0, omega=float(omega),
                              envelope=pulse.envelope, duration=pulse.duration)
        ek_p, ek_m = dressed_kinetic_energies(atom, pulse_i)
        upper.append(au_to_ev(ek_p))
        lower.append(au_to_ev(ek_m))
    ax.plot(scan.photon_energies_ev, upper, "w--", lw=0.9)
    ax.plot(scan.photon_energies_ev, lower, "w--", lw=0.9)
    ax.axvline(au_to_ev(atom.transition_energy), color="w", ls=":", lw=0.8)
    ax.set_xlabel("photon energy (eV)")
    ax.set_ylabel("kinetic energy (eV)")
    fig.tight_layout()
    fig.savefig(path, dpi=160)
    plt.close(fig)


def populations_figure(result: PropagationResult, path) -> None:
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    t_fs = au_to_fs(result.times)
    for label, pop in result.bound_populations.items():
        ax.plot(t_fs, pop, label=label, lw=1.2)
    ionized = 1.0 - sum(np.asarray(p) for p in result.bound_populations.values())
    ax.plot(t_fs, ionized, label="continuum", lw=1.0, ls="--")
    ax.set_xlabel("time (fs)")
    ax.set_ylabel("population")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=160)
    plt.close(fig)


def averaging_figure(single: Spectrum, averaged: Spectrum, path,
                     label: str = "") -> None:
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    x = single.grid.energies_ev
    y1 = single.intensity
    y2 = averaged.intensity
    ax.plot(x, y1 / y1.max(), label=f"single atom {label}".strip(), lw=1.2)
    ax.plot(x, y2 / y2.max(), label=f"volume averaged {label}".strip(),
            lw=1.2, ls="--")
    ax.set_xlabel("kinetic energy (eV)")
    ax.set_ylabel("signal (normalized)")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=160)
    plt.close(fig)


def deconvolution_figure(x_ev: np.ndarray, measured: np.ndarray,
                         estimate: np.ndarray, psf: np.ndarray, path) -> None:
    fig, (ax, axk) = plt.subplots(1, 2, figsize=(8.0, 4.0),
                                  gridspec_kw={"width_ratios": (3, 1)})
    ax.plot(x_ev, measured, label="measured", lw=1.0, color="0.5")
    ax.plot(x_ev, estimate, label="deconvolved", lw=1.2, color="C3")
    ax.set_xlabel("energy (eV)")
    ax.set_ylabel("counts")
    ax.legend(fontsize=8)
    axk.plot(np.arange(psf.size), psf, lw=1.0)
    axk.set_xlabel("kernel sample")
    axk.set_ylabel("weight")
    fig.tight_layout()
    fig.savefig(path, dpi=160)
    plt.close(fig)
