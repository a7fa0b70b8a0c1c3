"""Delimited and JSON serialization of spectra, scans and propagation runs.

Numbers are written with repr-faithful precision and '\n' newlines so a
rerun on the same inputs produces byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .model import Spectrum, SpectrumGrid
from .oracle import PropagationResult
from .scans import ScanResult2D
from .units import HARTREE_EV, au_to_fs


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_spectrum_csv(spectrum: Spectrum, path, per_channel: bool = True) -> None:
    """Two-column CSV (kinetic energy eV, intensity), optionally with the
    per-channel complex amplitudes appended as re/im column pairs."""
    waves = sorted(spectrum.channels)
    header = ["kinetic_energy_ev", "intensity"]
    if per_channel:
        for w in waves:
            header += [f"{w}_re", f"{w}_im"]
    rows = [",".join(header)]
    energies = spectrum.grid.energies_ev
    intensity = spectrum.intensity
    for i in range(len(energies)):
        cells = [_fmt(energies[i]), _fmt(intensity[i])]
        if per_channel:
            for w in waves:
                amp = spectrum.channels[w][i]
                cells += [_fmt(amp.real), _fmt(amp.imag)]
        rows.append(",".join(cells))
    Path(path).write_text("\n".join(rows) + "\n")


def spectrum_to_json(spectrum: Spectrum) -> dict:
    return {
        "kinetic_energy_ev": [float(e) for e in spectrum.grid.energies_ev],
        "intensity": [float(v) for v in spectrum.intensity],
        "channels": {
            w: [[float(a.real), float(a.imag)] for a in amp]
            for w, amp in sorted(spectrum.channels.items())
        },
    }


def spectrum_from_json(payload: dict) -> Spectrum:
    grid = SpectrumGrid(np.asarray(payload["kinetic_energy_ev"]) / HARTREE_EV)
    channels = {w: np.array([complex(re, im) for re, im in pairs])
                for w, pairs in payload["channels"].items()}
    return Spectrum(grid=grid, channels=channels)


def write_spectrum_json(spectrum: Spectrum, path) -> None:
    Path(path).write_text(json.dumps(spectrum_to_json(spectrum), indent=1)
                          + "\n")


def write_scan_csv(scan: ScanResult2D, path) -> None:
    """Matrix CSV: first row photon energies (eV), first column kinetic
    energies (eV), body the intensity."""
    rows = ["kinetic_energy_ev\\photon_energy_ev,"
            + ",".join(_fmt(p) for p in scan.photon_energies_ev)]
    for i, ek in enumerate(scan.kinetic_energies_ev):
        rows.append(_fmt(ek) + ","
                    + ",".join(_fmt(v) for v in scan.intensity[i]))
    Path(path).write_text("\n".join(rows) + "\n")


def scan_to_json(scan: ScanResult2D) -> dict:
    return {
        "photon_energy_ev": [float(v) for v in scan.photon_energies_ev],
        "kinetic_energy_ev": [float(v) for v in scan.kinetic_energies_ev],
        "intensity": [[float(v) for v in row] for row in scan.intensity],
        "metadata": scan.metadata,
    }


def write_scan_json(scan: ScanResult2D, path) -> None:
    Path(path).write_text(json.dumps(scan_to_json(scan), indent=1) + "\n")


def write_propagation_json(result: PropagationResult, path) -> None:
    payload = {
        "dt_au": result.dt,
        "coupling_mode": result.coupling_mode,
        "times_au": [float(t) for t in result.times],
        "bound_populations": {k: [float(p) for p in v]
                              for k, v in result.bound_populations.items()},
        "norm_history": [float(v) for v in result.norm_history],
    }
    Path(path).write_text(json.dumps(payload, indent=1) + "\n")


def write_populations_csv(result: PropagationResult, path) -> None:
    labels = list(result.bound_populations)
    rows = [",".join(["time_au", "time_fs", "norm"] + [f"pop_{k}" for k in labels])]
    for i, t in enumerate(result.times):
        cells = [_fmt(t), _fmt(au_to_fs(t)), _fmt(result.norm_history[i])]
        cells += [_fmt(result.bound_populations[k][i]) for k in labels]
        rows.append(",".join(cells))
    Path(path).write_text("\n".join(rows) + "\n")


def read_signal_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Two-column (energy eV, counts) reader; tolerates a header line."""
    lines = Path(path).read_text().strip().splitlines()
    x, y = [], []
    for line in lines:
        parts = [p.strip() for p in line.split(",")]
        if len(parts) < 2:
            continue
        try:
            xv, yv = float(parts[0]), float(parts[1])
        except ValueError:
            continue  # header
        x.append(xv)
        y.append(yv)
    if len(x) < 2:
        raise ValueError(f"no numeric two-column data found in {path}")
    return np.asarray(x), np.asarray(y)


def write_signal_csv(x_ev: np.ndarray, y: np.ndarray, path,
                     names: tuple[str, str] = ("energy_ev", "counts")) -> None:
    rows = [",".join(names)]
    rows += [f"{_fmt(a)},{_fmt(b)}" for a, b in zip(x_ev, y)]
    Path(path).write_text("\n".join(rows) + "\n")
