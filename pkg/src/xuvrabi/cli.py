"""Command-line entry point: spectrum | scan | average | oracle | deconvolve.

Every command reads one JSON config, writes deterministic data files into
--out and drops a run_manifest.json whose "config" block reproduces the
run when fed back through --config.  Exit codes: 0 success, 2 config
error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .amplitudes import SELECTORS, single_atom_spectrum
from .config import (ConfigError, SharedConfig, _check_keys, _get_number,
                     _require_mapping, load_config, parse_beam,
                     parse_deconvolution, parse_shared)
from .deconv import convolve_gaussian, richardson_lucy_blind
from .focal import volume_averaged_spectrum
from .io import (read_signal_csv, write_populations_csv, write_propagation_json,
                 write_scan_csv, write_scan_json, write_signal_csv,
                 write_spectrum_csv, write_spectrum_json)
from .model import Envelope, PulseParams
from .oracle import StepSizeError, build_system, oracle_spectrum, propagate
from .rabi import RabiParams, excited_population
from .scans import (analyze_doublet, branch_gap_curve, buildup_sequence,
                    detuning_scan, min_branch_gap)
from .units import au_to_ev, ev_to_au, field_from_intensity, mev_to_au


class NumericalFailure(RuntimeError):
    pass


def _dataclass_summary(analysis) -> dict:
    return {
        "n_peaks": analysis.n_peaks,
        "positions_ev": list(analysis.positions_ev),
        "heights": list(analysis.heights),
        "splitting_ev": analysis.splitting_ev,
        "asymmetry": analysis.asymmetry,
    }


def _write_json(payload: dict, path: Path) -> None:
    path.write_text(json.dumps(payload, indent=1, sort_keys=True) + "\n")


def cmd_spectrum(shared: SharedConfig, outdir: Path, emit_plots: bool,
                 map_fn) -> list[Path]:
    node = _require_mapping(shared.raw.get("spectrum", {}), "spectrum")
    _check_keys(node, "spectrum", {"selectors", "times_rabi_periods"})
    selectors = node.get("selectors", list(SELECTORS))
    for sel in selectors:
        if sel not in SELECTORS:
            raise ConfigError(f"spectrum.selectors: unknown selector {sel!r}")
    times = node.get("times_rabi_periods")
    outputs = []
    analyses = {}
    spectra = {}
    for sel in selectors:
        if times:
            series = buildup_sequence(shared.atom, shared.pulse, times,
                                      shared.grid, sel, shared.two_photon)
            for m, spec in zip(times, series):
                tag = f"{sel}_{str(m).replace('.', 'p')}T"
                spectra[tag] = spec
                analyses[tag] = _dataclass_summary(analyze_doublet(spec))
        else:
            spec = single_atom_spectrum(shared.grid, shared.pulse.duration,
                                        shared.atom, shared.pulse,
                                        shared.two_photon, sel)
            spectra[sel] = spec
            analyses[sel] = _dataclass_summary(analyze_doublet(spec))
    for tag, spec in spectra.items():
        csv_path = outdir / f"spectrum_{tag}.csv"
        write_spectrum_csv(spec, csv_path)
        json_path = outdir / f"spectrum_{tag}.json"
        write_spectrum_json(spec, json_path)
        outputs += [csv_path, json_path]
    analysis_path = outdir / "doublet_analysis.json"
    _write_json(analyses, analysis_path)
    outputs.append(analysis_path)
    if emit_plots:
        from . import plots
        fig_path = outdir / "spectrum.png"
        plots.spectrum_figure(spectra, fig_path)
        outputs.append(fig_path)
    return outputs


def cmd_scan(shared: SharedConfig, outdir: Path, emit_plots: bool,
             map_fn) -> list[Path]:
    node = _require_mapping(shared.raw.get("scan", {}), "scan")
    _check_keys(node, "scan", {"detuning_min_mev", "detuning_max_mev", "steps",
                               "selector", "volume_average", "beam"})
    lo = mev_to_au(_get_number(node, "scan", "detuning_min_mev", -150.0))
    hi = mev_to_au(_get_number(node, "scan", "detuning_max_mev", 150.0))
    steps = int(_get_number(node, "scan", "steps", 61))
    if steps < 2 or not lo < hi:
        raise ConfigError("scan: need detuning_min_mev < detuning_max_mev "
                          "and steps >= 2")
    selector = node.get("selector", "coherent_total")
    if selector not in SELECTORS:
        raise ConfigError(f"scan.selector: unknown selector {selector!r}")
    spectrum_fn = None
    if node.get("volume_average"):
        if "beam" not in node:
            raise ConfigError("scan.beam: required when volume_average is on")
        geom = parse_beam(node["beam"], "scan.beam")

        def spectrum_fn(grid, t, atom, pulse, opts, sel):
            return volume_averaged_spectrum(grid, t, atom, pulse, geom,
                                            sel, opts).spectrum

    detunings = np.linspace(lo, hi, steps)
    scan = detuning_scan(shared.atom, shared.pulse, detunings, shared.grid,
                         selector, shared.two_photon, spectrum_fn, map_fn)
    csv_path = outdir / "scan.csv"
    write_scan_csv(scan, csv_path)
    json_path = outdir / "scan.json"
    write_scan_json(scan, json_path)
    dets_mev, gaps_mev = branch_gap_curve(scan, shared.atom)
    gap, at = min_branch_gap(scan, shared.atom)
    gaps_path = outdir / "branch_gaps.json"
    _write_json({
        "detuning_mev": [float(d) for d in dets_mev],
        "gap_mev": [None if np.isnan(g) else float(g) for g in gaps_mev],
        "min_gap_mev": gap,
        "min_gap_detuning_mev": at,
        "rabi_energy_mev": float(au_to_ev(
            shared.pulse.rabi_frequency(shared.atom)) * 1e3),
    }, gaps_path)
    outputs = [csv_path, json_path, gaps_path]
    if emit_plots:
        from . import plots
        fig_path = outdir / "scan.png"
        plots.scan_figure(scan, shared.atom, shared.pulse, fig_path)
        outputs.append(fig_path)
    return outputs


def cmd_average(shared: SharedConfig, outdir: Path, emit_plots: bool,
                map_fn) -> list[Path]:
    node = _require_mapping(shared.raw.get("average", {}), "average")
    _check_keys(node, "average", {"beam", "selectors", "nz", "nrho",
                                  "cache_points", "use_cache"})
    if "beam" not in node:
        raise ConfigError("average.beam: section missing")
    geom = parse_beam(node["beam"])
    selectors = node.get("selectors", ["two_photon_only", "one_photon_only"])
    nz = int(_get_number(node, "average", "nz", 65))
    nrho = int(_get_number(node, "average", "nrho", 129))
    outputs = []
    summary = {}
    for sel in selectors:
        if sel not in SELECTORS:
            raise ConfigError(f"average.selectors: unknown selector {sel!r}")
        pulse = shared.pulse
        result = volume_averaged_spectrum(
            shared.grid, pulse.duration, shared.atom, pulse, geom, sel,
            shared.two_photon, nz=nz, nrho=nrho,
            use_cache=bool(node.get("use_cache", True)),
            cache_points=int(_get_number(node, "average", "cache_points", 200)))
        single = single_atom_spectrum(
            shared.grid, pulse.duration, shared.atom,
            pulse.with_field(field_from_intensity(geom.peak_intensity_w_cm2)),
            shared.two_photon, sel)
        avg_csv = outdir / f"averaged_{sel}.csv"
        write_spectrum_csv(result.spectrum, avg_csv, per_channel=False)
        single_csv = outdir / f"single_atom_{sel}.csv"
        write_spectrum_csv(single, single_csv)
        outputs += [avg_csv, single_csv]
        summary[sel] = {
            "quadrature_error_estimate": result.error_estimate,
            "nz": result.nz, "nrho": result.nrho,
            "averaged_doublet": _dataclass_summary(
                analyze_doublet(result.spectrum)),
            "single_atom_doublet": _dataclass_summary(analyze_doublet(single)),
        }
        if emit_plots:
            from . import plots
            fig_path = outdir / f"averaging_{sel}.png"
            plots.averaging_figure(single, result.spectrum, fig_path, sel)
            outputs.append(fig_path)
    summary_path = outdir / "averaging_summary.json"
    _write_json(summary, summary_path)
    outputs.append(summary_path)
    return outputs


def cmd_oracle(shared: SharedConfig, outdir: Path, emit_plots: bool,
               map_fn) -> list[Path]:
    node = _require_mapping(shared.raw.get("oracle", {}), "oracle")
    _check_keys(node, "oracle", {"mode", "bins_per_channel", "channels",
                                 "window_half_width_ev", "dt_au",
                                 "observer_stride", "one_photon", "two_photon"})
    mode = node.get("mode", "rwa")
    n_bins = int(_get_number(node, "oracle", "bins_per_channel", 1024))
    channels = node.get("channels", ["s", "d"])
    half = _get_number(node, "oracle", "window_half_width_ev", 1.5)
    line = shared.atom.two_photon_line
    try:
        system = build_system(
            shared.atom, line - ev_to_au(half), line + ev_to_au(half),
            n_bins, mode, channels,
            include_one_photon=bool(node.get("one_photon", True)),
            include_two_photon=bool(node.get("two_photon", True)))
        dt = node.get("dt_au")
        result = propagate(system, shared.pulse, dt,
                           int(_get_number(node, "oracle",
                                           "observer_stride", 25)))
    except (ValueError, StepSizeError) as exc:
        raise NumericalFailure(str(exc))
    pops_csv = outdir / "populations.csv"
    write_populations_csv(result, pops_csv)
    prop_json = outdir / "propagation.json"
    write_propagation_json(result, prop_json)
    outputs = [pops_csv, prop_json]
    if (system.n_bins == 0 and shared.pulse.envelope is Envelope.FLAT_TOP
            and mode == "rwa"):
        params = RabiParams.from_atom_pulse(shared.atom, shared.pulse)
        model = excited_population(result.times, params)
        model_csv = outdir / "excited_population_model.csv"
        write_signal_csv(result.times, model, model_csv,
                         names=("time_au", "pop_excited_model"))
        outputs.append(model_csv)
    if system.n_bins:
        spec = oracle_spectrum(result, shared.grid)
        spec_csv = outdir / "oracle_spectrum.csv"
        write_spectrum_csv(spec, spec_csv, per_channel=False)
        outputs.append(spec_csv)
    if emit_plots:
        from . import plots
        fig_path = outdir / "populations.png"
        plots.populations_figure(result, fig_path)
        outputs.append(fig_path)
    return outputs


def cmd_deconvolve(shared: SharedConfig, outdir: Path, emit_plots: bool,
                   map_fn) -> list[Path]:
    node = _require_mapping(shared.raw.get("deconvolve", {}), "deconvolve")
    config = parse_deconvolution(node)
    outputs = []
    if "input_csv" in node:
        x_ev, measured = read_signal_csv(node["input_csv"])
        measured = np.clip(measured, 0.0, None)
    else:
        syn = _require_mapping(node.get("synthetic", {}), "deconvolve.synthetic")
        _check_keys(syn, "deconvolve.synthetic",
                    {"selector", "blur_fwhm_mev", "noise_sigma_frac", "seed"})
        selector = syn.get("selector", "one_photon_only")
        if selector not in SELECTORS:
            raise ConfigError("deconvolve.synthetic.selector: unknown "
                              f"selector {selector!r}")
        truth = single_atom_spectrum(shared.grid, shared.pulse.duration,
                                     shared.atom, shared.pulse,
                                     shared.two_photon, selector).intensity
        x_ev = shared.grid.energies_ev
        blur = 1e-3 * _get_number(syn, "deconvolve.synthetic",
                                  "blur_fwhm_mev", 70.0)
        measured = convolve_gaussian(truth, blur, x_ev)
        sigma = _get_number(syn, "deconvolve.synthetic", "noise_sigma_frac", 0.0)
        if sigma > 0:
            if "seed" not in syn:
                raise ConfigError("deconvolve.synthetic.seed: required when "
                                  "noise is requested")
            rng = np.random.default_rng(int(syn["seed"]))
            measured = measured + sigma * measured.max() \
                * rng.standard_normal(measured.size)
            measured = np.clip(measured, 0.0, None)
        truth_csv = outdir / "synthetic_truth.csv"
        write_signal_csv(x_ev, truth, truth_csv)
        outputs.append(truth_csv)
    result = richardson_lucy_blind(measured, config, x_ev)
    est_csv = outdir / "deconvolved.csv"
    write_signal_csv(x_ev, result.estimate, est_csv,
                     names=("energy_ev", "estimate"))
    psf_csv = outdir / "kernel.csv"
    write_signal_csv(np.arange(result.psf.size), result.psf, psf_csv,
                     names=("sample", "weight"))
    meta_path = outdir / "deconvolution.json"
    _write_json({
        "psf_fwhm_ev": result.psf_fwhm_ev,
        "rounds_run": result.rounds_run,
        "diverged": result.diverged,
        "residual_norms": [float(r) for r in result.residual_norms],
        "flux_history": [float(f) for f in result.flux_history],
    }, meta_path)
    outputs += [est_csv, psf_csv, meta_path]
    if emit_plots:
        from . import plots
        fig_path = outdir / "deconvolution.png"
        plots.deconvolution_figure(x_ev, measured, result.estimate,
                                   result.psf, fig_path)
        outputs.append(fig_path)
    return outputs


COMMANDS = {
    "spectrum": cmd_spectrum,
    "scan": cmd_scan,
    "average": cmd_average,
    "oracle": cmd_oracle,
    "deconvolve": cmd_deconvolve,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xuvrabi",
        description="Two-level Rabi dynamics and photoionization spectra "
                    "driven by intense short-wavelength pulses.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--emit-plots", action="store_true",
                       help="also render PNG figures")
        p.add_argument("--threads", type=int, default=1,
                       help="worker threads for scan columns")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    outdir = Path(args.out)
    try:
        config = load_config(args.config)
        shared = parse_shared(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    outdir.mkdir(parents=True, exist_ok=True)
    pool = None
    map_fn = map
    if args.threads > 1:
        pool = ThreadPoolExecutor(max_workers=args.threads)
        map_fn = pool.map
    try:
        outputs = COMMANDS[args.command](shared, outdir, args.emit_plots,
                                         map_fn)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (NumericalFailure, FloatingPointError, np.linalg.LinAlgError,
            ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    finally:
        if pool is not None:
            pool.shutdown()
    manifest = {
        "command": args.command,
        "config": shared.raw,
        "versions": {
            "xuvrabi": __version__,
            "python": sys.version.split()[0],
            "numpy": np.__version__,
        },
        "outputs": [p.name for p in outputs],
    }
    _write_json(manifest, outdir / "run_manifest.json")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
