import numpy as np
import pytest

from xuvrabi.model import SpectrumGrid, flat_top_pulse, helium_cis
from xuvrabi.scans import (analyze_doublet, analyze_intensity,
                           branch_gap_curve, buildup_sequence,
                           central_dip_present, detuning_scan,
                           find_symmetric_detuning, min_branch_gap)
from xuvrabi.amplitudes import single_atom_spectrum
from xuvrabi.units import au_to_ev, mev_to_au

ATOM = helium_cis()
GRID = SpectrumGrid.around_line(ATOM)


def _pulse(rabi_periods=1.5, detuning_mev=0.0):
    return flat_top_pulse(ATOM, intensity_w_cm2=2e13,
                          rabi_periods=rabi_periods,
                          detuning=mev_to_au(detuning_mev))


def test_synthetic_double_gaussian():
    x = np.linspace(-0.3, 0.3, 1201)
    sigma = 0.012
    y = np.exp(-0.5 * ((x - 0.04) / sigma) ** 2) \
        + np.exp(-0.5 * ((x + 0.04) / sigma) ** 2)
    res = analyze_intensity(x, y)
    assert res.n_peaks == 2
    assert res.splitting_ev * 1e3 == pytest.approx(80.0, abs=0.5)
    assert abs(res.asymmetry) < 1e-6


def test_single_peak_report():
    x = np.linspace(-0.3, 0.3, 601)
    y = np.exp(-0.5 * (x / 0.05) ** 2)
    res = analyze_intensity(x, y)
    assert res.n_peaks == 1
    assert res.splitting_ev is None
    assert res.asymmetry is None


def test_one_photon_symmetric_at_resonance():
    pulse = _pulse()
    spec = single_atom_spectrum(GRID, pulse.duration, ATOM, pulse,
                                selector="one_photon_only")
    res = analyze_doublet(spec)
    assert abs(res.asymmetry) < 1e-6


def test_asymmetry_odd_in_detuning_one_photon():
    for dw in (15.0, 40.0, 75.0):
        plus = analyze_doublet(single_atom_spectrum(
            GRID, _pulse(detuning_mev=dw).duration, ATOM,
            _pulse(detuning_mev=dw), selector="one_photon_only"))
        minus = analyze_doublet(single_atom_spectrum(
            GRID, _pulse(detuning_mev=-dw).duration, ATOM,
            _pulse(detuning_mev=-dw), selector="one_photon_only"))
        assert plus.asymmetry == pytest.approx(-minus.asymmetry, abs=1e-9)


def test_find_symmetric_detuning_pathways():
    window = (mev_to_au(-20.0), mev_to_au(20.0))
    for selector in ("one_photon_only", "two_photon_only"):
        root = find_symmetric_detuning(ATOM, _pulse(), window, selector,
                                       grid=GRID)
        assert abs(au_to_ev(root) * 1e3) <= 0.5
    root = find_symmetric_detuning(ATOM, _pulse(),
                                   (mev_to_au(10.0), mev_to_au(100.0)),
                                   "coherent_total", grid=GRID)
    assert au_to_ev(root) * 1e3 == pytest.approx(63.0, abs=2.0)


def test_find_symmetric_detuning_needs_sign_change():
    with pytest.raises(ValueError, match="sign"):
        find_symmetric_detuning(ATOM, _pulse(),
                                (mev_to_au(80.0), mev_to_au(100.0)),
                                "coherent_total", grid=GRID)


def test_uncoupled_limit_follows_two_photon_line():
    """Tiny coupling: the two-photon ridge sits at 2*omega - Ip."""
    pulse = flat_top_pulse(ATOM, e0=1e-4, duration=3000.0)
    for dw_mev in (-120.0, -40.0, 60.0, 140.0):
        dw = mev_to_au(dw_mev)
        p = flat_top_pulse(ATOM, e0=1e-4, duration=3000.0, detuning=dw)
        spec = single_atom_spectrum(GRID, p.duration, ATOM, p,
                                    selector="two_photon_only")
        line = 2 * p.omega - ATOM.ionization_potential
        peak = GRID.energies[np.argmax(spec.intensity)]
        assert abs(peak - line) <= 1.5 * GRID.step
    assert pulse.rabi_frequency(ATOM) < GRID.step  # splitting unresolvable


def test_detuning_scan_shapes_and_metadata():
    detunings = mev_to_au(np.linspace(-40, 40, 9))
    scan = detuning_scan(ATOM, _pulse(), detunings, GRID)
    assert scan.intensity.shape == (len(GRID), 9)
    assert scan.metadata["selector"] == "coherent_total"
    assert (scan.intensity >= 0).all()
    # photon energy axis matches transition + detuning
    assert scan.photon_energies_ev[0] == pytest.approx(
        au_to_ev(ATOM.transition_energy + detunings[0]))
    with pytest.raises(ValueError):
        detuning_scan(ATOM, _pulse(), [], GRID)


def test_branch_gap_minimum_near_resonance():
    detunings = mev_to_au(np.arange(-150.0, 150.1, 5.0))
    scan = detuning_scan(ATOM, _pulse(), detunings, GRID)
    gap, at = min_branch_gap(scan, ATOM)
    omega_r_mev = au_to_ev(_pulse().rabi_frequency(ATOM)) * 1e3
    assert 0.9 * omega_r_mev <= gap <= 1.1 * omega_r_mev
    assert abs(at) <= 10.0  # minimum sits near resonance
    dets, gaps = branch_gap_curve(scan, ATOM)
    assert np.isfinite(gaps[np.abs(dets) < 30]).all()


def test_splitting_grows_with_generalized_frequency():
    """Extracted splitting tracks W once the lobe tails are subdominant.

    The lobe-overlap pull scales like 1/duration; at 6 periods it is
    below the 5 percent band for |detuning| <= Omega.
    """
    pulse = _pulse(rabi_periods=6.0)
    omega_r = pulse.rabi_frequency(ATOM)
    for frac in (-1.0, -0.5, 0.25, 0.75):
        dw = frac * omega_r
        p = flat_top_pulse(ATOM, intensity_w_cm2=2e13, rabi_periods=6.0,
                           detuning=dw)
        spec = single_atom_spectrum(GRID, p.duration, ATOM, p,
                                    selector="one_photon_only")
        res = analyze_doublet(spec)
        w_mev = au_to_ev(np.hypot(omega_r, dw)) * 1e3
        assert res.splitting_ev * 1e3 == pytest.approx(w_mev, rel=0.05)


def test_buildup_dip_ordering():
    """The ground-route dip forms strictly earlier than the excited-route dip.

    Neither dip exists at exactly half a period (the emitted amplitude is
    the transform of a nonnegative history there); the ground route digs
    its minimum after the half-period amplitude sign change, the excited
    route after the full-period one.
    """
    times = [0.5, 0.75, 1.0, 1.25, 1.5]
    two = buildup_sequence(ATOM, _pulse(), times, GRID, "two_photon_only")
    one = buildup_sequence(ATOM, _pulse(), times, GRID, "one_photon_only")

    def dips(series, periods):
        out = {}
        for m, spec in zip(periods, series):
            pulse = flat_top_pulse(ATOM, intensity_w_cm2=2e13, rabi_periods=m)
            out[m] = central_dip_present(spec, ATOM, pulse)
        return out

    dips_two = dips(two, times)
    dips_one = dips(one, times)
    assert not dips_two[0.5] and not dips_one[0.5]
    assert dips_two[0.75] and dips_two[1.0] and dips_two[1.5]
    assert not dips_one[1.0]
    assert dips_one[1.5]
    onset_two = min(m for m in times if dips_two[m])
    onset_one = min(m for m in times if dips_one[m])
    assert onset_two < onset_one


def test_buildup_single_lobed_one_photon_early():
    spec = buildup_sequence(ATOM, _pulse(), [0.5], GRID,
                            "one_photon_only")[0]
    res = analyze_doublet(spec)
    pulse = flat_top_pulse(ATOM, intensity_w_cm2=2e13, rabi_periods=0.5)
    assert not central_dip_present(spec, ATOM, pulse)
    # the brightest point is the doublet center itself
    center = au_to_ev(ATOM.two_photon_line)
    assert res.positions_ev[np.argmax(res.heights)] == pytest.approx(
        center, abs=1e-3)


def test_buildup_rejects_nonpositive_times():
    with pytest.raises(ValueError):
        buildup_sequence(ATOM, _pulse(), [0.0, 1.0], GRID)
