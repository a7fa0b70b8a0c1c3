import numpy as np
import pytest

from xuvrabi.amplitudes import single_atom_spectrum
from xuvrabi.focal import (BeamGeometry, IntensityCache, beam_intensity,
                           volume_averaged_spectrum)
from xuvrabi.model import SpectrumGrid, flat_top_pulse, helium_cis
from xuvrabi.scans import analyze_doublet
from xuvrabi.units import field_from_intensity, mev_to_au

ATOM = helium_cis()
GEOM = BeamGeometry(peak_intensity_w_cm2=2e13, waist_um=10.2,
                    rayleigh_um=6300.0, target_length_um=2000.0)


def _pulse(rabi_periods=1.5):
    return flat_top_pulse(ATOM, intensity_w_cm2=GEOM.peak_intensity_w_cm2,
                          rabi_periods=rabi_periods)


def test_beam_profile_points():
    assert beam_intensity(0.0, 0.0, GEOM) == pytest.approx(2e13)
    # one Rayleigh length downstream the on-axis intensity halves
    assert beam_intensity(0.0, GEOM.rayleigh_um, GEOM) == pytest.approx(1e13)
    # transverse half-max radius: exponent = -ln 2
    rho_half = GEOM.waist_um * np.sqrt(np.log(2.0) / 2.0)
    assert beam_intensity(rho_half, 0.0, GEOM) == pytest.approx(1e13)
    with pytest.raises(ValueError):
        beam_intensity(-1.0, 0.0, GEOM)
    with pytest.raises(ValueError):
        BeamGeometry(peak_intensity_w_cm2=0.0, waist_um=1.0,
                     rayleigh_um=1.0, target_length_um=1.0)


def test_uniform_beam_reduces_to_single_atom():
    """Constant-intensity hook: average = single atom x volume factor."""
    grid = SpectrumGrid.around_line(ATOM, n=401)
    pulse = _pulse()

    def flat(rho, z, geom):
        return np.broadcast_to(geom.peak_intensity_w_cm2,
                               np.broadcast_shapes(np.shape(rho), np.shape(z)))

    result = volume_averaged_spectrum(grid, pulse.duration, ATOM, pulse,
                                      GEOM, "coherent_total", nz=9, nrho=9,
                                      use_cache=False, intensity_fn=flat)
    single = single_atom_spectrum(
        grid, pulse.duration, ATOM,
        pulse.with_field(field_from_intensity(GEOM.peak_intensity_w_cm2)),
        selector="coherent_total")
    r_max = GEOM.rho_max_in_waists * GEOM.waist_um
    volume = 2 * np.pi * GEOM.target_length_um * 0.5 * r_max**2
    assert np.allclose(result.spectrum.intensity,
                       volume * single.intensity, rtol=1e-10)


def test_quadrature_convergence_under_doubling():
    grid = SpectrumGrid.around_line(ATOM, n=601)
    pulse = _pulse()
    base = volume_averaged_spectrum(grid, pulse.duration, ATOM, pulse, GEOM,
                                    "two_photon_only", nz=33, nrho=65)
    fine = volume_averaged_spectrum(grid, pulse.duration, ATOM, pulse, GEOM,
                                    "two_photon_only", nz=67, nrho=131)
    a, b = base.spectrum.intensity, fine.spectrum.intensity
    rel = np.linalg.norm(a - b) / np.linalg.norm(b)
    assert rel < 5e-3
    assert base.error_estimate < 5e-3


def test_cache_exact_at_nodes_and_accurate_between():
    grid = SpectrumGrid.around_line(ATOM, n=301)
    pulse = _pulse()
    cache = IntensityCache(grid, pulse.duration, ATOM, pulse,
                           "coherent_total", n_points=200)
    nodes = cache._frac_nodes
    direct = cache.direct(nodes)
    interp = cache(nodes)
    scale = np.abs(direct).max()
    assert np.max(np.abs(interp - direct)) <= 1e-10 * scale
    # off-node queries stay accurate and queries below the range fall back
    rng = np.random.default_rng(5)
    queries = np.sqrt(nodes[:-1] * nodes[1:])[rng.integers(0, 198, 40)]
    err = np.abs(cache(queries) - cache.direct(queries)).max()
    assert err <= 2e-4 * scale
    below = np.array([1e-6, 1e-5])
    assert np.allclose(cache(below), cache.direct(below))


def test_average_nonnegative_and_linear_in_signal():
    grid = SpectrumGrid.around_line(ATOM, n=201)
    pulse = _pulse()
    res = volume_averaged_spectrum(grid, pulse.duration, ATOM, pulse, GEOM,
                                   "one_photon_only", nz=17, nrho=33)
    assert (res.spectrum.intensity >= 0).all()
    # doubling every dipole doubles |c| and quadruples the averaged signal
    import dataclasses
    atom2 = dataclasses.replace(
        ATOM, z_one_photon={k: 2 * v for k, v in ATOM.z_one_photon.items()})
    res2 = volume_averaged_spectrum(grid, pulse.duration, atom2, pulse, GEOM,
                                    "one_photon_only", nz=17, nrho=33)
    ratio = res2.spectrum.intensity / np.where(res.spectrum.intensity > 0,
                                               res.spectrum.intensity, 1.0)
    mask = res.spectrum.intensity > 1e-12 * res.spectrum.intensity.max()
    assert np.allclose(ratio[mask], 4.0, rtol=1e-9)


def _dip_contrast(spectrum, atom):
    """Central value over the weaker flank peak; 1.0 when no dip exists."""
    from xuvrabi.units import au_to_ev
    res = analyze_doublet(spectrum)
    x = spectrum.grid.energies_ev
    center_ev = au_to_ev(atom.two_photon_line)
    y_c = spectrum.intensity[np.argmin(np.abs(x - center_ev))]
    if res.n_peaks < 2 or not res.positions_ev[0] < center_ev < res.positions_ev[1]:
        return 1.0
    return min(1.0, float(y_c / min(res.heights)))


def test_two_photon_shape_survives_averaging_better():
    """Averaging washes the excited-route dip out much faster."""
    grid = SpectrumGrid.around_line(ATOM)
    pulse = _pulse()
    e0 = field_from_intensity(GEOM.peak_intensity_w_cm2)
    degradation = {}
    for selector in ("two_photon_only", "one_photon_only"):
        avg = volume_averaged_spectrum(grid, pulse.duration, ATOM, pulse,
                                       GEOM, selector, nz=33, nrho=65)
        single = single_atom_spectrum(grid, pulse.duration, ATOM,
                                      pulse.with_field(e0), selector=selector)
        c_single = _dip_contrast(single, ATOM)
        c_avg = _dip_contrast(avg.spectrum, ATOM)
        degradation[selector] = abs(c_avg - c_single) / c_single
    assert degradation["two_photon_only"] < degradation["one_photon_only"]
