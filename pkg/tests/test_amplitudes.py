import numpy as np
import pytest
from scipy.integrate import dblquad, quad

from xuvrabi.amplitudes import (TwoPhotonOptions, UnsupportedEnvelopeError,
                                amplitude_ratio, one_photon_amplitude,
                                single_atom_spectrum, two_photon_amplitude)
from xuvrabi.model import (AtomModel, Envelope, PulseParams, SpectrumGrid,
                           flat_top_pulse, helium_cis)
from xuvrabi.scans import analyze_doublet
from xuvrabi.units import au_to_ev, mev_to_au

ATOM = helium_cis()


def _pulse(rabi_periods=1.5, detuning_mev=0.0, intensity=2e13):
    return flat_top_pulse(ATOM, intensity_w_cm2=intensity,
                          rabi_periods=rabi_periods,
                          detuning=mev_to_au(detuning_mev))


def _quad_complex(fn, lo, hi, **kw):
    re = quad(lambda x: fn(x).real, lo, hi, limit=400, **kw)[0]
    im = quad(lambda x: fn(x).imag, lo, hi, limit=400, **kw)[0]
    return re + 1j * im


def one_photon_time_integral(eps, t, atom, pulse, wave):
    """Independent oracle: numerically integrate the emission history.

    The amplitude accrues as -pref * Int_0^t exp[i(delta - 3 dw/2) t']
    sin(W t'/2) dt' with pref = z E0 Omega / (2 W).
    """
    omega_r = pulse.rabi_frequency(atom)
    dw = pulse.detuning(atom)
    w = np.hypot(omega_r, dw)
    delta = eps - atom.two_photon_line
    pref = atom.z_one_photon[wave] * pulse.e0 * omega_r / (2.0 * w)

    def integrand(tp):
        return np.exp(1j * (delta - 1.5 * dw) * tp) * np.sin(0.5 * w * tp)

    return -pref * _quad_complex(integrand, 0.0, t)


def two_photon_time_integral(eps, t, atom, pulse, wave, opts):
    """Independent oracle for the collapsed two-photon route.

    d(amp)/dt = -i (E0^2 z / 4) e^{i(delta - 3 dw/2) t}
                [(1-x) e^{iWt/2} + (1+x) e^{-iWt/2}]  (no transient term).
    """
    omega_r = pulse.rabi_frequency(atom)
    dw = pulse.detuning(atom)
    w = np.hypot(omega_r, dw)
    x = dw / w
    delta = eps - atom.two_photon_line
    pref = -0.25j * pulse.e0**2 * atom.z_two_photon[wave]

    def integrand(tp):
        osc = (1 - x) * np.exp(0.5j * w * tp) + (1 + x) * np.exp(-0.5j * w * tp)
        return np.exp(1j * (delta - 1.5 * dw) * tp) * osc

    return pref * 0.5 * _quad_complex(integrand, 0.0, t)


def test_one_photon_matches_quadrature():
    rng = np.random.default_rng(101)
    pulse = _pulse(rabi_periods=4.0)
    for _ in range(100):
        dw = mev_to_au(rng.uniform(-100, 100))
        p = flat_top_pulse(ATOM, intensity_w_cm2=2e13, rabi_periods=4.0,
                           detuning=dw)
        t = rng.uniform(0.05, 1.0) * p.duration
        eps = ATOM.two_photon_line + mev_to_au(rng.uniform(-300, 300))
        wave = rng.choice(["s", "d"])
        closed = one_photon_amplitude(np.array([eps]), t, ATOM, p, wave)[0]
        oracle = one_photon_time_integral(eps, t, ATOM, p, wave)
        assert abs(closed - oracle) <= 1e-8 * max(abs(oracle), 1e-12)
    assert pulse.envelope is Envelope.FLAT_TOP


def test_two_photon_matches_quadrature():
    rng = np.random.default_rng(202)
    opts = TwoPhotonOptions()
    for _ in range(100):
        dw = mev_to_au(rng.uniform(-100, 100))
        p = flat_top_pulse(ATOM, intensity_w_cm2=2e13, rabi_periods=4.0,
                           detuning=dw)
        t = rng.uniform(0.05, 1.0) * p.duration
        eps = ATOM.two_photon_line + mev_to_au(rng.uniform(-300, 300))
        wave = rng.choice(["s", "d"])
        closed = two_photon_amplitude(np.array([eps]), t, ATOM, p, wave, opts)[0]
        oracle = two_photon_time_integral(eps, t, ATOM, p, wave, opts)
        assert abs(closed - oracle) <= 1e-8 * max(abs(oracle), 1e-12)


def _single_intermediate_closed(delta, t, e0, z_prod, omega_r, dw, eps_c_gap):
    """Closed form of the single-intermediate double integral, all terms.

    ``eps_c_gap`` is eps_c - eps_excited; denominators keep dw and W.
    """
    w = np.hypot(omega_r, dw)
    x = dw / w
    wt_minus = -eps_c_gap + 0.5 * dw - 0.5 * w
    wt_plus = -eps_c_gap + 0.5 * dw + 0.5 * w

    def lobe(arg):
        return (t / 2.0) * np.sinc(arg * t / (2 * np.pi)) * np.exp(0.5j * arg * t)

    p = 0.5 * w + delta - 1.5 * dw
    q = 0.5 * w - delta + 1.5 * dw
    t3 = delta - eps_c_gap - dw
    out = (1 - x) * lobe(p) / wt_minus + (1 + x) * np.conj(lobe(q)) / wt_plus
    out -= ((1 - x) * wt_plus + (1 + x) * wt_minus) / (wt_minus * wt_plus) \
        * lobe(t3)
    return -0.25j * z_prod * e0**2 * out


def test_single_intermediate_double_integral():
    """2-D quadrature of the ordered two-step emission vs the closed form."""
    rng = np.random.default_rng(303)
    for _ in range(4):
        omega_r = 0.003
        dw = mev_to_au(rng.uniform(-60, 60))
        w = np.hypot(omega_r, dw)
        x = dw / w
        e0 = 0.0239
        z_prod = 1.0
        eps_c_gap = rng.uniform(0.05, 0.3)  # intermediate above the excited level
        delta = mev_to_au(rng.uniform(-80, 80))
        t = rng.uniform(300, 900)

        # inner time t', outer time t''; energies relative to the resonant line
        def make_integrand(real):
            def f(tp, tpp):
                inner = np.exp(-1j * (0.5 * dw - eps_c_gap) * tp) * (
                    (1 - x) * np.exp(0.5j * w * tp)
                    + (1 + x) * np.exp(-0.5j * w * tp))
                outer = np.exp(-1j * (eps_c_gap + dw - delta) * tpp)
                val = -0.25 * z_prod * e0**2 * outer * inner / 2.0
                return val.real if real else val.imag
            return f

        re = dblquad(make_integrand(True), 0, t, 0, lambda tpp: tpp,
                     epsabs=1e-12, epsrel=1e-10)[0]
        im = dblquad(make_integrand(False), 0, t, 0, lambda tpp: tpp,
                     epsabs=1e-12, epsrel=1e-10)[0]
        oracle = re + 1j * im
        closed = _single_intermediate_closed(delta, t, e0, z_prod, omega_r,
                                             dw, eps_c_gap)
        assert abs(closed - oracle) <= 1e-6 * abs(oracle)


def test_zero_time_is_zero():
    pulse = _pulse()
    grid = SpectrumGrid.around_line(ATOM, n=51)
    for wave in ("s", "d"):
        assert np.allclose(one_photon_amplitude(grid.energies, 0.0, ATOM,
                                                pulse, wave), 0.0)
        assert np.allclose(two_photon_amplitude(grid.energies, 0.0, ATOM,
                                                pulse, wave), 0.0)


def test_gaussian_envelope_rejected():
    pulse = PulseParams(e0=0.02, omega=ATOM.transition_energy,
                        envelope=Envelope.GAUSSIAN, duration=1000.0)
    with pytest.raises(UnsupportedEnvelopeError):
        one_photon_amplitude(np.array([0.8]), 10.0, ATOM, pulse, "s")
    with pytest.raises(UnsupportedEnvelopeError):
        single_atom_spectrum(SpectrumGrid.around_line(ATOM, n=11), 10.0,
                             ATOM, pulse)


def test_resonant_one_photon_symmetric_maxima():
    pulse = _pulse(rabi_periods=1.5)
    grid = SpectrumGrid.around_line(ATOM)
    spec = single_atom_spectrum(grid, pulse.duration, ATOM, pulse,
                                selector="one_photon_only")
    res = analyze_doublet(spec)
    assert res.n_peaks == 2
    # exact mirror symmetry at zero detuning
    assert abs(res.heights[0] - res.heights[1]) <= 1e-10 * max(res.heights)
    w = pulse.rabi_frequency(ATOM)
    for pos, sign in zip(res.positions_ev, (-1, 1)):
        expected = au_to_ev(ATOM.two_photon_line + sign * w / 2)
        assert abs(pos - expected) < 1.0e-3  # within the lobe-tail pull


def test_lobe_sign_structure():
    """Opposite-signed lobes for one photon, same-signed for two photon."""
    pulse = _pulse(rabi_periods=1.0)
    w = pulse.rabi_frequency(ATOM)
    eps = ATOM.two_photon_line + np.array([-0.5 * w, 0.5 * w])
    a1 = one_photon_amplitude(eps, pulse.duration, ATOM, pulse, "d")
    a2 = two_photon_amplitude(eps, pulse.duration, ATOM, pulse, "d")
    assert np.real(a1[0] * np.conj(a1[1])) < 0
    assert np.real(a2[0] * np.conj(a2[1])) > 0


def test_two_photon_weight_ratio():
    """Lobe weights are (1 -+ dw/W); visible once the lobes decouple."""
    dw = mev_to_au(40.0)
    pulse = flat_top_pulse(ATOM, intensity_w_cm2=2e13, rabi_periods=50.0,
                           detuning=dw)
    w = np.hypot(pulse.rabi_frequency(ATOM), dw)
    x = dw / w
    eps = ATOM.two_photon_line + 1.5 * dw + np.array([-0.5 * w, 0.5 * w])
    a2 = two_photon_amplitude(eps, pulse.duration, ATOM, pulse, "d")
    measured = abs(a2[1]) / abs(a2[0])
    assert measured == pytest.approx((1 + x) / (1 - x), rel=0.01)


def test_peak_positions_track_doublet_long_pulse():
    """Maxima approach 3 dw/2 -+ W/2 as the lobe tails shrink (~1/t)."""
    grid = SpectrumGrid.around_line(ATOM)
    step_mev = 0.5
    for dw_mev in (-60.0, -25.0, 10.0, 45.0):
        dw = mev_to_au(dw_mev)
        pulse = flat_top_pulse(ATOM, intensity_w_cm2=2e13, rabi_periods=12.0,
                               detuning=dw)
        w = np.hypot(pulse.rabi_frequency(ATOM), dw)
        center = ATOM.two_photon_line + 1.5 * dw
        for selector in ("one_photon_only", "two_photon_only"):
            spec = single_atom_spectrum(grid, pulse.duration, ATOM, pulse,
                                        selector=selector)
            x = grid.energies
            y = spec.intensity
            for sign in (-1, 1):
                side = x * sign > center * sign
                i = np.argmax(np.where(side, y, -np.inf))
                err_mev = au_to_ev(abs(x[i] - (center + sign * w / 2))) * 1e3
                assert err_mev <= step_mev + 1e-9, (dw_mev, selector, sign)


def test_perturbative_field_scaling():
    """Both routes scale as E0^2 at small field and short fixed time."""
    grid = SpectrumGrid.around_line(ATOM, n=301)
    t = 400.0
    e0s = np.logspace(-4, -3, 5)
    mags1, mags2 = [], []
    for e0 in e0s:
        pulse = PulseParams(e0=e0, omega=ATOM.transition_energy,
                            duration=t)
        a1 = one_photon_amplitude(grid.energies, t, ATOM, pulse, "d")
        a2 = two_photon_amplitude(grid.energies, t, ATOM, pulse, "d")
        mags1.append(np.abs(a1).max())
        mags2.append(np.abs(a2).max())
    slope1 = np.polyfit(np.log(e0s), np.log(mags1), 1)[0]
    slope2 = np.polyfit(np.log(e0s), np.log(mags2), 1)[0]
    assert slope1 == pytest.approx(2.0, abs=0.05)
    assert slope2 == pytest.approx(2.0, abs=0.05)


def test_amplitude_ratio_anchors():
    pulse = PulseParams(e0=0.023880, omega=ATOM.transition_energy,
                        duration=1.0)
    assert amplitude_ratio(ATOM, pulse, "s") == pytest.approx(0.13546, rel=1e-3)
    assert amplitude_ratio(ATOM, pulse, "d") == pytest.approx(1.1958, rel=1e-3)
    assert amplitude_ratio(ATOM, pulse.with_field(0.0), "d") == 0.0
    bad = AtomModel(eps_ground=ATOM.eps_ground, eps_excited=ATOM.eps_excited,
                    z_bound=0.1, z_one_photon={"s": 0.0, "d": 0.01},
                    z_two_photon={"s": 0.1, "d": 1.0})
    with pytest.raises(ZeroDivisionError):
        amplitude_ratio(bad, pulse, "s")


def test_selector_behaviour():
    grid = SpectrumGrid.around_line(ATOM)
    pulse = _pulse(rabi_periods=1.0)
    total = single_atom_spectrum(grid, pulse.duration, ATOM, pulse,
                                 selector="coherent_total")
    res = analyze_doublet(total)
    # resonant drive leaves a strongly asymmetric doublet after one period
    assert res.n_peaks == 2
    assert res.asymmetry is not None and abs(res.asymmetry) > 0.3
    with pytest.raises(ValueError):
        single_atom_spectrum(grid, pulse.duration, ATOM, pulse,
                             selector="both")


def test_symmetric_doublet_at_blue_detuning():
    grid = SpectrumGrid.around_line(ATOM)
    pulse = _pulse(rabi_periods=1.5, detuning_mev=62.0)
    spec = single_atom_spectrum(grid, pulse.duration, ATOM, pulse,
                                selector="coherent_total")
    res = analyze_doublet(spec)
    assert res.n_peaks == 2
    assert abs(res.asymmetry) < 0.05


def test_channels_add_incoherently():
    grid = SpectrumGrid.around_line(ATOM, n=201)
    pulse = _pulse(rabi_periods=1.0)
    spec = single_atom_spectrum(grid, pulse.duration, ATOM, pulse)
    per_channel = sum(spec.channel_intensity(w) for w in spec.channels)
    assert np.allclose(spec.intensity, per_channel)


def test_transient_term_adds_intermediate_peak():
    grid_hw = 0.6
    grid = SpectrumGrid.around_line(ATOM, half_width_ev=grid_hw, n=2401)
    pulse = _pulse(rabi_periods=1.5)
    opts = TwoPhotonOptions(include_transient_term=True)
    spec_on = single_atom_spectrum(grid, pulse.duration, ATOM, pulse, opts,
                                   "two_photon_only")
    spec_off = single_atom_spectrum(grid, pulse.duration, ATOM, pulse,
                                    selector="two_photon_only")
    diff = np.abs(spec_on.intensity - spec_off.intensity)
    # largest change sits near the neglected-intermediate line at +0.3 eV
    peak_ev = grid.energies_ev[np.argmax(diff)] - au_to_ev(ATOM.two_photon_line)
    assert peak_ev == pytest.approx(0.3, abs=0.05)
    with pytest.raises(ValueError):
        TwoPhotonOptions(include_transient_term=True,
                         effective_eps_c=ATOM.eps_excited - 0.1).resolve_eps_c(ATOM)


def test_time_outside_pulse_rejected():
    pulse = _pulse(rabi_periods=1.0)
    with pytest.raises(ValueError):
        one_photon_amplitude(np.array([0.85]), 2 * pulse.duration, ATOM,
                             pulse, "s")
