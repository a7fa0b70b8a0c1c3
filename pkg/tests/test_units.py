import numpy as np
import pytest

from xuvrabi.units import (HARTREE_EV, INTENSITY_AU_W_CM2, au_to_fs,
                           convert_energy, ev_to_au, field_from_intensity,
                           intensity_from_field, mev_to_au)


def test_roundtrip_identity():
    rng = np.random.default_rng(42)
    vals = rng.uniform(1e-6, 1e3, size=10_000)
    back = convert_energy(convert_energy(vals, "eV", "au"), "au", "eV")
    assert np.max(np.abs(back / vals - 1.0)) < 1e-12
    back = convert_energy(convert_energy(vals, "meV", "au"), "au", "meV")
    assert np.max(np.abs(back / vals - 1.0)) < 1e-12


def test_defined_constants():
    assert convert_energy(1.0, "au", "eV") == pytest.approx(27.211386)
    assert convert_energy(0.887246, "au", "eV") == pytest.approx(24.1432, abs=5e-4)
    assert convert_energy(80.0, "meV", "au") == pytest.approx(2.9399e-3, abs=1e-7)


def test_rabi_period_scale():
    # 80 meV coupling corresponds to a period of about 52 fs
    omega_r = mev_to_au(80.0)
    assert au_to_fs(2 * np.pi / omega_r) == pytest.approx(52.0, abs=1.0)


def test_unknown_unit():
    with pytest.raises(ValueError):
        convert_energy(1.0, "eV", "joule")


def test_field_from_intensity_values():
    assert field_from_intensity(2e13) == pytest.approx(0.023874, abs=1e-4)
    assert field_from_intensity(0.0) == 0.0
    assert field_from_intensity(INTENSITY_AU_W_CM2) == pytest.approx(1.0)


def test_field_intensity_inverse():
    rng = np.random.default_rng(7)
    for intensity in rng.uniform(1e8, 1e16, size=100):
        e0 = field_from_intensity(intensity)
        assert intensity_from_field(e0) == pytest.approx(intensity, rel=1e-12)


def test_negative_intensity_rejected():
    with pytest.raises(ValueError):
        field_from_intensity(-1.0)


def test_measured_coupling_strength():
    # E0 = 0.02388 a.u. with z = 0.124 a0 gives 80.6 +- 0.5 meV
    omega_r_mev = 0.02388 * 0.124 * HARTREE_EV * 1e3
    assert omega_r_mev == pytest.approx(80.6, abs=0.5)
