import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trapnoise.angular import ATOMS, SpinSystem
from trapnoise.constants import AMU, C, E_CHARGE, G_S, HBAR, KB, MU_B
from trapnoise.nearfield import SurfaceGeometry, magnetic_nearfield_spectrum
from trapnoise.physical import COPPER, GLASS, ThermalEnvironment, skin_depth
from trapnoise.rates import (
    RateResult, TrapConfig, coherence_decay_rate, hyperfine_loss_rate, ion_heating_rate,
    spin_heating_rate, zeeman_loss_rate,
)

from conftest import loglog_slope

MHZ = 2 * math.pi * 1e6
ROOM = ThermalEnvironment(300.0)
ION_MASS = 40 * AMU
DELTA_1MHZ = skin_depth(COPPER, MHZ)


def ion(z, axis=(0, 0, 1), omega=MHZ):
    return TrapConfig(omega, ION_MASS, z, axis, E_CHARGE)


# -- configuration -------------------------------------------------------------------

@pytest.mark.parametrize("kwargs", [
    dict(omega_trap=0.0), dict(mass=-1.0), dict(distance=0.0), dict(axis=(1, 1, 0)),
])
def test_trap_config_validation(kwargs):
    base = dict(omega_trap=MHZ, mass=ION_MASS, distance=1e-6)
    base.update(kwargs)
    with pytest.raises(ValueError):
        TrapConfig(**base)


def test_rate_result_rejects_negative():
    with pytest.raises(ValueError):
        RateResult(-1.0, None, {})


def test_coherence_decay_rate():
    assert coherence_decay_rate(3.0, 1.0) == 2.0
    with pytest.raises(ValueError):
        coherence_decay_rate(-1.0, 1.0)


# -- ion heating -----------------------------------------------------------------------

def test_ion_heating_closed_form_at_1um():
    res = ion_heating_rate(ion(1e-6), COPPER, ROOM, method="asymptotic")
    # q^2 kT rho (1 + z/delta) / (8 pi hbar M Omega z^3), evaluated independently
    assert res.rate == pytest.approx(1658.9662289793284, rel=1e-5)
    assert res.components["ground_state_size"] == pytest.approx(
        math.sqrt(HBAR / (2 * ION_MASS * MHZ)), rel=1e-12)


def test_ion_heating_tilted_axis_projects_tensor():
    z = 1e-5
    along = ion_heating_rate(ion(z, (0, 0, 1)), COPPER, ROOM, method="exact").rate
    across = ion_heating_rate(ion(z, (1, 0, 0)), COPPER, ROOM, method="exact").rate
    c, s = math.cos(0.3), math.sin(0.3)
    tilted = ion_heating_rate(ion(z, (s, 0, c)), COPPER, ROOM, method="exact").rate
    assert tilted == pytest.approx(c * c * along + s * s * across, rel=1e-9)


def test_ion_heating_frozen_at_zero_temperature():
    res = ion_heating_rate(ion(1e-6), COPPER, ThermalEnvironment(0.0), method="asymptotic")
    assert res.rate == 0.0


def test_ion_heating_needs_charge():
    with pytest.raises(ValueError):
        ion_heating_rate(TrapConfig(MHZ, ION_MASS, 1e-6), COPPER, ROOM)


@pytest.mark.parametrize("method", ["asymptotic", "exact"])
def test_ion_heating_slopes(method):
    def rate(z):
        return ion_heating_rate(ion(z), COPPER, ROOM, method=method).rate
    assert loglog_slope(rate, DELTA_1MHZ / 30) == pytest.approx(-3.0, abs=0.1)
    assert loglog_slope(rate, 30 * DELTA_1MHZ) == pytest.approx(-2.0, abs=0.1)


@pytest.mark.parametrize("z_over_delta", [0.01, 0.03, 0.1, 10.0])
def test_ion_heating_exact_vs_closed_form_where_interpolation_is_tight(z_over_delta):
    z = z_over_delta * DELTA_1MHZ
    exact = ion_heating_rate(ion(z), COPPER, ROOM, method="exact").rate
    closed = ion_heating_rate(ion(z), COPPER, ROOM, method="asymptotic").rate
    assert exact == pytest.approx(closed, rel=0.20)


@pytest.mark.xfail(strict=True, reason="the interpolation overshoots by up to ~45% "
                   "for z between about delta/4 and 5 delta; the quadrature is verified "
                   "independently there")
def test_ion_heating_exact_vs_closed_form_across_crossover():
    for z_over_delta in np.logspace(-2, 1, 13):
        z = z_over_delta * DELTA_1MHZ
        exact = ion_heating_rate(ion(z), COPPER, ROOM, method="exact").rate
        closed = ion_heating_rate(ion(z), COPPER, ROOM, method="asymptotic").rate
        assert exact == pytest.approx(closed, rel=0.20)


# -- spin heating ----------------------------------------------------------------------

SPIN_TRAP = TrapConfig(0.1 * MHZ, ION_MASS, 1e-6)


def test_spin_heating_closed_form_normalisation():
    res = spin_heating_rate(SPIN_TRAP, COPPER, ROOM, SpinSystem(0.5))
    # mu0^2 kT mu_B^2 g_S^2 / (64 pi hbar Omega M rho z^3), evaluated independently
    assert res.rate == pytest.approx(0.1499249116764086, rel=1e-4)
    assert res.rate == pytest.approx(2 * res.components["rate_golden_rule"], rel=1e-15)
    golden = spin_heating_rate(SPIN_TRAP, COPPER, ROOM, SpinSystem(0.5), normalization="golden_rule")
    assert golden.rate == pytest.approx(res.components["rate_golden_rule"], rel=1e-15)


def test_spin_heating_exact_route_agrees_near_surface():
    asym = spin_heating_rate(SPIN_TRAP, COPPER, ROOM, SpinSystem(0.5))
    exact = spin_heating_rate(SPIN_TRAP, COPPER, ROOM, SpinSystem(0.5), method="exact")
    assert exact.rate == pytest.approx(asym.rate, rel=0.02)


def test_spin_heating_blackbody_is_negligible():
    res = spin_heating_rate(SPIN_TRAP, COPPER, ROOM, SpinSystem(0.5))
    assert 0 < res.components["blackbody_rate"] < 1e-35
    with_bb = spin_heating_rate(SPIN_TRAP, COPPER, ROOM, SpinSystem(0.5), include_blackbody=True)
    assert with_bb.rate == pytest.approx(res.rate, rel=1e-12)


def test_spin_heating_glass_much_smaller():
    cu = spin_heating_rate(SPIN_TRAP, COPPER, ROOM, SpinSystem(0.5)).rate
    gl = spin_heating_rate(SPIN_TRAP, GLASS, ROOM, SpinSystem(0.5)).rate
    assert gl == pytest.approx(cu * COPPER.resistivity / GLASS.resistivity, rel=1e-6)


def test_spin_heating_rejects_bad_options():
    with pytest.raises(ValueError):
        spin_heating_rate(SPIN_TRAP, COPPER, ROOM, SpinSystem(0.5), normalization="other")
    tilted = TrapConfig(0.1 * MHZ, ION_MASS, 1e-6, (1, 0, 0))
    with pytest.raises(ValueError):
        spin_heating_rate(tilted, COPPER, ROOM, SpinSystem(0.5))


# -- magnetic loss ---------------------------------------------------------------------

@settings(max_examples=10, deadline=None)
@given(st.floats(0.0, math.pi), st.floats(-6.5, -3.5))
def test_zeeman_loss_matches_spin_half_closed_sum(theta, log_z):
    geom = SurfaceGeometry(10.0**log_z)
    res = zeeman_loss_rate(SpinSystem(0.5), MHZ, COPPER, ROOM, geom, theta)
    spec = magnetic_nearfield_spectrum(COPPER, ROOM, geom, -MHZ, method=res.method,
                                       include_blackbody=True)
    expected = (G_S * MU_B / HBAR) ** 2 / 4 * (
        spec.parallel * (1 + math.cos(theta) ** 2) + spec.perpendicular * math.sin(theta) ** 2)
    assert res.rate == pytest.approx(expected, rel=1e-12)


def test_zeeman_blackbody_rate_100mhz():
    res = zeeman_loss_rate(SpinSystem(0.5), 100 * MHZ, COPPER, ROOM, SurfaceGeometry(1e-3), math.pi / 2)
    assert res.components["blackbody_rate"] == pytest.approx(1.2544360689530627e-13, rel=1e-6)


def test_zeeman_loss_rejects_bad_input():
    geom = SurfaceGeometry(1e-5)
    with pytest.raises(ValueError):
        zeeman_loss_rate(SpinSystem(0.5), MHZ, COPPER, ROOM, geom, 4.0)
    with pytest.raises(ValueError):
        zeeman_loss_rate(SpinSystem(0.5), MHZ, COPPER, ROOM, geom, 1.0, m_i=0.5, m_f=0.5)
    with pytest.raises(ValueError):
        zeeman_loss_rate(SpinSystem(0.5), -MHZ, COPPER, ROOM, geom, 1.0)


@pytest.mark.parametrize("f_hz", [1e6, 1e8])
@pytest.mark.parametrize("method", ["asymptotic", "exact"])
def test_zeeman_loss_slopes(f_hz, method):
    w = 2 * math.pi * f_hz
    delta = skin_depth(COPPER, w)

    def rate(z):
        return zeeman_loss_rate(SpinSystem(0.5), w, COPPER, ROOM, SurfaceGeometry(z), math.pi / 2,
                                method=method).rate
    assert loglog_slope(rate, delta / 30) == pytest.approx(-1.0, abs=0.1)
    assert loglog_slope(rate, 30 * delta) == pytest.approx(-4.0, abs=0.15)


@pytest.mark.parametrize("name", ["rb85", "cs133"])
def test_hyperfine_detailed_balance(name):
    atom = ATOMS[name]
    geom = SurfaceGeometry(1e-5)
    up = hyperfine_loss_rate(atom.spin, atom.omega_hf, COPPER, ROOM, geom, atom.F_i, atom.F_f, method="exact")
    down = hyperfine_loss_rate(atom.spin, atom.omega_hf, COPPER, ROOM, geom, atom.F_f, atom.F_i, method="exact")
    boltzmann = math.exp(HBAR * atom.omega_hf / (KB * 300.0))
    ratio = down.rate * (2 * atom.F_f + 1) / (up.rate * (2 * atom.F_i + 1))
    assert ratio == pytest.approx(boltzmann, rel=1e-9)


def test_hyperfine_rejects_same_manifold():
    atom = ATOMS["rb85"]
    with pytest.raises(ValueError):
        hyperfine_loss_rate(atom.spin, atom.omega_hf, COPPER, ROOM, SurfaceGeometry(1e-5), 2, 2)


def test_hyperfine_rates_below_magnetic_trap_rates():
    geom = SurfaceGeometry(1e-5)
    zee = zeeman_loss_rate(SpinSystem(0.5), MHZ, COPPER, ROOM, geom, math.pi / 2).rate
    for atom in ATOMS.values():
        hf = hyperfine_loss_rate(atom.spin, atom.omega_hf, COPPER, ROOM, geom, atom.F_i, atom.F_f).rate
        assert hf < 1e-2 * zee
