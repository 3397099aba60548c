import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orbitcascade.errors import DomainError
from orbitcascade.orbital import (
    EquilibriumState,
    RingState,
    ShellConfig,
    altitude_offset_km,
    equilibrium,
    mean_motion,
    mean_motion_from_sma,
    walker_min_spacing,
    walker_phases,
)

from .oracles import brute_force_min_spacing


def test_mean_motion_at_550_km():
    # sqrt(398600.4418 / 6928.137**3) evaluated by hand: 1.094824e-3
    assert mean_motion(550.0) == pytest.approx(1.094824e-3, rel=1e-6)
    assert mean_motion(550.0) == pytest.approx(math.sqrt(398600.4418 / 6928.137**3), rel=1e-15)


def test_mean_motion_scaling_law():
    a = 7000.0
    assert mean_motion_from_sma(a) / mean_motion_from_sma(2 * a) == pytest.approx(2 * math.sqrt(2), rel=1e-14)


@pytest.mark.parametrize("alt", [199.9, 2000.1, 2500.0, -5.0])
def test_altitude_out_of_range(alt):
    with pytest.raises(DomainError):
        mean_motion(alt)


def test_equilibrium_values():
    eq = equilibrium(ShellConfig(1, 4, 550.0))
    assert eq.spacing_rad == pytest.approx(math.pi / 2)
    eq = equilibrium(ShellConfig(72, 22, 550.0))
    assert eq.spacing_rad == pytest.approx(0.285599332, rel=1e-8)
    assert eq.mean_motion_rad_s == pytest.approx(1.094824e-3, rel=1e-6)
    assert equilibrium(ShellConfig(1, 1, 550.0)).spacing_rad == pytest.approx(2 * math.pi)


@given(st.integers(1, 5000))
def test_spacing_times_count_is_full_circle(s):
    eq = equilibrium(ShellConfig(1, s, 550.0))
    assert eq.spacing_rad * s == pytest.approx(2 * math.pi, rel=1e-15)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(num_orbits=0, sats_per_orbit=4, altitude_km=550),
        dict(num_orbits=2, sats_per_orbit=0, altitude_km=550),
        dict(num_orbits=2, sats_per_orbit=4, altitude_km=100),
        dict(num_orbits=2, sats_per_orbit=4, altitude_km=550, phase_factor_f=2),
        dict(num_orbits=2, sats_per_orbit=4, altitude_km=550, phase_factor_f=-1),
    ],
)
def test_shell_config_rejects_invalid(kwargs):
    with pytest.raises(DomainError):
        ShellConfig(**kwargs)


def test_shell_config_round_trip():
    cfg = ShellConfig(72, 22, 550.0, 53.0, 5)
    assert cfg.total_sats == 1584
    assert ShellConfig.from_dict(cfg.to_dict()) == cfg


def test_equilibrium_state_invariants():
    with pytest.raises(DomainError):
        EquilibriumState(0.0, 1e-3)
    with pytest.raises(DomainError):
        EquilibriumState(7.0, 1e-3)
    with pytest.raises(DomainError):
        EquilibriumState(1.0, 0.0)


def test_walker_examples():
    assert walker_min_spacing(ShellConfig(1, 4, 550.0)) == pytest.approx(math.pi / 2)
    assert walker_min_spacing(ShellConfig(2, 2, 550.0, phase_factor_f=1)) == pytest.approx(
        brute_force_min_spacing(2, 2, 1), abs=1e-12
    )
    for f in (0, 1, 17, 71):
        cfg = ShellConfig(72, 22, 550.0, phase_factor_f=f)
        assert walker_min_spacing(cfg) == pytest.approx(brute_force_min_spacing(72, 22, f), abs=1e-12)


def test_walker_single_satellite():
    assert walker_min_spacing(ShellConfig(1, 1, 550.0)) == pytest.approx(2 * math.pi)


@st.composite
def shells(draw, max_total=2000):
    p = draw(st.integers(1, 40))
    s = draw(st.integers(1, max(1, max_total // p)))
    f = draw(st.integers(0, p - 1))
    return p, s, f


@settings(max_examples=60, deadline=None)
@given(shells(max_total=400))
def test_walker_matches_brute_force(shape):
    p, s, f = shape
    cfg = ShellConfig(p, s, 550.0, phase_factor_f=f)
    assert walker_min_spacing(cfg) == pytest.approx(brute_force_min_spacing(p, s, f), abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(shells(max_total=2000))
def test_walker_matches_phase_table(shape):
    # independent of the pair formula: sort the explicit phase table and take adjacent gaps
    p, s, f = shape
    cfg = ShellConfig(p, s, 550.0, phase_factor_f=f)
    ph = np.sort(walker_phases(cfg).ravel())
    if ph.size == 1:
        expected = 2 * math.pi
    else:
        gaps = np.diff(np.concatenate([ph, [ph[0] + 2 * math.pi]]))
        expected = gaps.min()
    assert walker_min_spacing(cfg) == pytest.approx(expected, abs=1e-9)


def test_ring_state_layout():
    s = RingState(0.0, [0.1, -0.1, 0.0], [1.0, 2.0, 3.0])
    y = s.as_vector()
    assert y.tolist() == [0.1, 1.0, -0.1, 2.0, 0.0, 3.0]
    back = RingState.from_vector(y)
    assert np.array_equal(back.dtheta_dev, s.dtheta_dev)
    assert s.telescoping_residual() == pytest.approx(0.0, abs=1e-15)


def test_ring_state_shape_errors():
    with pytest.raises(DomainError):
        RingState(0.0, [0.0], [0.0])
    with pytest.raises(DomainError):
        RingState(0.0, [0.0, 0.0], [0.0])


def test_altitude_offset_sign():
    w = mean_motion(550.0)
    # faster than equilibrium means lower
    assert altitude_offset_km(1e-7, w, 6928.137) < 0
    assert altitude_offset_km(-1e-7, w, 6928.137) == pytest.approx(2 * 6928.137 / (3 * w) * 1e-7)
