import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy import Rational, sqrt as ssqrt
from sympy.physics.wigner import wigner_3j

from kickrotor.rotor import (
    RotorSpec,
    WavePacket,
    cos2_matrix,
    free_phases,
    nitrogen,
    raman_shift,
    rotational_energy,
    threej_rank2,
)


def test_energies(n2):
    assert rotational_energy(n2, 0) == 0.0
    # 6 Bc with 2Bc = 1/T_rev
    assert rotational_energy(n2, 2) == pytest.approx(6 / (2 * 8.38), rel=1e-14)
    assert rotational_energy(n2, 2) == pytest.approx(0.35800, abs=5e-6)
    assert rotational_energy(n2, 1) / rotational_energy(n2, 2) == pytest.approx(1 / 3, rel=1e-15)


def test_raman_shift(n2):
    assert raman_shift(n2, 0) == pytest.approx(0.35800, abs=5e-6)
    assert raman_shift(n2, 2) == pytest.approx(7 / (2 * 8.38) * 2, rel=1e-14)
    j = np.arange(n2.j_max - 1)
    assert np.array_equal(raman_shift(n2, j), rotational_energy(n2, j + 2) - rotational_energy(n2, j))


@pytest.mark.parametrize("bad", [-1, 61, 2.5])
def test_energy_rejects_out_of_range(n2, bad):
    with pytest.raises(ValueError):
        rotational_energy(n2, bad)


def test_raman_shift_top_line(n2):
    with pytest.raises(ValueError):
        raman_shift(n2, n2.j_max - 1)


def test_threej_matches_sympy():
    for j in range(0, 16):
        for m in range(-j, j + 1):
            for dj in (0, 2):
                exact = float(wigner_3j(j + dj, 2, j, -m, 0, m))
                assert threej_rank2(j, m, dj) == pytest.approx(exact, abs=1e-15)


def test_cos2_known_elements(n2):
    a0 = cos2_matrix(n2, 0).entries
    assert a0[0, 0] == pytest.approx(1 / 3, abs=1e-15)
    assert a0[1, 1] == pytest.approx(3 / 5, abs=1e-15)
    assert a0[2, 0] == pytest.approx(float(2 / (3 * ssqrt(5))), abs=1e-15)
    # <1,1|cos^2|1,1> = 1/5
    assert cos2_matrix(n2, 1).entries[0, 0] == pytest.approx(float(Rational(1, 5)), abs=1e-15)


@pytest.mark.parametrize("m", [0, 1, 3, 10])
def test_cos2_structure(m):
    spec = RotorSpec(j_max=40)
    block = cos2_matrix(spec, m)
    a = block.entries
    assert a.shape == (41 - m, 41 - m)
    assert block.j_values[0] == m
    assert np.max(np.abs(a - a.T)) < 1e-14
    i, k = np.nonzero(a)
    assert set(np.abs(i - k)) <= {0, 2}
    lam = np.linalg.eigvalsh(a)
    assert lam.min() > -1e-12 and lam.max() < 1 + 1e-12


def test_cos2_read_only_and_sign_of_m(n2):
    with pytest.raises(ValueError):
        cos2_matrix(n2, 2).entries[0, 0] = 1.0
    assert np.array_equal(cos2_matrix(n2, -2).entries, cos2_matrix(n2, 2).entries)
    with pytest.raises(ValueError):
        cos2_matrix(RotorSpec(j_max=5), 6)


def test_free_phases(n2):
    assert np.array_equal(free_phases(n2, n2.revival_period), np.ones(n2.j_max + 1))
    assert np.array_equal(free_phases(n2, 0.0), np.ones(n2.j_max + 1))
    half = free_phases(n2, n2.revival_period / 2)
    assert half[2] == pytest.approx(-1.0, abs=1e-15)
    with pytest.raises(ValueError):
        free_phases(n2, -1.0)


@settings(max_examples=50, deadline=None)
@given(tau=st.floats(0, 100, allow_nan=False))
def test_free_phases_match_energies(tau):
    spec = RotorSpec(j_max=20)
    direct = np.exp(-2j * np.pi * rotational_energy(spec, spec.j) * tau)
    assert np.max(np.abs(free_phases(spec, tau) - direct)) < 1e-9
    assert np.allclose(np.abs(free_phases(spec, tau)), 1.0, atol=1e-15)


def test_spec_validation():
    for kwargs in ({"revival_period": 0}, {"j_max": 3}, {"j_max": 10.5},
                   {"spin_weight_even": -1}, {"spin_weight_even": 0, "spin_weight_odd": 0},
                   {"delta_alpha": -1e-30}):
        with pytest.raises(ValueError):
            RotorSpec(**kwargs)
    g = RotorSpec(j_max=5).spin_weights()
    assert g.tolist() == [2, 1, 2, 1, 2, 1]


def test_nitrogen_defaults():
    spec = nitrogen()
    assert spec.revival_period == 8.38 and spec.j_max == 60
    assert spec.delta_alpha == pytest.approx(0.5454e-30, rel=1e-3)


def test_wave_packet(n2):
    psi = WavePacket.basis_state(n2, 3, -2)
    assert psi.norm() == 1.0 and psi.populations[3] == 1.0 and psi.initial_m == -2
    with pytest.raises(ValueError):
        WavePacket.basis_state(n2, 1, 2)
    with pytest.raises(ValueError):
        WavePacket(2, 2, np.ones(n2.j_max + 1))
    with pytest.raises(ValueError):
        WavePacket(0, 0, np.ones(3), initial_m=1)
