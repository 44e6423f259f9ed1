import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from kickrotor.kicks import (
    MAX_PULSES,
    BasisTruncationError,
    Pulse,
    PulseTrain,
    RefinementError,
    apply_train,
    build_amplitude_noise_train,
    build_periodic_train,
    build_timing_noise_train,
    delta_alpha_from_anchor,
    delta_kick_operator,
    finite_duration_propagate,
    finite_pulse_operator,
    kick_strength_from_intensity,
    off_resonant_periods,
    propagate_block,
)
from kickrotor.oracle import dense_exponential_oracle, restrict
from kickrotor.rotor import RotorSpec, WavePacket, cos2_matrix, nitrogen


# --- trains -------------------------------------------------------------------


def test_periodic_train():
    train = build_periodic_train(3, 7.0, 1.0)
    assert train.times.tolist() == [0.0, 7.0, 14.0]
    assert train.strengths.tolist() == [1.0, 1.0, 1.0]
    assert len(build_periodic_train(1, 99.0, 1.0)) == 1
    assert train.regenerate() == train


@pytest.mark.parametrize("args", [(0, 1.0, 1.0), (MAX_PULSES + 1, 1.0, 1.0), (3, 0.0, 1.0),
                                  (3, 1.0, -1.0), (2.5, 1.0, 1.0)])
def test_periodic_train_rejects(args):
    with pytest.raises(ValueError):
        build_periodic_train(*args)


def test_zero_noise_equals_periodic():
    ref = build_periodic_train(24, 7.1, 2.3)
    t = build_timing_noise_train(24, 7.1, 0.0, 2.3, seed=5)
    a = build_amplitude_noise_train(24, 7.1, 2.3, 0.0, seed=5)
    assert np.array_equal(t.times, ref.times) and np.array_equal(t.strengths, ref.strengths)
    assert np.array_equal(a.times, ref.times) and np.array_equal(a.strengths, ref.strengths)


def test_noise_trains_are_seeded():
    a = build_timing_noise_train(24, 7.0, 0.33, 2.3, seed=3)
    b = build_timing_noise_train(24, 7.0, 0.33, 2.3, seed=3)
    c = build_timing_noise_train(24, 7.0, 0.33, 2.3, seed=4)
    assert np.array_equal(a.times, b.times) and not np.array_equal(a.times, c.times)
    assert a.regenerate() == a
    amp = build_amplitude_noise_train(24, 7.0, 2.3, 0.41, seed=3)
    assert amp.regenerate() == amp


def test_timing_noise_statistics():
    mean, sigma = 0.85 * 8.38, 0.33
    iv = build_timing_noise_train(10_001, mean, sigma, 1.0, seed=1).intervals
    assert abs(iv.mean() / mean - 1) < 0.01
    # the redraw below 0.05*mean is a 2.9-sigma cut, so the std shrinks only slightly
    assert abs(iv.std() / (sigma * mean) - 1) < 0.03
    assert iv.min() > 0.05 * mean


def test_amplitude_noise_redraws_not_clips():
    p = build_amplitude_noise_train(4096, 1.0, 2.3, 0.41, seed=7).strengths
    assert p.min() > 0 and np.count_nonzero(p == 0) == 0
    assert abs(p.mean() / 2.3 - 1) < 0.02
    assert abs(p.std() / (0.41 * 2.3) - 1) < 0.05


def test_noise_parameter_validation():
    with pytest.raises(ValueError):
        build_timing_noise_train(5, 1.0, 1.0, 1.0, seed=1)
    with pytest.raises(ValueError):
        build_amplitude_noise_train(5, 1.0, 1.0, -0.1, seed=1)
    with pytest.raises(ValueError):
        Pulse(0.0, -1.0)
    with pytest.raises(ValueError):
        PulseTrain((Pulse(1.0, 1.0), Pulse(1.0, 1.0)), "periodic")


def test_off_resonant_grid():
    t = off_resonant_periods(8.38) / 8.38
    assert t.size == 20 and np.all(np.diff(t) > 0)
    lo, hi = t[:10], t[10:]
    assert lo.min() > 10 / 13 and lo.max() < 5 / 6
    assert hi.min() > 7 / 8 and hi.max() < 13 / 14
    # half a cell of clearance from each resonant endpoint
    assert lo[0] - 10 / 13 == pytest.approx((5 / 6 - 10 / 13) / 20, rel=1e-12)


def test_describe_round_trips_times():
    train = build_timing_noise_train(6, 7.0, 0.33, 2.3, seed=9)
    d = train.describe()
    assert d["seed"] == 9 and d["times_ps"] == train.times.tolist()


# --- delta kicks --------------------------------------------------------------


@pytest.mark.parametrize("m", [0, 1, 4])
@pytest.mark.parametrize("p", [0.5, 2.3, 3.0])
def test_kick_unitary_and_parity(n2, m, p):
    u = delta_kick_operator(n2, m, p).unitary
    assert np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) < 1e-12
    j = np.arange(m, n2.j_max + 1)
    mixed = (j[:, None] - j[None, :]) % 2 == 1
    assert np.all(u[mixed] == 0)


def test_kick_zero_is_identity(n2):
    assert np.array_equal(delta_kick_operator(n2, 0, 0.0).unitary, np.eye(61))


def test_kick_composition(n2):
    a = delta_kick_operator(n2, 1, 0.7).unitary
    b = delta_kick_operator(n2, 1, 1.6).unitary
    ab = delta_kick_operator(n2, 1, 2.3).unitary
    assert np.max(np.abs(a @ b - ab)) < 1e-10


def test_kick_matches_expm_same_basis(small):
    a = cos2_matrix(small, 2).entries
    u = delta_kick_operator(small, 2, 2.3).unitary
    assert np.max(np.abs(u - expm(2.3j * a))) < 1e-12


def test_kick_ground_state_matches_dense_oracle(n2):
    psi = WavePacket.basis_state(n2, 0, 0)
    out = delta_kick_operator(n2, 0, 1.0).unitary @ psi.amplitudes
    ref = restrict(dense_exponential_oracle(0, 1.0, 200), n2.j_max)[:, 0]
    assert np.max(np.abs(np.abs(out) ** 2 - np.abs(ref) ** 2)) < 1e-10


# --- propagation --------------------------------------------------------------


def test_snapshot_convention(small):
    train = build_periodic_train(3, 1.3, 0.8)
    psi = WavePacket.basis_state(small, 2, 1)
    snaps = propagate_block(small, 1, psi.amplitudes, train)
    assert snaps.shape == (4, 31, 1)
    assert np.array_equal(snaps[0, :, 0], psi.amplitudes)
    u = delta_kick_operator(small, 1, 0.8).unitary
    assert np.allclose(snaps[1, 1:, 0], u @ psi.amplitudes[1:], atol=1e-15)
    packets = apply_train(small, psi, train)
    assert len(packets) == 3 and np.array_equal(packets[-1].amplitudes, snaps[3, :, 0])
    assert len(apply_train(small, psi, train, record_after_each_kick=False)) == 1


def test_zero_strength_train_only_phases(small):
    psi = WavePacket(0, 0, np.r_[np.full(4, 0.5), np.zeros(27)])
    out = apply_train(small, psi, build_periodic_train(5, 1.234, 0.0))[-1]
    assert np.allclose(np.abs(out.amplitudes), np.abs(psi.amplitudes), atol=1e-15)


@pytest.mark.parametrize("n,p", [(2, 1.0), (5, 0.4), (24, 0.1)])
def test_resonant_collapse(small, n, p):
    psi = WavePacket.basis_state(small, 2, 1)
    train = build_periodic_train(n, small.revival_period, p)
    many = apply_train(small, psi, train)[-1].amplitudes
    one = apply_train(small, psi, build_periodic_train(1, 1.0, n * p))[-1].amplitudes
    assert np.max(np.abs(many - one)) < 1e-10


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), p=st.floats(0, 1.5), sigma=st.floats(0, 0.5),
       recipe=st.sampled_from(["periodic", "timing", "amplitude"]))
def test_norm_conserved_any_recipe(seed, p, sigma, recipe):
    spec = RotorSpec(j_max=40)
    if recipe == "periodic":
        train = build_periodic_train(10, 7.0, p)
    elif recipe == "timing":
        train = build_timing_noise_train(10, 7.0, sigma, p, seed)
    else:
        train = build_amplitude_noise_train(10, 7.0, p, sigma, seed)
    psi = WavePacket.basis_state(spec, 1, 0)
    for packet in apply_train(spec, psi, train):
        assert abs(packet.norm() - 1) < 1e-10


def test_truncation_error(n2):
    spec = RotorSpec(j_max=20)
    psi = WavePacket.basis_state(spec, 0, 0)
    with pytest.raises(BasisTruncationError) as info:
        apply_train(spec, psi, build_periodic_train(24, 7.0, 2.3))
    assert info.value.tail_norm > 1e-6
    assert info.value.suggested_j_max > spec.j_max
    assert "basis too small" in str(info.value)


# --- finite pulses ------------------------------------------------------------


def _finite_vs_delta(spec, fwhm_fs, p=2.3):
    psi = WavePacket.basis_state(spec, 0, 0)
    fin = finite_duration_propagate(spec, psi, Pulse(0.0, p, fwhm_fs * 1e-3))
    delta = delta_kick_operator(spec, 0, p).unitary @ psi.amplitudes
    return np.max(np.abs(fin.amplitudes - delta)), fin


def test_finite_pulse_delta_limit():
    spec = RotorSpec(j_max=30)
    errs = [_finite_vs_delta(spec, f)[0] for f in (10, 5, 2, 1)]
    assert all(a > b for a, b in zip(errs, errs[1:]))
    # first order in the pulse width: halving fwhm halves the deviation
    assert errs[2] / errs[3] == pytest.approx(2.0, rel=0.02)
    assert errs[0] / errs[1] == pytest.approx(2.0, rel=0.05)
    # slope measured from this model, ~2.2e-4 per fs at P = 2.3
    assert errs[3] == pytest.approx(2.2e-4, rel=0.1)


def test_finite_pulse_is_unitary_and_parity_preserving():
    spec = RotorSpec(j_max=30)
    u = finite_pulse_operator(spec, 1, 2.3, 0.13).unitary
    assert np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) < 1e-12
    j = np.arange(1, 31)
    assert np.all(u[(j[:, None] - j[None, :]) % 2 == 1] == 0)


def test_finite_pulse_low_j_close_to_delta():
    spec = RotorSpec(j_max=30)
    _, fin = _finite_vs_delta(spec, 130.0)
    delta = np.abs(delta_kick_operator(spec, 0, 2.3).unitary[:, 0]) ** 2
    rel = np.abs(fin.populations[:5:2] - delta[:5:2]) / delta[:5:2]
    assert rel.max() < 0.05


def test_finite_pulse_refinement_failure():
    with pytest.raises(RefinementError):
        finite_pulse_operator(RotorSpec(j_max=20), 0, 2.3, 0.13, dt=5e-3, tol=1e-30)
    with pytest.raises(ValueError):
        finite_pulse_operator(RotorSpec(j_max=20), 0, 2.3, 0.0)


def test_finite_pulse_zero_strength():
    u = finite_pulse_operator(RotorSpec(j_max=20), 0, 0.0, 0.13).unitary
    assert np.array_equal(u, np.eye(21))


# --- intensity calibration ------------------------------------------------------


def test_intensity_anchor_round_trip():
    spec = nitrogen()
    assert kick_strength_from_intensity(spec, 2e13, 130.0) == pytest.approx(3.0, rel=1e-6)
    assert kick_strength_from_intensity(spec, 4e13, 130.0) == pytest.approx(6.0, rel=1e-12)
    assert kick_strength_from_intensity(spec, 0.0, 130.0) == 0.0
    with pytest.raises(ValueError):
        kick_strength_from_intensity(RotorSpec(), 2e13, 130.0)


def test_delta_alpha_magnitude():
    # polarizability-volume anisotropy of order 0.5-0.7 A^3
    assert 0.4e-30 < delta_alpha_from_anchor() < 0.8e-30
    assert delta_alpha_from_anchor() == pytest.approx(0.5454e-30, rel=1e-3)
    assert math.isclose(delta_alpha_from_anchor(kick_strength=6.0), 2 * delta_alpha_from_anchor())
