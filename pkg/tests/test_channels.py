import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from petzcirc import channels, linalg
from petzcirc.errors import DimMismatch, OutOfRange

from conftest import opnorm, random_channel, random_density, random_unitary

KET0 = np.diag([1.0, 0.0]).astype(complex)
KET1 = np.diag([0.0, 1.0]).astype(complex)
PLUS = np.full((2, 2), 0.5, dtype=complex)


def test_damping_zero_is_identity(rng):
    rho = random_density(2, rng)
    np.testing.assert_allclose(channels.amplitude_damping(0.0)(rho), rho, atol=1e-15)


def test_damping_one_resets():
    np.testing.assert_allclose(channels.amplitude_damping(1.0)(KET1), KET0, atol=1e-15)


def test_damping_half_gives_mixed():
    np.testing.assert_allclose(channels.amplitude_damping(0.5)(KET1), np.eye(2) / 2, atol=1e-15)


@pytest.mark.parametrize("gamma", [-0.1, 1.5])
def test_damping_out_of_range(gamma):
    with pytest.raises(OutOfRange):
        channels.amplitude_damping(gamma)


def test_damping_on_excited_state():
    np.testing.assert_allclose(channels.apply(channels.amplitude_damping(0.2), KET1), np.diag([0.2, 0.8]), atol=1e-15)


@pytest.mark.parametrize("gamma", [0.1, 0.4, 0.9])
def test_damping_scales_coherence(gamma):
    out = channels.apply(channels.amplitude_damping(gamma), PLUS)
    assert out[0, 1] == pytest.approx(0.5 * np.sqrt(1 - gamma))


def test_depolarizing_zero_is_identity():
    assert channels.channels_equal(channels.depolarizing(0.0), channels.identity_channel(2))


@pytest.mark.parametrize("nq", [1, 2])
def test_depolarizing_full(nq, rng):
    d = 2**nq
    out = channels.depolarizing(1.0, nq)(random_density(d, rng))
    np.testing.assert_allclose(out, np.eye(d) / d, atol=1e-14)


def test_depolarizing_half():
    np.testing.assert_allclose(channels.depolarizing(0.5)(KET0), np.diag([0.75, 0.25]), atol=1e-15)


@pytest.mark.parametrize("mu", [-0.01, 1.01])
def test_depolarizing_out_of_range(mu):
    with pytest.raises(OutOfRange):
        channels.depolarizing(mu)


def test_tensor_power_identity():
    ch = channels.tensor_power(channels.identity_channel(2), 4)
    assert ch.num_kraus == 1
    np.testing.assert_array_equal(ch.kraus[0], np.eye(16))


def test_tensor_power_damping():
    ch = channels.tensor_power(channels.amplitude_damping(0.3), 4)
    assert ch.num_kraus == 16
    assert ch.tp_defect() < 1e-12


def test_tensor_power_lexicographic_order():
    a0, a1 = channels.amplitude_damping(0.3).kraus
    ch = channels.tensor_power(channels.amplitude_damping(0.3), 2)
    np.testing.assert_allclose(ch.kraus[1], np.kron(a0, a1))
    np.testing.assert_allclose(ch.kraus[2], np.kron(a1, a0))


def test_tensor_power_of_zero_damping():
    assert channels.channels_equal(channels.tensor_power(channels.amplitude_damping(0.0), 2),
                                   channels.identity_channel(4))


def test_tensor_power_choi_is_interleaved_product():
    ch = channels.amplitude_damping(0.3)
    c1 = channels.choi(ch).matrix
    c2 = channels.choi(channels.tensor_power(ch, 2)).matrix
    # Choi of the product lives on (out1 out2 in1 in2); the product of Chois on (out1 in1 out2 in2)
    reordered = linalg.permute_subsystems(np.kron(c1, c1), [2, 2, 2, 2], [0, 2, 1, 3])
    assert opnorm(reordered - c2) < 1e-12


def test_apply_identity(rng):
    rho = random_density(3, rng)
    np.testing.assert_allclose(channels.apply(channels.identity_channel(3), rho), rho)


def test_apply_dim_mismatch():
    with pytest.raises(DimMismatch):
        channels.apply(channels.amplitude_damping(0.1), np.eye(4) / 4)


def test_apply_warns_on_unnormalized():
    with pytest.warns(RuntimeWarning):
        channels.apply(channels.amplitude_damping(0.1), np.eye(2))


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 4), st.integers(1, 5), st.integers(0, 2**31 - 1))
def test_apply_preserves_trace(d, n_kraus, seed):
    r = np.random.default_rng(seed)
    ch = random_channel(d, n_kraus, r)
    out = channels.apply(ch, random_density(d, r))
    assert abs(np.trace(out) - 1) < 1e-10


def test_adjoint_identity():
    assert channels.channels_equal(channels.adjoint(channels.identity_channel(2)), channels.identity_channel(2))


@pytest.mark.parametrize("gamma", [0.0, 0.2, 0.7])
def test_adjoint_unital_iff_tp(gamma):
    ch = channels.amplitude_damping(gamma)
    np.testing.assert_allclose(channels.apply_unchecked(channels.adjoint(ch).kraus, np.eye(2)), np.eye(2), atol=1e-14)


def test_adjoint_involution():
    ch = channels.amplitude_damping(0.4)
    twice = channels.adjoint(channels.adjoint(ch))
    for a, b in zip(twice.kraus, ch.kraus):
        np.testing.assert_array_equal(a, b)


def test_choi_of_identity_rank_one():
    c = channels.choi(channels.identity_channel(2)).matrix
    omega = np.array([1, 0, 0, 1], complex)
    np.testing.assert_allclose(c, np.outer(omega, omega))
    assert np.linalg.matrix_rank(c) == 1


@pytest.mark.parametrize("gamma", [0.0, 0.3, 1.0])
def test_damping_choi_psd(gamma):
    assert channels.choi(channels.amplitude_damping(gamma)).is_psd()


def test_isometric_mixing_gives_equal_channel(rng):
    ch = random_channel(2, 3, rng)
    w = random_unitary(3, rng)
    mixed = tuple(sum(w[i, j] * ch.kraus[j] for j in range(3)) for i in range(3))
    assert channels.channels_equal(ch, channels.KrausChannel(mixed))


def test_choi_distance_dim_mismatch():
    with pytest.raises(DimMismatch):
        channels.choi_distance(channels.identity_channel(2), channels.identity_channel(4))


def test_isometric_extension_identity():
    np.testing.assert_array_equal(channels.isometric_extension(channels.identity_channel(2)), np.eye(2))


@pytest.mark.parametrize("gamma", [0.0, 0.2, 0.65, 1.0])
def test_isometric_extension_round_trip(gamma):
    ch = channels.amplitude_damping(gamma)
    v = channels.isometric_extension(ch)
    assert linalg.is_unitary(v)
    assert channels.choi_distance(channels.channel_from_isometry(v, 2), ch) < 1e-10


def test_isometric_extension_traces_to_channel(rng):
    ch = random_channel(2, 3, rng)
    v = channels.isometric_extension(ch)
    rho = random_density(2, rng)
    env0 = np.zeros((4, 4))
    env0[0, 0] = 1
    out = linalg.partial_trace(v @ np.kron(env0, rho) @ v.conj().T, [4, 2], [0])
    assert opnorm(out - ch(rho)) < 1e-10


@pytest.mark.parametrize("gamma", [0.1, 0.2, 0.5])
def test_damping_circuit_matches_stacked_form(gamma):
    circ = channels.channel_from_isometry(channels.amplitude_damping_circuit(gamma), 2)
    stacked = channels.channel_from_isometry(channels.isometric_extension(channels.amplitude_damping(gamma)), 2)
    assert channels.channels_equal(circ, stacked)


def test_channel_json_round_trip():
    ch = channels.amplitude_damping(0.25)
    back = channels.KrausChannel.from_json(ch.to_json())
    assert back.label == ch.label
    assert channels.choi_distance(back, ch) == 0.0


def test_not_tp_rejected():
    from petzcirc.errors import PetzError

    with pytest.raises(PetzError):
        channels.KrausChannel((np.eye(2) * 2,))


def test_damp_qubit_exact_half():
    np.testing.assert_array_equal(channels.damp_qubit(KET1, 0.5), np.eye(2) / 2)


@settings(max_examples=25, deadline=None)
@given(st.floats(0, 1), st.integers(0, 2**31 - 1))
def test_damp_qubit_matches_kraus(gamma, seed):
    rho = random_density(2, np.random.default_rng(seed))
    assert opnorm(channels.damp_qubit(rho, gamma) - channels.amplitude_damping(gamma)(rho)) < 1e-15
