import numpy as np
import pytest

from petzcirc import codes, linalg
from petzcirc.errors import ConfigError, NotNormalized

from conftest import opnorm

S2 = 1 / np.sqrt(2)


def test_codewords_orthogonal(leung):
    assert abs(np.vdot(leung.codewords[0], leung.codewords[1])) < 1e-15


def test_codewords_explicit(leung):
    zero = np.zeros(16)
    zero[[0b0000, 0b1111]] = S2
    one = np.zeros(16)
    one[[0b0011, 0b1100]] = S2
    np.testing.assert_allclose(leung.codewords[0], zero)
    np.testing.assert_allclose(leung.codewords[1], one)


def test_projector_rank_two(leung):
    p = leung.projector
    assert np.linalg.matrix_rank(p) == 2
    assert opnorm(p @ p - p) < 1e-15 and opnorm(p - p.conj().T) < 1e-15


@pytest.mark.parametrize("alpha, beta", [(1, 0), (0, 1), (S2, S2)])
def test_encoder_action(leung, alpha, beta):
    # logical input enters qubit 2 with the other qubits in |0>
    inp = np.zeros(16, complex)
    inp[0b0000] = alpha
    inp[0b0010] = beta
    out = leung.U_en @ inp
    np.testing.assert_allclose(out, alpha * leung.codewords[0] + beta * leung.codewords[1], atol=1e-14)


def test_encoder_unitary(leung):
    assert linalg.is_unitary(leung.U_en, atol=1e-12)


@pytest.mark.parametrize("psi, idx", [([1, 0], 0), ([0, 1], 1)])
def test_encode_basis(leung, psi, idx):
    np.testing.assert_allclose(codes.encode(leung, psi), leung.codewords[idx])


def test_encode_superposition(leung):
    np.testing.assert_allclose(codes.encode(leung, [S2, S2]), S2 * (leung.codewords[0] + leung.codewords[1]))


def test_encode_rejects_unnormalized(leung):
    with pytest.raises(NotNormalized):
        codes.encode(leung, [1, 1])


@pytest.mark.parametrize("theta", np.linspace(0, np.pi, 4))
@pytest.mark.parametrize("phi", np.linspace(0, 2 * np.pi, 4, endpoint=False))
def test_encoded_states_in_codespace(leung, theta, phi):
    v = codes.encode(leung, codes.logical_state(theta, phi))
    np.testing.assert_allclose(leung.projector @ v, v, atol=1e-14)


def test_tilde_encoder_zero(leung):
    enc = codes.tilde_encoder(leung, [1, 0])
    np.testing.assert_allclose(enc.U_tilde[:, 0], leung.codewords[0], atol=1e-12)


def test_tilde_encoder_one(leung):
    enc = codes.tilde_encoder(leung, [0, 1])
    np.testing.assert_allclose(enc.U_tilde[:, 0], leung.codewords[1], atol=1e-12)


def test_tilde_encoder_general(leung):
    psi = codes.logical_state(np.pi / 3)
    enc = codes.tilde_encoder(leung, psi)
    np.testing.assert_allclose(enc.U_tilde[:, 0], codes.encode(leung, psi), atol=1e-12)
    assert linalg.is_unitary(enc.U_tilde, atol=1e-12)


def test_tilde_encoder_complex_phase(leung):
    psi = codes.logical_state(1.1, 2.3)
    np.testing.assert_allclose(codes.tilde_encoder(leung, psi).U_tilde[:, 0], codes.encode(leung, psi), atol=1e-12)


def test_json_round_trip(leung):
    back = codes.QuantumCode.from_json(leung.to_json())
    np.testing.assert_array_equal(back.U_en, leung.U_en)
    np.testing.assert_array_equal(back.projector, leung.projector)


def test_bad_codewords_rejected():
    from petzcirc.errors import PetzError

    with pytest.raises(PetzError):
        codes.QuantumCode(1, 1, np.array([[1, 0], [1, 0]]), (), (0,))


def test_get_code():
    assert codes.get_code("leung4").n == 4
    assert codes.get_code("unencoded").n == 1
    with pytest.raises(ConfigError):
        codes.get_code("steane")
