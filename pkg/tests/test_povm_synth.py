import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from petzcirc import channels, codes, linalg
from petzcirc.errors import DimMismatch, OutOfRange
from petzcirc.povm_synth import (
    build_povm_sequence,
    delta_at,
    delta_curve,
    execute_povm,
    quadratic_fit,
    run_povm_circuit,
)

from conftest import ad_noise, opnorm, petz_ad, random_channel, random_density, random_unitary

PLUS = np.full((2, 2), 0.5, dtype=complex)


def test_unitary_channel_has_no_steps(rng):
    u = random_unitary(2, rng)
    seq = build_povm_sequence(channels.KrausChannel((u,)))
    assert seq.steps == ()
    np.testing.assert_allclose(seq.final_unitary, u, atol=1e-12)
    rho = random_density(2, rng)
    np.testing.assert_allclose(execute_povm(seq, rho), u @ rho @ u.conj().T, atol=1e-12)


@pytest.mark.parametrize("gamma", [0.05, 0.3, 0.7])
def test_damping_sequence_exact(gamma):
    ch = channels.amplitude_damping(gamma)
    seq = build_povm_sequence(ch)
    assert len(seq.steps) == 1
    np.testing.assert_allclose(seq.steps[0].K, ch.kraus[1])
    np.testing.assert_allclose(seq.steps[0].Q_blk, ch.kraus[0], atol=1e-12)
    for rho in [PLUS, np.diag([0.0, 1.0]), np.eye(2) / 2]:
        assert opnorm(execute_povm(seq, rho) - ch(rho)) < 1e-12


def test_damping_plus_state():
    ch = channels.amplitude_damping(0.3)
    assert opnorm(execute_povm(build_povm_sequence(ch), PLUS) - ch(PLUS)) < 1e-12


def _surviving_product(seq):
    q = np.eye(seq.dim, dtype=complex)
    for s in seq.steps:
        q = s.Q_blk @ q
    return q


@pytest.mark.parametrize("gamma", [0.1, 0.5])
def test_exactness_premise_holds_for_damping(gamma):
    seq = build_povm_sequence(channels.amplitude_damping(gamma))
    p_last = linalg.psd_sqrt(seq.residual.conj().T @ seq.residual)
    assert opnorm(_surviving_product(seq) - p_last) < 1e-12


def test_damping_tensor_power_is_not_exact(rng):
    # measured branches overlap on |11>, so Q1 Q2 Q3 differs from P4 and the sequence is approximate
    ch = ad_noise(0.2, 2)
    seq = build_povm_sequence(ch)
    p_last = linalg.psd_sqrt(seq.residual.conj().T @ seq.residual)
    assert opnorm(_surviving_product(seq) - p_last) > 1e-3
    # the sequence still returns a density matrix with a bounded error
    rho = random_density(4, rng)
    out = execute_povm(seq, rho)
    assert abs(np.trace(out) - 1) < 1e-12
    assert opnorm(out - ch(rho)) < 0.2**2


@pytest.mark.parametrize("gamma", [0.1, 0.3])
def test_step_invariants(gamma):
    seq = build_povm_sequence(petz_ad(gamma).channel)
    eye = np.eye(16)
    for s in seq.steps:
        assert opnorm(s.P_blk @ s.P_blk + s.Q_blk @ s.Q_blk - eye) < 1e-10
        assert opnorm(s.P_blk @ s.Q_blk - s.Q_blk @ s.P_blk) < 1e-12
        assert linalg.is_unitary(s.U_M, 1e-10)
        assert opnorm(s.U_polar @ s.P_blk - s.K) < 1e-12


def test_sorted_ascending_with_dominant_residual():
    seq = build_povm_sequence(petz_ad(0.1).channel)
    norms = [opnorm(s.K.conj().T @ s.K) for s in seq.steps]
    assert np.all(np.diff(norms) >= -1e-9)
    assert opnorm(seq.residual.conj().T @ seq.residual) >= max(norms) - 1e-9


def test_petz_sequence_length():
    assert len(build_povm_sequence(petz_ad(0.1).channel).steps) == 15


def test_dim_mismatch():
    seq = build_povm_sequence(channels.amplitude_damping(0.1))
    with pytest.raises(DimMismatch):
        execute_povm(seq, np.eye(4) / 4)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**31 - 1))
def test_output_is_density(n_kraus, seed):
    r = np.random.default_rng(seed)
    ch = random_channel(2, n_kraus, r)
    out = execute_povm(build_povm_sequence(ch), random_density(2, r))
    assert abs(np.trace(out) - 1) < 1e-10
    assert np.linalg.eigvalsh(0.5 * (out + out.conj().T)).min() > -1e-10


@pytest.mark.parametrize("gamma", [0.1, 0.3])
def test_output_density_on_code(leung, gamma):
    pm = petz_ad(gamma)
    seq = build_povm_sequence(pm.channel)
    rho = pm.noise(linalg.projector(codes.encode(leung, codes.logical_state(1.3, 0.2))))
    out = execute_povm(seq, rho)
    assert abs(np.trace(out) - 1) < 1e-10
    assert np.linalg.eigvalsh(0.5 * (out + out.conj().T)).min() > -1e-10


def test_circuit_matches_branch_semantics(leung):
    pm = petz_ad(0.2)
    seq = build_povm_sequence(pm.channel)
    rho = pm.noise(linalg.projector(codes.encode(leung, codes.logical_state(2.1, 1.0))))
    assert opnorm(run_povm_circuit(seq, rho) - execute_povm(seq, rho)) < 1e-10


def test_circuit_damping_exact():
    ch = channels.amplitude_damping(0.4)
    seq = build_povm_sequence(ch)
    assert opnorm(run_povm_circuit(seq, PLUS) - ch(PLUS)) < 1e-12


def test_envelope_against_exact_petz(leung):
    gamma = 0.2
    pm = petz_ad(gamma)
    seq = build_povm_sequence(pm.channel)
    rho = pm.noise(linalg.projector(codes.encode(leung, [0, 1])))
    dist = opnorm(execute_povm(seq, rho) - pm(rho))
    assert dist < 0.05 * gamma**2 + 0.01 * gamma


def test_delta_zero_without_noise(leung):
    assert delta_at(leung, 0.0).delta < 1e-9


def test_delta_channel_and_circuit_agree(leung):
    a = delta_at(leung, 0.2)
    b = delta_at(leung, 0.2, circuit_level=True)
    assert abs(a.delta - b.delta) < 1e-8


def test_delta_monotone(leung):
    samples = delta_curve(leung, np.linspace(0, 0.3, 7))
    d = [s.delta for s in samples]
    assert all(b >= a - 1e-6 for a, b in zip(d, d[1:]))


def test_delta_out_of_range(leung):
    with pytest.raises(OutOfRange):
        delta_curve(leung, [0.6])


def test_delta_quadratic_fit(leung):
    gammas = np.arange(0, 0.3 + 1e-9, 0.02)
    fit = quadratic_fit(gammas, [s.delta for s in delta_curve(leung, gammas)])
    assert abs(fit.coefficients[0] - 0.0414) <= 0.25 * 0.0414


def test_quadratic_fit_recovers_polynomial():
    x = np.linspace(0, 1, 9)
    fit = quadratic_fit(x, 3 * x**2 - 2 * x + 0.5)
    np.testing.assert_allclose(fit.coefficients, (3, -2, 0.5), atol=1e-10)
    assert fit.r_squared == pytest.approx(1.0)


def test_json_export():
    import json

    d = json.loads(build_povm_sequence(channels.amplitude_damping(0.2)).to_json())
    assert d["dim"] == 2 and len(d["steps"]) == 1
