import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from petzcirc import channels, gates, linalg, simulator as sim
from petzcirc.errors import ConfigError, DimMismatch, NotUnitary, Unsupported, ZeroProbability
from petzcirc.simulator import Channel, Idle, NoiseModel, PostSelect, Reset, SimState, SynthesizedCircuit, TwoLevel, Unitary

from conftest import opnorm, random_channel, random_density, random_state, random_unitary

H = np.array([[1, 1], [1, -1]], complex) / np.sqrt(2)
T1 = 100e-6


def random_unitary_circuit(n, depth, rng):
    circ = SynthesizedCircuit(n)
    for _ in range(depth):
        k = int(rng.integers(1, min(n, 3) + 1))
        qs = tuple(int(q) for q in rng.choice(n, size=k, replace=False))
        circ.append(Unitary(qs, random_unitary(2**k, rng)))
    return circ


def test_empty_circuit(rng):
    v = random_state(8, rng)
    out = sim.run(SynthesizedCircuit(3), SimState.from_vector(v)).state
    np.testing.assert_array_equal(out.data, v)


def test_x_flips():
    out = sim.run(SynthesizedCircuit(1, [Unitary((0,), gates.X)])).state
    np.testing.assert_allclose(out.data, [0, 1])


def test_hadamard_postselect():
    res = sim.run(SynthesizedCircuit(1, [Unitary((0,), H), PostSelect((0,))]))
    assert res.success_prob == pytest.approx(0.5)
    np.testing.assert_allclose(res.state.data, [1, 0], atol=1e-15)


def test_postselect_impossible():
    with pytest.raises(ZeroProbability):
        sim.run(SynthesizedCircuit(1, [Unitary((0,), gates.X), PostSelect((0,))]))


def test_msb_ordering():
    out = sim.run(SynthesizedCircuit(3, [Unitary((0,), gates.X)])).state
    assert abs(out.data[0b100]) == pytest.approx(1.0)


def test_controlled_gate_matches_dense(rng):
    u = random_unitary(2, rng)
    v = random_state(8, rng)
    op = Unitary((2,), u, controls=(0,), control_values=(0,))
    out = sim.run(SynthesizedCircuit(3, [op]), SimState.from_vector(v)).state.data
    p0 = np.diag([1, 0])
    dense = np.kron(np.kron(p0, np.eye(2)), u) + np.kron(np.diag([0, 1]), np.eye(4))
    np.testing.assert_allclose(out, dense @ v, atol=1e-12)


def test_two_level_matches_dense(rng):
    from petzcirc.iso_synth import TwoLevelUnitary

    g = TwoLevelUnitary(8, 2, 5, random_unitary(2, rng))
    v = random_state(8, rng)
    out = sim.run(SynthesizedCircuit(3, [TwoLevel((0, 1, 2), 2, 5, g.block)]), SimState.from_vector(v)).state.data
    np.testing.assert_allclose(out, g.matrix() @ v, atol=1e-12)


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 4), st.integers(1, 8), st.integers(0, 2**31 - 1))
def test_pure_and_mixed_paths_agree(n, depth, seed):
    r = np.random.default_rng(seed)
    circ = random_unitary_circuit(n, depth, r)
    v = random_state(2**n, r)
    pure = sim.run(circ, SimState.from_vector(v)).state
    mixed = sim.run(circ, SimState("mixed", n, np.outer(v, v.conj()))).state
    assert opnorm(mixed.data - pure.density()) < 1e-10


@settings(max_examples=15, deadline=None)
@given(st.integers(2, 4), st.integers(0, 2**31 - 1))
def test_trace_preserved(n, seed):
    r = np.random.default_rng(seed)
    circ = random_unitary_circuit(n, 3, r)
    circ.append(Channel((0,), random_channel(2, 3, r).kraus))
    circ.append(Reset(n - 1))
    circ.extend(random_unitary_circuit(n, 2, r).ops)
    out = sim.run(circ, SimState("mixed", n, random_density(2**n, r))).state
    assert abs(out.trace() - 1) < 1e-10
    assert np.linalg.eigvalsh(out.data).min() > -1e-10


def test_channel_matches_oracle(rng):
    ch = random_channel(4, 3, rng)
    rho = random_density(8, rng)
    out = sim.run(SynthesizedCircuit(3, [Channel((1, 2), ch.kraus)]), SimState("mixed", 3, rho)).state.data
    want = sum(np.kron(np.eye(2), k) @ rho @ np.kron(np.eye(2), k).conj().T for k in ch.kraus)
    assert opnorm(out - want) < 1e-10


def test_reset_excited():
    st_ = sim.reset(SimState.from_vector([0, 1]), 0)
    np.testing.assert_allclose(st_.data, np.diag([1, 0]))


def test_reset_product_leaves_rest(rng):
    rho = random_density(2, rng)
    state = SimState("mixed", 2, np.kron(rho, np.diag([0, 1])))
    out = sim.reset(state, 1)
    np.testing.assert_allclose(out.data, np.kron(rho, np.diag([1, 0])), atol=1e-14)


def test_reset_entangled_is_partial_trace(rng):
    v = random_state(4, rng)
    out = sim.reset(SimState.from_vector(v), 0)
    red = linalg.partial_trace(np.outer(v, v.conj()), [2, 2], [0])
    np.testing.assert_allclose(out.data, np.kron(np.diag([1, 0]), red), atol=1e-14)


def test_idle_gamma_values():
    assert sim.idle_gamma(0, T1=T1) == 0.0
    n = T1 * math.log(2) / sim.GATE_TIME_ID
    assert abs(sim.idle_gamma(n, T1=T1) - 0.5) < 1e-12
    assert sim.GATE_TIME_ID == 35e-9


def test_idle_gates_inverse():
    for g in [0.1, 0.3, 0.5]:
        assert sim.idle_gamma(sim.idle_gates_for_gamma(g, T1=T1), T1=T1) == pytest.approx(g, abs=1e-12)


def test_idle_noise_half():
    n = T1 * math.log(2) / sim.GATE_TIME_ID
    # fractional gate counts are allowed in the channel, rounding happens in the studies
    noise = NoiseModel(T1=T1)
    out = sim.idle_noise(SimState.from_vector([0, 1]), (0,), n, noise)
    np.testing.assert_allclose(out.data, np.eye(2) / 2, atol=1e-12)


def test_idle_ground_invariant():
    out = sim.idle_noise(SimState.from_vector([1, 0]), (0,), 1000, NoiseModel(T1=T1))
    np.testing.assert_allclose(out.density(), np.diag([1, 0]), atol=1e-15)


def test_idle_semigroup():
    noise = NoiseModel(T1=T1)
    rho = np.full((2, 2), 0.5, complex)
    once = sim.idle_noise(SimState("mixed", 1, rho), (0,), 400, noise).data
    step = channels.amplitude_damping(sim.idle_gamma(1, T1=T1))
    r = rho
    for _ in range(400):
        r = step(r)
    assert opnorm(once - r) < 1e-12


def test_idle_decay_exponential():
    noise = NoiseModel(T1=T1)
    ns = [100, 500, 2000]
    p1 = [sim.idle_noise(SimState.from_vector([0, 1]), (0,), n, noise).data[1, 1].real for n in ns]
    np.testing.assert_allclose(p1, [math.exp(-n * sim.GATE_TIME_ID / T1) for n in ns], rtol=1e-12)


def test_noise_model_rejects_dephasing():
    with pytest.raises(ConfigError):
        NoiseModel(T1=T1, T2=T1)
    assert NoiseModel(T1=T1).T2 == 2 * T1


def test_gate_noise_single_qubit():
    noise = NoiseModel(mu_1q=0.1)
    out = sim.run(SynthesizedCircuit(1, [Unitary((0,), np.eye(2))]), noise=noise).state
    np.testing.assert_allclose(out.data, channels.depolarizing(0.1)(np.diag([1, 0])), atol=1e-14)


def test_gate_noise_two_qubit(rng):
    noise = NoiseModel(mu_2q=0.2)
    rho = random_density(4, rng)
    out = sim.run(SynthesizedCircuit(2, [Unitary((0, 1), gates.CNOT)]), SimState("mixed", 2, rho), noise).state
    want = channels.depolarizing(0.2, 2)(gates.CNOT @ rho @ gates.CNOT)
    assert opnorm(out.data - want) < 1e-12


def test_noiseless_gate_skips_noise():
    noise = NoiseModel(mu_1q=0.3)
    out = sim.run(SynthesizedCircuit(1, [Unitary((0,), gates.X, noiseless=True)]), noise=noise).state
    assert out.kind == "pure"


def test_zero_noise_matches_ideal(rng):
    circ = random_unitary_circuit(3, 5, rng)
    a = sim.run(circ).state.density()
    b = sim.run(circ, noise=NoiseModel()).state.density()
    assert opnorm(a - b) < 1e-12


def test_lumped_rate():
    assert sim.lumped_rate(0, 0, 0.1, 0.1, 3) == 0.0
    assert sim.lumped_rate(3, 0, 0.1, 0.0, 3) == pytest.approx(0.1)


def test_costs():
    assert sim.generic_cost(1) == (1, 0)
    assert sim.generic_cost(2) == (5, 3)
    assert sim.generic_cost(3)[1] == 20
    assert sim.two_level_cost(4) == (16, 16)


def test_mixed_cap():
    with pytest.raises(Unsupported):
        sim.run(SynthesizedCircuit(3, [Reset(0)]), max_mixed=2)


def test_bad_ops():
    with pytest.raises(NotUnitary):
        Unitary((0,), np.ones((2, 2)))
    with pytest.raises(DimMismatch):
        Unitary((0,), np.eye(4))
    with pytest.raises(DimMismatch):
        SynthesizedCircuit(2).append(Unitary((0, 0), np.eye(4)))
    with pytest.raises(DimMismatch):
        SynthesizedCircuit(1).append(Unitary((1,), np.eye(2)))
    with pytest.raises(DimMismatch):
        sim.run(SynthesizedCircuit(2), SimState.zero(1))


def test_evolve_operator_is_linear(rng):
    circ = SynthesizedCircuit(2, [Unitary((0, 1), random_unitary(4, rng)), Channel((1,), random_channel(2, 2, rng).kraus)])
    a, b = random_density(4, rng), random_density(4, rng)
    lhs = sim.evolve_operator(circ, 0.3 * a + 0.7j * b)
    rhs = 0.3 * sim.evolve_operator(circ, a) + 0.7j * sim.evolve_operator(circ, b)
    assert opnorm(lhs - rhs) < 1e-12


def test_circuit_json_round_trip(rng):
    circ = random_unitary_circuit(3, 4, rng)
    circ.extend([Channel((1,), channels.amplitude_damping(0.2).kraus, "ad"), Reset(2), Idle((0,), 10),
                 TwoLevel((0, 1), 0, 3, H), PostSelect((2,))])
    back = SynthesizedCircuit.from_json(circ.to_json())
    assert back.gate_counts() == circ.gate_counts()
    noise = NoiseModel(T1=T1, mu_1q=1e-3)
    a = sim.run(circ, noise=noise).state.density()
    b = sim.run(back, noise=noise).state.density()
    np.testing.assert_array_equal(a, b)


def test_sampling(rng):
    est = sim.sample_probability(0.3, 10**6, rng)
    assert abs(est - 0.3) < 3 * math.sqrt(0.3 * 0.7 / 1e6)
    with pytest.raises(ConfigError):
        sim.sample_probability(0.3, 0, rng)
    assert sim.sample_counts([0.25, 0.75], 100, rng).sum() == 100
