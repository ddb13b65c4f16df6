"""
End-to-end pipelines: encode, damp, recover, compare with the encoded state.

Every pipeline is linear in the logical input, so it is simulated once for
each of the four operators ``|c><d|`` on the logical qubit. The outputs give
a :class:`Response` from which ``F^2(theta, phi)`` of any logical state is a
cheap quadratic form. Post-selected pipelines also keep the trace of each
output so that the renormalised fidelity is a ratio of two forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import numpy.typing as npt

from .. import blockenc, channels, codes, iso_synth, linalg, petz, povm_synth, simulator as sim
from ..codes import QuantumCode
from ..errors import ConfigError, ZeroProbability

METHODS = ("exact", "iso", "povm", "blockenc", "unencoded")
INJECTIONS = ("channel", "circuit", "idle")


@dataclass(frozen=True)
class Setup:
    """Everything that fixes one pipeline evaluation."""

    method: str
    gamma: float
    injection: str = "channel"
    mu_1q: float = 0.0
    mu_2q: float = 0.0
    t1: float = 100e-6
    gate_time: float = sim.GATE_TIME_ID
    prep: str = "exact"
    code: str = "leung4"
    noisy_encoder: bool = True

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; choose from {METHODS}")
        if self.injection not in INJECTIONS:
            raise ConfigError(f"unknown noise injection {self.injection!r}; choose from {INJECTIONS}")
        if not 0 <= self.gamma <= 1:
            raise ConfigError(f"gamma={self.gamma} outside [0, 1]")
        for mu in (self.mu_1q, self.mu_2q):
            if not 0 <= mu <= 1:
                raise ConfigError(f"mu={mu} outside [0, 1]")

    @property
    def idle_gates(self) -> int:
        if self.gamma >= 1:
            raise ConfigError("idle injection cannot reach gamma = 1")
        return int(round(sim.idle_gates_for_gamma(self.gamma, self.gate_time, self.t1)))

    @property
    def realized_gamma(self) -> float:
        """Damping actually applied (idle injection rounds to whole gates)."""
        if self.injection == "idle":
            return sim.idle_gamma(self.idle_gates, self.gate_time, self.t1)
        return self.gamma

    def noise_model(self) -> sim.NoiseModel:
        return sim.NoiseModel(T1=self.t1, gate_time_id=self.gate_time, mu_1q=self.mu_1q, mu_2q=self.mu_2q)


@dataclass(frozen=True)
class Response:
    num: npt.NDArray[np.complex128]
    den: npt.NDArray[np.complex128] | None = None
    gamma: float = 0.0

    def f2(self, theta: npt.ArrayLike, phi: npt.ArrayLike = 0.0) -> npt.NDArray[np.float64]:
        val = petz.fidelity_form(self.num, theta, phi)
        if self.den is None:
            return val
        th, ph = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
        c = np.stack([np.cos(th / 2) + 0j, np.exp(1j * ph) * np.sin(th / 2)])
        tr = np.real(np.einsum("c...,d...,cd->...", c, np.conj(c), self.den))
        if np.any(tr < sim.ZERO_PROB):
            raise ZeroProbability("post-selection probability vanished")
        return val / tr

    def success_prob(self, theta: npt.ArrayLike, phi: npt.ArrayLike = 0.0) -> npt.NDArray[np.float64]:
        if self.den is None:
            return np.ones_like(np.asarray(theta, float))
        th, ph = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
        c = np.stack([np.cos(th / 2) + 0j, np.exp(1j * ph) * np.sin(th / 2)])
        return np.real(np.einsum("c...,d...,cd->...", c, np.conj(c), self.den))

    def worst_case(self, grid: int = petz.GRID) -> petz.WorstCase:
        if self.den is None:
            return petz.minimize_form(self.num, grid=grid)
        th = np.linspace(0, np.pi, grid)
        ph = np.linspace(0, 2 * np.pi, grid, endpoint=False)
        tt, pp = np.meshgrid(th, ph, indexing="ij")
        vals = self.f2(tt, pp)
        i = int(np.argmin(vals))
        t, p = float(tt.flat[i]), float(pp.flat[i])
        return petz.WorstCase(float(vals.flat[i]), codes.logical_state(t, p), t, p)


# ----------------------------------------------------------------- cached objects


@lru_cache(maxsize=64)
def _noise(n: int, gamma: float) -> channels.KrausChannel:
    return channels.tensor_power(channels.amplitude_damping(gamma), n)


@lru_cache(maxsize=64)
def _petz(code_name: str, gamma: float) -> petz.PetzMap:
    code = codes.get_code(code_name)
    return petz.construct_code_petz(code, _noise(code.n, gamma))


@lru_cache(maxsize=64)
def _iso(code_name: str, gamma: float) -> iso_synth.IsoSynthesis:
    return iso_synth.synthesize_petz(_petz(code_name, gamma))


@lru_cache(maxsize=64)
def _povm(code_name: str, gamma: float) -> povm_synth.PovmSequence:
    return povm_synth.build_povm_sequence(_petz(code_name, gamma).channel)


@lru_cache(maxsize=16)
def _wcirc(code_name: str, gamma: float) -> blockenc.WCircuit:
    code = codes.get_code(code_name)
    return blockenc.build_W(code, _noise(code.n, gamma))


def petz_for(setup: Setup) -> petz.PetzMap:
    return _petz(setup.code, setup.gamma)


def iso_for(setup: Setup) -> iso_synth.IsoSynthesis:
    return _iso(setup.code, setup.gamma)


def povm_for(setup: Setup) -> povm_synth.PovmSequence:
    return _povm(setup.code, setup.gamma)


# ----------------------------------------------------------------- circuit pieces


def _encoder_ops(code: QuantumCode, sys_offset: int, noiseless: bool) -> list[sim.Op]:
    return [
        sim.Unitary(tuple(sys_offset + q for q in qs), g, label=lab, noiseless=noiseless)
        for lab, g, qs in code.encoder
    ]


def _damping_ops(setup: Setup, n: int, sys_offset: int, scratch: int | None) -> list[sim.Op]:
    g = setup.gamma
    if setup.injection == "channel":
        return iso_synth.noise_ops(_noise(n, g), n, sys_offset, "channel")
    if setup.injection == "circuit":
        return iso_synth.noise_ops(None, n, sys_offset, "circuit", scratch=scratch, gamma=g)
    return iso_synth.noise_ops(None, n, sys_offset, "idle", idle_gates=setup.idle_gates)


def build_program(setup: Setup) -> tuple[sim.SynthesizedCircuit, tuple[int, ...], tuple[int, ...], int]:
    """Full circuit for ``setup``.

    Returns ``(circuit, system qubits, post-selected qubits, logical qubit)``;
    the logical input enters on the returned qubit, every other qubit starts
    in ``|0>``.
    """
    code = codes.get_code(setup.code)
    n = code.n
    scratch_needed = setup.injection == "circuit"
    if setup.method == "iso":
        syn = iso_for(setup)
        a = syn.ancilla_qubits
        total = a + n + (1 if scratch_needed else 0)
        sys_q = tuple(range(a, a + n))
        circ = sim.SynthesizedCircuit(total, name="iso")
        circ.extend(_encoder_ops(code, a, not setup.noisy_encoder))
        circ.extend(_damping_ops(setup, n, a, a + n if scratch_needed else None))
        circ.extend(syn.circuit(0))
        return circ, sys_q, (), a + code.logical_qubits[0]
    if setup.method == "povm":
        seq = povm_for(setup)
        total = 2 + n + (1 if scratch_needed else 0)
        sys_q = tuple(range(2, 2 + n))
        circ = sim.SynthesizedCircuit(total, name="povm")
        circ.extend(_encoder_ops(code, 2, not setup.noisy_encoder))
        circ.extend(_damping_ops(setup, n, 2, 2 + n if scratch_needed else None))
        circ.extend(povm_synth.povm_circuit(seq, 0))
        return circ, sys_q, (), 2 + code.logical_qubits[0]
    if setup.method == "blockenc":
        wc = _wcirc(setup.code, setup.gamma)
        reg = blockenc.registers(wc)
        total = reg.total + (1 if scratch_needed else 0)
        circ = sim.SynthesizedCircuit(total, name="blockenc")
        off = reg.s[0]
        circ.extend(_encoder_ops(code, off, not setup.noisy_encoder))
        circ.extend(_damping_ops(setup, n, off, reg.total if scratch_needed else None))
        if setup.prep == "exact":
            # exact I/2 on each Kraus qubit
            for q in reg.k:
                circ.append(sim.Channel((q,), channels.depolarizing(1.0).kraus, "mix"))
            circ.extend(blockenc.recovery_ops(wc, "exact", postselect=False))
        else:
            circ.extend(blockenc.recovery_ops(wc, setup.prep, postselect=False))
        return circ, reg.s, (reg.p, reg.be) + reg.k, reg.s[0] + code.logical_qubits[0]
    if setup.method == "unencoded":
        total = 1 + (1 if scratch_needed else 0)
        circ = sim.SynthesizedCircuit(total, name="unencoded")
        circ.extend(_damping_ops(setup, 1, 0, 1 if scratch_needed else None))
        return circ, (0,), (), 0
    raise ConfigError(f"method {setup.method!r} has no circuit")


def _logical_operator(total: int, logical: int, c: int, d: int) -> npt.NDArray[np.complex128]:
    dim = 2**total
    out = np.zeros((dim, dim), dtype=np.complex128)
    out[c << (total - 1 - logical), d << (total - 1 - logical)] = 1.0
    return out


def response(setup: Setup) -> Response:
    """Logical response of the pipeline described by ``setup``."""
    code = codes.get_code(setup.code) if setup.method != "unencoded" else codes.trivial_code()
    if setup.method == "exact":
        pm = petz_for(setup)
        noise = _noise(code.n, setup.realized_gamma)
        t = petz.logical_response(code, lambda r: pm(channels.apply_unchecked(noise.kraus, r)))
        return Response(t, None, setup.realized_gamma)
    if setup.method == "unencoded" and setup.injection == "channel" and not setup.mu_1q:
        t = petz.logical_response(code, channels.amplitude_damping(setup.gamma))
        return Response(t, None, setup.gamma)
    circ, sys_q, post_q, logical = build_program(setup)
    nm = setup.noise_model()
    outputs = np.zeros((2, 2, 2**len(sys_q), 2**len(sys_q)), dtype=np.complex128)
    traces = np.zeros((2, 2), dtype=np.complex128)
    for c in range(2):
        for d in range(2):
            out = sim.evolve_operator(circ, _logical_operator(circ.qubits, logical, c, d), nm)
            if post_q:
                out = _project(out, circ.qubits, post_q)
            keep = list(sys_q)
            red = linalg.partial_trace(out, [2] * circ.qubits, [q for q in range(circ.qubits) if q not in keep])
            outputs[c, d] = red
            traces[c, d] = np.trace(red)
    t = petz.response_from_outputs(outputs, code.codewords)
    return Response(t, traces if post_q else None, setup.realized_gamma)


def _project(rho: npt.NDArray[np.complex128], n: int, qubits: tuple[int, ...]) -> npt.NDArray[np.complex128]:
    t = rho.reshape([2] * (2 * n)).copy()
    for q in qubits:
        idx = [slice(None)] * (2 * n)
        idx[q] = 1
        t[tuple(idx)] = 0
        idx = [slice(None)] * (2 * n)
        idx[n + q] = 1
        t[tuple(idx)] = 0
    return t.reshape(rho.shape)


def baseline_f2(gamma: float, theta: npt.ArrayLike, phi: npt.ArrayLike = 0.0) -> npt.NDArray[np.float64]:
    """``F^2`` of an unencoded qubit under ``AD(gamma)``: ``1 - gamma sin^2(theta/2) (...)``."""
    t = petz.logical_response(codes.trivial_code(), channels.amplitude_damping(gamma))
    return petz.fidelity_form(t, theta, phi)


def theta_grid(points: int) -> npt.NDArray[np.float64]:
    if points < 1:
        raise ConfigError("theta grid needs at least one point")
    return np.linspace(0.0, math.pi, points)
