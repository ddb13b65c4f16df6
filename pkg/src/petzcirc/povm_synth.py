"""
Approximate channel synthesis with a sequence of two-outcome measurements.

Each Kraus operator is split by its polar decomposition ``K = U P`` with
``P = sqrt(K^dag K)``; the measurement ``{P, Q = sqrt(I - K^dag K)}`` is
realised by the unitary ``[[P, -Q], [Q, P]]`` on ``ancilla (x) system``. On
outcome ``P`` the polar unitary completes ``K``; on outcome ``Q`` the state
is passed to the next step. The last (dominant) Kraus operator is not
measured: the surviving branch receives its polar unitary.

For a channel with Kraus operators sorted so that the measured ones are
small, the result matches the channel up to ``O(||K^dag K||^2)`` corrections,
and it is exact whenever the surviving branch satisfies ``Q_1 ... Q_{N-1} =
P_N`` (amplitude damping, for example).

Circuit layout: ``[F, A, S]`` where ``A`` is the measurement ancilla (reset
after every step) and ``F`` flags that a branch has already been completed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from . import channels, linalg, simulator as sim
from .channels import KrausChannel
from .codes import QuantumCode
from .errors import DimMismatch, OutOfRange
from .linalg import CMatrix
from .petz import construct_code_petz, worst_case_fidelity


@dataclass(frozen=True)
class PovmStep:
    K: CMatrix
    P_blk: CMatrix
    Q_blk: CMatrix
    U_polar: CMatrix
    U_M: CMatrix


@dataclass(frozen=True)
class PovmSequence:
    steps: tuple[PovmStep, ...]
    final_unitary: CMatrix
    residual: CMatrix
    dim: int
    ancilla_count: int = 2

    def to_json(self) -> str:
        return json.dumps(
            {
                "dim": self.dim,
                "steps": [
                    {"P": linalg.matrix_to_pairs(s.P_blk), "Q": linalg.matrix_to_pairs(s.Q_blk),
                     "U": linalg.matrix_to_pairs(s.U_polar)}
                    for s in self.steps
                ],
                "final_unitary": linalg.matrix_to_pairs(self.final_unitary),
            }
        )


def _sort_key(k: CMatrix) -> tuple[float, float]:
    kk = linalg.dagger(k) @ k
    # rounding keeps degenerate norms tied so the trace decides
    return (round(linalg.operator_norm(kk), 10), round(float(np.trace(kk).real), 10))


def measurement_unitary(p: CMatrix, q: CMatrix, first: bool) -> CMatrix:
    """``[[P, -Q], [Q, P]]`` for the first step, ``[[Q, -P], [P, Q]]`` afterwards."""
    a, b = (p, q) if first else (q, p)
    return np.block([[a, -b], [b, a]])


def build_povm_sequence(ch: KrausChannel) -> PovmSequence:
    """Measurement sequence for ``ch``.

    Kraus operators are ordered by ascending ``||K^dag K||`` (ties broken by
    ascending ``Tr K^dag K``); the last operator is the unmeasured residual.
    """
    ks = sorted(ch.kraus, key=_sort_key)
    d = ch.dim
    steps = []
    for idx, k in enumerate(ks[:-1]):
        # one SVD K = W S V^dag gives U = W V^dag, P = V S V^dag, Q = V sqrt(1 - S^2) V^dag
        _, s, v = linalg.svd(k)
        u, _ = linalg.polar(k)
        p = (v * s) @ linalg.dagger(v)
        q = (v * np.sqrt(np.clip(1 - s**2, 0.0, None))) @ linalg.dagger(v)
        p, q = 0.5 * (p + linalg.dagger(p)), 0.5 * (q + linalg.dagger(q))
        steps.append(PovmStep(k, p, q, u, measurement_unitary(p, q, idx == 0)))
    u_fin, _ = linalg.polar(ks[-1])
    return PovmSequence(tuple(steps), u_fin, ks[-1], d)


def execute_povm(seq: PovmSequence, rho: npt.ArrayLike) -> CMatrix:
    """Channel realised by the measurement sequence (linear in ``rho``)."""
    r = linalg.as_cmatrix(rho)
    if r.shape != (seq.dim, seq.dim):
        raise DimMismatch(f"state of shape {r.shape} for a dim-{seq.dim} sequence")
    out = np.zeros_like(r)
    res = r
    for s in seq.steps:
        out = out + s.K @ res @ linalg.dagger(s.K)
        res = s.Q_blk @ res @ s.Q_blk
    u = seq.final_unitary
    return out + u @ res @ linalg.dagger(u)


def povm_channel(seq: PovmSequence):
    """``execute_povm`` bound to ``seq`` as a linear map."""
    return lambda rho: execute_povm(seq, rho)


def _cost(nq: int) -> tuple[int, int]:
    return sim.generic_cost(nq)


def povm_circuit(seq: PovmSequence, offset: int = 0, cost_model=None) -> list[sim.Op]:
    """Ops on ``[F, A, S]`` (``F`` at ``offset``) implementing :func:`execute_povm`."""
    cost_model = cost_model or _cost
    n = int(round(math.log2(seq.dim)))
    f, a = offset, offset + 1
    s = tuple(range(offset + 2, offset + 2 + n))
    ops: list[sim.Op] = []
    for idx, st in enumerate(seq.steps):
        if idx == 0:
            ops.append(sim.Unitary((a,) + s, st.U_M, label="U_M1", cost=cost_model(n + 1)))
            ops.append(sim.Unitary(s, st.U_polar, controls=(a,), control_values=(0,), label="U_1",
                                   cost=cost_model(n + 1)))
        else:
            ops.append(sim.Unitary((a,) + s, st.U_M, controls=(f,), label=f"U_M{idx + 1}", cost=cost_model(n + 2)))
            ops.append(sim.Unitary(s, st.U_polar, controls=(f, a), label=f"U_{idx + 1}", cost=cost_model(n + 2)))
        ops.append(sim.Unitary((a, f), _CNOT, label="cx"))
        ops.append(sim.Reset(a))
    ctrl = (f,) if seq.steps else ()
    ops.append(sim.Unitary(s, seq.final_unitary, controls=ctrl, label="U_fin",
                           cost=cost_model(n + len(ctrl))))
    return ops


_CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128)


def run_povm_circuit(seq: PovmSequence, rho: npt.ArrayLike, noise: sim.NoiseModel | None = None) -> CMatrix:
    """Simulate :func:`povm_circuit` on ``rho`` and return the system state."""
    r = linalg.as_cmatrix(rho)
    n = int(round(math.log2(seq.dim)))
    circ = sim.SynthesizedCircuit(n + 2, povm_circuit(seq))
    init = linalg.kron(np.diag([1.0, 0.0, 0.0, 0.0]), r)
    out = sim.evolve_operator(circ, init, noise)
    return linalg.partial_trace(out, [4, seq.dim], [0])


@dataclass(frozen=True)
class DeltaSample:
    gamma: float
    delta: float
    exact: float
    approx: float


def delta_at(code: QuantumCode, gamma: float, circuit_level: bool = False) -> DeltaSample:
    """``|F^2_min(approx) - F^2_min(exact)|`` for i.i.d. amplitude damping."""
    noise = channels.tensor_power(channels.amplitude_damping(gamma), code.n)
    pm = construct_code_petz(code, noise)
    seq = build_povm_sequence(pm.channel)
    exact = worst_case_fidelity(code, lambda r: pm(channels.apply_unchecked(noise.kraus, r)))
    if circuit_level:
        approx_map = lambda r: run_povm_circuit(seq, channels.apply_unchecked(noise.kraus, r))  # noqa: E731
    else:
        approx_map = lambda r: execute_povm(seq, channels.apply_unchecked(noise.kraus, r))  # noqa: E731
    approx = worst_case_fidelity(code, approx_map)
    return DeltaSample(gamma, abs(approx.f2_min - exact.f2_min), exact.f2_min, approx.f2_min)


def delta_curve(code: QuantumCode, gammas: npt.ArrayLike) -> list[DeltaSample]:
    out = []
    for g in np.asarray(gammas, dtype=float):
        if not 0 <= g <= 0.5:
            raise OutOfRange(f"gamma={g} outside [0, 0.5]")
        out.append(delta_at(code, float(g)))
    return out


@dataclass(frozen=True)
class QuadraticFit:
    coefficients: tuple[float, float, float]  # leading first
    r_squared: float


def quadratic_fit(x: npt.ArrayLike, y: npt.ArrayLike) -> QuadraticFit:
    x, y = np.asarray(x, float), np.asarray(y, float)
    c = np.polyfit(x, y, 2)
    fit = np.polyval(c, x)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum((y - fit) ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return QuadraticFit((float(c[0]), float(c[1]), float(c[2])), r2)
