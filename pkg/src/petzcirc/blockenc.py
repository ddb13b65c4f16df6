"""
Block encodings and the post-selected recovery circuit.

``block_encode`` embeds any square ``A = V1 S V2^dag`` as the top-left block
of ``(I (x) V1) U_S (I (x) V2^dag)``, where ``U_S`` applies the rotation
``R_y(2 theta_i)`` with ``cos(theta_i) = s_i / alpha`` to a single ancilla,
controlled on the singular-vector index. ``block_diag_encode`` turns an
encoding of ``A`` into one of ``I_{2^m} (x) A`` by conjugating with a
register permutation.

The recovery circuit acts on ``[P | BE | K | S]``:

``S``
    the noisy ``n``-qubit code register;
``K``
    the Kraus register (``log2`` of the padded Kraus count), prepared in the
    maximally mixed state;
``BE``
    the block-encoding ancilla;
``P``
    the flag of the projection channel that discards states outside the
    codespace.

``W = (I (x) V_E^dag) U_D`` on ``[BE | K | S]``, where ``U_D`` block-encodes
``I_K (x) E(P)^{-1/2} / ||E(P)^{-1/2}||`` and ``V_E`` is the isometric
extension of the noise. The block of ``W`` with ``BE = 0`` in the output,
``K = 0`` in the output and ``K = i`` in the input is
``E_i^dag E(P)^{-1/2} / ||E(P)^{-1/2}||``. Post-selecting ``P``, ``BE`` and
``K`` on zero leaves the Petz output, with success probability
``1 / (2^|K| ||E(P)^{-1/2}||^2)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import numpy.typing as npt

from . import channels, gates, linalg, simulator as sim
from .channels import KrausChannel
from .codes import QuantumCode, tilde_encoder
from .errors import ConfigError, DimMismatch, NumericalFailure, ZeroProbability
from .iso_synth import build_isometry
from .linalg import CMatrix
from .petz import construct_code_petz

BLOCK_ATOL = 1e-10


@dataclass(frozen=True)
class BlockEncoding:
    U: CMatrix
    alpha: float
    anc_qubits: int
    epsilon: float = 0.0

    @property
    def block_dim(self) -> int:
        return self.U.shape[0] // 2**self.anc_qubits

    def top_left(self) -> CMatrix:
        d = self.block_dim
        return self.U[:d, :d]

    def encoded(self) -> CMatrix:
        """``alpha <0| U |0>``."""
        return self.alpha * self.top_left()


def _rotation_stage(s: npt.NDArray[np.float64], alpha: float) -> CMatrix:
    theta = np.arccos(np.clip(s / alpha, -1.0, 1.0))
    c, sn = np.diag(np.cos(theta)), np.diag(np.sin(theta))
    return np.block([[c, -sn], [sn, c]]).astype(np.complex128)


def block_encode(A: npt.ArrayLike) -> BlockEncoding:
    """Exact one-ancilla block encoding with ``alpha = max(1, ||A||)``."""
    a = linalg.as_cmatrix(A)
    if a.shape[0] != a.shape[1]:
        raise DimMismatch("block encoding needs a square matrix")
    v1, s, v2 = linalg.svd(a)
    alpha = max(1.0, float(s[0]) if s.size else 0.0)
    eye2 = np.eye(2, dtype=np.complex128)
    u = linalg.kron(eye2, v1) @ _rotation_stage(s, alpha) @ linalg.kron(eye2, linalg.dagger(v2))
    d = a.shape[0]
    eps = linalg.operator_norm(a - alpha * u[:d, :d])
    return BlockEncoding(u, alpha, 1, eps)


def block_diag_encode(be: BlockEncoding, m_qubits: int) -> BlockEncoding:
    """Encoding of ``I_{2^m} (x) A`` on ``[anc | extra | system]``.

    ``U (x) I`` acts on ``[anc | system | extra]``; swapping the ``system``
    and ``extra`` registers on both sides moves the copies of ``A`` onto the
    diagonal of the ``anc = 0`` block.
    """
    if m_qubits == 0:
        return be
    da, d, dm = 2**be.anc_qubits, be.block_dim, 2**m_qubits
    big = linalg.kron(be.U, np.eye(dm, dtype=np.complex128))
    ud = linalg.permute_subsystems(big, [da, d, dm], [0, 2, 1])
    eps = linalg.operator_norm(linalg.kron(np.eye(dm), be.top_left()) - ud[: d * dm, : d * dm]) * be.alpha
    return BlockEncoding(ud, be.alpha, be.anc_qubits, max(be.epsilon, eps))


def projection_channel(code: QuantumCode) -> KrausChannel:
    """Two-Kraus channel on ``[BE | S]`` keeping ``BE = 0`` codespace states in branch 0."""
    p = code.projector
    perp = np.eye(code.dim) - p
    e00 = np.diag([1.0, 0.0]).astype(np.complex128)
    e11 = np.diag([0.0, 1.0]).astype(np.complex128)
    k1 = linalg.kron(e00, p)
    k2 = linalg.kron(e00, perp) + linalg.kron(e11, np.eye(code.dim))
    return KrausChannel((k1, k2), label="proj")


def projection_isometry(code: QuantumCode) -> CMatrix:
    """Isometric extension ``U_P`` of :func:`projection_channel` on ``[P | BE | S]``."""
    return build_isometry(projection_channel(code))


@dataclass(frozen=True)
class WCircuit:
    W: CMatrix
    code_n: int
    kraus_count: int
    kraus_qubits: int
    proj_iso: CMatrix
    scale: float
    V_E: CMatrix
    U_D: CMatrix

    def first_row_block(self, i: int) -> CMatrix:
        """``<BE=0, K=0| W |BE=0, K=i>`` acting on ``S``."""
        d = 2**self.code_n
        return self.W[:d, i * d : (i + 1) * d]

    def success_probability(self) -> float:
        return success_probability_formula(2**self.kraus_qubits, self.scale)

    def to_json(self) -> str:
        return json.dumps({"W": linalg.matrix_to_pairs(self.W), "U_P": linalg.matrix_to_pairs(self.proj_iso),
                           "scale": self.scale, "kraus_count": self.kraus_count})


def build_W(code: QuantumCode, noise: KrausChannel) -> WCircuit:
    if noise.dim != code.dim:
        raise DimMismatch(f"noise acts on dim {noise.dim}, code on dim {code.dim}")
    pm = construct_code_petz(code, noise)
    kb = channels.env_qubits(noise.num_kraus)
    v_e = channels.isometric_extension(noise)
    be = block_encode(pm.EP_inv_sqrt / pm.scale)
    ud = block_diag_encode(be, kb).U
    eye2 = np.eye(2, dtype=np.complex128)
    w = linalg.kron(eye2, linalg.dagger(v_e)) @ ud
    return WCircuit(w, code.n, noise.num_kraus, kb, projection_isometry(code), pm.scale, v_e, ud)


def success_probability_formula(kraus_count: int, scale: float) -> float:
    """``1 / (N^n ||E(P)^{-1/2}||^2)``."""
    return 1.0 / (kraus_count * scale**2)


def qsvt_reference_probability(kraus_count: int, scale: float) -> float:
    """Reference value ``1 / (16 N^n ||E(P)^{-1}||)`` with ``||E(P)^{-1}|| = scale^2``."""
    return 1.0 / (16 * kraus_count * scale**2)


def maximally_mixed_prep(n_qubits: int) -> CMatrix:
    """``AD(1/2)`` on every qubit of ``|1...1>``, which gives ``I / 2^n``."""
    rho1 = channels.damp_qubit(np.diag([0.0, 1.0]), 0.5)
    return linalg.kron(*([rho1] * n_qubits)) if n_qubits else np.ones((1, 1), dtype=np.complex128)


def maximally_entangled(n_qubits: int) -> npt.NDArray[np.complex128]:
    """``2^{-n/2} sum_x |x>|x>`` on ``2n`` qubits; either half is ``I / 2^n``."""
    d = 2**n_qubits
    return (np.eye(d, dtype=np.complex128) / math.sqrt(d)).reshape(-1)


class Registers(NamedTuple):
    p: int
    be: int
    k: tuple[int, ...]
    s: tuple[int, ...]
    total: int


def registers(wc: WCircuit) -> Registers:
    kb, n = wc.kraus_qubits, wc.code_n
    return Registers(0, 1, tuple(range(2, 2 + kb)), tuple(range(2 + kb, 2 + kb + n)), 2 + kb + n)


def recovery_ops(wc: WCircuit, prep: str = "exact", postselect: bool = True) -> list[sim.Op]:
    """``W`` then ``U_P``; ``prep="hardware"`` first prepares ``K`` by ``X`` + ``AD(1/2)``."""
    reg = registers(wc)
    ops: list[sim.Op] = []
    if prep == "hardware":
        ad = channels.amplitude_damping(0.5).kraus
        for q in reg.k:
            ops.append(sim.Unitary((q,), gates.X, label="x"))
            ops.append(sim.Channel((q,), ad, "AD(0.5)"))
    elif prep != "exact":
        raise ConfigError(f"unknown ancilla preparation {prep!r}")
    ops.append(sim.Unitary((reg.be,) + reg.k + reg.s, wc.W, label="W"))
    ops.append(sim.Unitary((reg.p, reg.be) + reg.s, wc.proj_iso, label="U_P"))
    if postselect:
        ops.append(sim.PostSelect((reg.p, reg.be) + reg.k))
    return ops


def _initial_density(wc: WCircuit, rho_sys: CMatrix, prep: str) -> CMatrix:
    reg = registers(wc)
    flags = np.zeros((4, 4), dtype=np.complex128)
    flags[0, 0] = 1.0
    dk = 2 ** len(reg.k)
    if prep == "exact":
        k = np.eye(dk, dtype=np.complex128) / dk
    else:
        k = np.zeros((dk, dk), dtype=np.complex128)
        k[0, 0] = 1.0
    return linalg.kron(flags, k, rho_sys)


def petz_blockenc_recover(code: QuantumCode, noise: KrausChannel, rho_noisy: npt.ArrayLike,
                          prep: str = "exact", wc: WCircuit | None = None) -> tuple[CMatrix, float]:
    """Post-selected recovery of ``rho_noisy``; returns ``(state, success_prob)``.

    Raises
    ------
    ZeroProbability
        If the post-selection probability is below ``1e-14``.
    """
    wc = wc or build_W(code, noise)
    reg = registers(wc)
    r = linalg.as_cmatrix(rho_noisy)
    circ = sim.SynthesizedCircuit(reg.total, recovery_ops(wc, prep, postselect=False))
    init = sim.SimState("mixed", reg.total, _initial_density(wc, r, prep))
    out = sim.run(circ, init).state.data
    # project P, BE, K onto zero; the remaining block is the system
    d = code.dim
    branch = out[:d, :d]
    p = float(np.trace(branch).real)
    if p < sim.ZERO_PROB:
        raise ZeroProbability(f"post-selection probability {p:.3e}")
    return branch / p, p


def petz_fidelity_prob(code: QuantumCode, noise: KrausChannel, psi: npt.ArrayLike,
                       prep: str = "exact", wc: WCircuit | None = None) -> tuple[float, float]:
    """All-zero probability after appending ``U_en~^dag``; returns ``(prob, F^2)``.

    ``F^2 = prob * N^n * ||E(P)^{-1/2}||^2``.
    """
    wc = wc or build_W(code, noise)
    reg = registers(wc)
    enc = tilde_encoder(code, psi)
    circ = sim.SynthesizedCircuit(reg.total)
    circ.append(sim.Unitary(reg.s, enc.U_tilde, label="U_en~"))
    circ.append(sim.Channel(reg.s, noise.kraus, noise.label))
    circ.extend(recovery_ops(wc, prep, postselect=False))
    circ.append(sim.Unitary(reg.s, linalg.dagger(enc.U_tilde), label="U_en~^dag"))
    init = sim.SimState("mixed", reg.total, _initial_density(wc, np.diag([1.0] + [0.0] * (code.dim - 1)), prep))
    out = sim.run(circ, init).state.data
    prob = float(out[0, 0].real)
    f2 = prob * 2 ** wc.kraus_qubits * wc.scale**2
    if f2 > 1 + 1e-9:
        raise NumericalFailure(f"inferred F^2 = {f2:.12g} exceeds 1")
    return prob, f2
