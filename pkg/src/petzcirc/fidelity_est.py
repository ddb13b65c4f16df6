"""
Circuits whose all-zero outcome probability measures a fidelity.

Given a purification ``G|0> = sum ... `` of ``rho = N(|psi><psi|)`` on
``[anc | S]``, the unitary

    U_rho = (G^dag (x) I) (I_anc (x) SWAP_{S,S'}) (G (x) I)

on ``[anc | S | S']`` block-encodes ``rho`` on ``S'``: its ``anc = S = 0``
block is ``rho``. Sandwiching it between the state preparation ``U`` on
``S'`` and its inverse gives an amplitude ``<psi|rho|psi> = F^2`` for the
all-zero outcome, hence probability ``F^4``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from . import blockenc, channels, linalg, simulator as sim
from .channels import KrausChannel
from .codes import QuantumCode, tilde_encoder
from .errors import DimMismatch, NumericalFailure
from .iso_synth import build_isometry, composite_ops
from .linalg import CMatrix
from .petz import construct_code_petz, fidelity

CHECK_ATOL = 1e-9


@dataclass(frozen=True)
class FidelityCircuit:
    total_qubits: int
    program: sim.SynthesizedCircuit
    readout: str
    interpretation: str


def _nqubits(dim: int) -> int:
    n = int(round(math.log2(dim)))
    if 2**n != dim:
        raise DimMismatch(f"dimension {dim} is not a power of two")
    return n


def purification_G(ch: KrausChannel, U: npt.ArrayLike) -> CMatrix:
    """``G = V_N (I (x) U)`` on ``[anc | S]``; ``Tr_anc G|0><0|G^dag = ch(U|0><0|U^dag)``."""
    u = linalg.as_cmatrix(U)
    if u.shape != (ch.dim, ch.dim):
        raise DimMismatch(f"state preparation of shape {u.shape} for a dim-{ch.dim} channel")
    v = channels.isometric_extension(ch)
    da = v.shape[0] // ch.dim
    return v @ linalg.kron(np.eye(da, dtype=np.complex128), u)


def density_block_encoding(G: npt.ArrayLike, dim: int) -> CMatrix:
    """``(G^dag (x) I)(I_anc (x) SWAP)(G (x) I)`` on ``[anc | S | S']``."""
    g = linalg.as_cmatrix(G)
    da = g.shape[0] // dim
    eye = np.eye(dim, dtype=np.complex128)
    swap = linalg.kron(np.eye(da, dtype=np.complex128), linalg.swap_registers(dim, dim))
    left = linalg.kron(g, eye)
    return linalg.dagger(left) @ swap @ left


def _swap_ops(a: tuple[int, ...], b: tuple[int, ...]) -> list[sim.Op]:
    from .gates import SWAP

    return [sim.Unitary((x, y), SWAP, label="swap") for x, y in zip(a, b)]


def fidelity_circuit(ch: KrausChannel, U: npt.ArrayLike) -> FidelityCircuit:
    """Program ``(I (x) U^dag) U_rho (I (x) U)`` from ``|0...0>``."""
    u = linalg.as_cmatrix(U)
    g = purification_G(ch, u)
    n = _nqubits(ch.dim)
    a = _nqubits(g.shape[0]) - n
    anc = tuple(range(a))
    s = tuple(range(a, a + n))
    sp = tuple(range(a + n, a + 2 * n))
    circ = sim.SynthesizedCircuit(a + 2 * n, name="fidelity")
    circ.append(sim.Unitary(sp, u, label="U"))
    circ.append(sim.Unitary(anc + s, g, label="G"))
    circ.extend(_swap_ops(s, sp))
    circ.append(sim.Unitary(anc + s, linalg.dagger(g), label="G^dag"))
    circ.append(sim.Unitary(sp, linalg.dagger(u), label="U^dag"))
    return FidelityCircuit(a + 2 * n, circ, "prob of all-zero", "F^4")


def _all_zero_prob(circ: sim.SynthesizedCircuit) -> float:
    out = sim.run(circ).state
    return float(abs(out.data[0]) ** 2) if out.kind == "pure" else float(out.data[0, 0].real)


def fidelity_circuit_prob(ch: KrausChannel, U: npt.ArrayLike, check: bool = True) -> float:
    """All-zero probability of :func:`fidelity_circuit`, equal to ``F^4``.

    Raises
    ------
    NumericalFailure
        If ``check`` and the probability differs from the channel-level
        ``F^4`` by more than ``1e-9``.
    """
    u = linalg.as_cmatrix(U)
    prob = _all_zero_prob(fidelity_circuit(ch, u).program)
    if check:
        psi = u[:, 0]
        f2 = fidelity(psi, channels.apply_unchecked(ch.kraus, linalg.projector(psi)))
        if abs(prob - f2**2) > CHECK_ATOL:
            raise NumericalFailure(f"circuit probability {prob:.12g} differs from F^4 = {f2**2:.12g}")
    return prob


def composite_fidelity_circuit(code: QuantumCode, noise: KrausChannel, psi: npt.ArrayLike) -> FidelityCircuit:
    """Fidelity circuit for ``R o E`` with the composite isometry on ``[E_R | E_E | S]``."""
    pm = construct_code_petz(code, noise)
    v_r = build_isometry(pm.channel)
    v_e = channels.isometric_extension(noise)
    a_r = _nqubits(v_r.shape[0]) - code.n
    a_e = _nqubits(v_e.shape[0]) - code.n
    n = code.n
    u = tilde_encoder(code, psi).U_tilde
    off = a_r + a_e
    s = tuple(range(off, off + n))
    sp = tuple(range(off + n, off + 2 * n))
    circ = sim.SynthesizedCircuit(off + 2 * n, name="composite-fidelity")
    circ.append(sim.Unitary(sp, u, label="U_en~"))
    circ.append(sim.Unitary(s, u, label="U_en~"))
    circ.extend(composite_ops(v_e, v_r, a_r, a_e, n))
    circ.extend(_swap_ops(s, sp))
    circ.extend(composite_ops(v_e, v_r, a_r, a_e, n, inverse=True))
    circ.append(sim.Unitary(s, linalg.dagger(u), label="U_en~^dag"))
    circ.append(sim.Unitary(sp, linalg.dagger(u), label="U_en~^dag"))
    return FidelityCircuit(off + 2 * n, circ, "prob of all-zero", "F^4")


def composite_fidelity_prob(code: QuantumCode, noise: KrausChannel, psi: npt.ArrayLike) -> float:
    """``F^4`` for ``(R o E)(|psi_en><psi_en|)`` read out as an all-zero probability."""
    return _all_zero_prob(composite_fidelity_circuit(code, noise, psi).program)


def squared_fidelity_from_prob(prob: float) -> float:
    if prob < -CHECK_ATOL or prob > 1 + CHECK_ATOL:
        raise NumericalFailure(f"probability {prob} outside [0, 1]")
    return math.sqrt(max(prob, 0.0))


def petz_fidelity_prob(code: QuantumCode, noise: KrausChannel, psi: npt.ArrayLike,
                       prep: str = "exact") -> tuple[float, float]:
    """``(prob, F^2)`` from the block-encoding recovery followed by ``U_en~^dag``.

    The all-zero outcome amplitude is ``F^2 / (N^n ||E(P)^{-1/2}||^2)``; see
    :func:`petzcirc.blockenc.petz_fidelity_prob`.
    """
    return blockenc.petz_fidelity_prob(code, noise, psi, prep)
