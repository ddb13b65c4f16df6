"""
Quantum codes and encoders.

A :class:`QuantumCode` stores its codewords, the codespace projector and an
encoding unitary ``U_en`` that maps the logical state, placed on the qubits
listed in ``logical_qubits`` with every other qubit in ``|0>``, onto the
codespace. The encoder is also kept as a gate list so that it can be
simulated gate by gate.

Only the four-qubit amplitude-damping code is shipped; :func:`trivial_code`
(an unencoded qubit) is provided as a baseline.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt

from . import gates, linalg
from .errors import ConfigError, DimMismatch, NotIsometry, NotNormalized
from .linalg import CMatrix

# (label, matrix, qubits) in application order
GateSpec = tuple[str, CMatrix, tuple[int, ...]]


@dataclass(frozen=True)
class QuantumCode:
    n: int
    k: int
    codewords: CMatrix  # shape (2**k, 2**n), one codeword per row
    encoder: tuple[GateSpec, ...]
    logical_qubits: tuple[int, ...]
    name: str = ""
    projector: CMatrix = field(init=False, repr=False)
    U_en: CMatrix = field(init=False, repr=False)

    def __post_init__(self) -> None:
        cw = np.asarray(self.codewords, dtype=np.complex128)
        if cw.shape != (2**self.k, 2**self.n):
            raise DimMismatch(f"codewords have shape {cw.shape}, expected {(2**self.k, 2**self.n)}")
        gram = np.conj(cw) @ cw.T
        if linalg.operator_norm(gram - np.eye(2**self.k)) > 1e-12:
            raise NotIsometry("codewords are not orthonormal")
        object.__setattr__(self, "codewords", cw)
        object.__setattr__(self, "projector", cw.T @ np.conj(cw))
        u = np.eye(2**self.n, dtype=np.complex128)
        for _, g, qs in self.encoder:
            u = gates.embed(g, qs, self.n) @ u
        object.__setattr__(self, "U_en", u)
        for idx in range(2**self.k):
            enc = u @ self._embed_logical(linalg.basis_vector(idx, 2**self.k))
            if np.linalg.norm(enc - cw[idx]) > 1e-12:
                raise NotIsometry(f"encoder does not map logical |{idx}> onto its codeword")

    @property
    def dim(self) -> int:
        return 2**self.n

    def _embed_logical(self, psi: npt.ArrayLike) -> npt.NDArray[np.complex128]:
        """``|psi>`` on the logical qubits, ``|0>`` elsewhere."""
        psi = np.asarray(psi, dtype=np.complex128).reshape(-1)
        full = np.zeros(2**self.n, dtype=np.complex128)
        for idx, amp in enumerate(psi):
            bits = [(idx >> (self.k - 1 - j)) & 1 for j in range(self.k)]
            pos = 0
            for q, b in zip(self.logical_qubits, bits):
                pos |= b << (self.n - 1 - q)
            full[pos] = amp
        return full

    def logical_input(self, psi: npt.ArrayLike) -> npt.NDArray[np.complex128]:
        """Unencoded register state fed to ``U_en``."""
        return self._embed_logical(_normalized(psi, 2**self.k))

    def to_json(self) -> str:
        return json.dumps(
            {
                "name": self.name,
                "n": self.n,
                "k": self.k,
                "codewords": [linalg.vector_to_pairs(c) for c in self.codewords],
                "logical_qubits": list(self.logical_qubits),
                "encoder": [
                    {"label": lab, "qubits": list(qs), "matrix": linalg.matrix_to_pairs(g)}
                    for lab, g, qs in self.encoder
                ],
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "QuantumCode":
        d = json.loads(text)
        cw = np.array([linalg.vector_from_pairs(c) for c in d["codewords"]])
        enc = tuple(
            (g["label"], linalg.matrix_from_pairs(g["matrix"]), tuple(g["qubits"])) for g in d["encoder"]
        )
        return cls(d["n"], d["k"], cw, enc, tuple(d["logical_qubits"]), name=d.get("name", ""))


@dataclass(frozen=True)
class PreparedEncoder:
    U_tilde: CMatrix
    target_state: npt.NDArray[np.complex128]
    U1: CMatrix


def _normalized(psi: npt.ArrayLike, dim: int) -> npt.NDArray[np.complex128]:
    v = np.asarray(psi, dtype=np.complex128).reshape(-1)
    if v.shape != (dim,):
        raise DimMismatch(f"state of length {v.size}, expected {dim}")
    if abs(np.linalg.norm(v) - 1.0) > 1e-9:
        raise NotNormalized(f"state has norm {np.linalg.norm(v):.6g}")
    return v


def _cnot(c: int, t: int) -> GateSpec:
    return (f"cx({c},{t})", gates.CNOT, (c, t))


def leung_code() -> QuantumCode:
    """Four-qubit amplitude-damping code.

    ``|0_L> = (|0000> + |1111>)/sqrt 2`` and ``|1_L> = (|0011> + |1100>)/sqrt 2``.
    The logical qubit enters on qubit 2 (the third qubit); the encoder is
    ``H(0)``, ``CNOT(0,1)``, ``CNOT(2,3)``, ``CNOT(0,2)``, ``CNOT(0,3)``.
    """
    cw = np.zeros((2, 16), dtype=np.complex128)
    cw[0, 0b0000] = cw[0, 0b1111] = 1 / np.sqrt(2)
    cw[1, 0b0011] = cw[1, 0b1100] = 1 / np.sqrt(2)
    encoder = (
        ("h(0)", gates.H, (0,)),
        _cnot(0, 1),
        _cnot(2, 3),
        _cnot(0, 2),
        _cnot(0, 3),
    )
    return QuantumCode(4, 1, cw, encoder, (2,), name="leung4")


def trivial_code() -> QuantumCode:
    """A single unencoded qubit (``n = k = 1``)."""
    return QuantumCode(1, 1, np.eye(2, dtype=np.complex128), (), (0,), name="unencoded")


def get_code(name: str) -> QuantumCode:
    codes = {"leung4": leung_code, "4qubit": leung_code, "unencoded": trivial_code}
    try:
        return codes[name]()
    except KeyError:
        raise ConfigError(f"unknown code {name!r}; choose from {sorted(codes)}") from None


def encode(code: QuantumCode, psi: npt.ArrayLike) -> npt.NDArray[np.complex128]:
    """``sum_i psi_i |i_L>``."""
    v = _normalized(psi, 2**code.k)
    return code.codewords.T @ v


def logical_state(theta: float, phi: float = 0.0) -> npt.NDArray[np.complex128]:
    """``cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>``."""
    return np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)], dtype=np.complex128)


def state_prep_unitary(psi: npt.ArrayLike) -> CMatrix:
    """A unitary whose first column is ``psi``."""
    v = np.asarray(psi, dtype=np.complex128).reshape(-1, 1)
    return linalg.complete_to_unitary(v)


def tilde_encoder(code: QuantumCode, psi: npt.ArrayLike) -> PreparedEncoder:
    """``U_tilde = U_en (U1 on the logical qubits)`` so that ``U_tilde |0...0>`` is the encoded ``psi``."""
    v = _normalized(psi, 2**code.k)
    u1 = state_prep_unitary(v)
    u1_full = gates.embed(u1, code.logical_qubits, code.n)
    return PreparedEncoder(code.U_en @ u1_full, v, u1)
