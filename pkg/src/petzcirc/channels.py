"""
Kraus-operator channels.

A :class:`KrausChannel` is an immutable list of Kraus operators. Channels
flagged trace-preserving are checked at construction. Besides the noise
models used throughout (amplitude damping, depolarizing) this module converts
channels to Choi matrices and to isometric extensions.

Register convention for isometric extensions: the environment register is the
most significant factor, ``V`` acts on ``env (x) system`` and the input lives
in the ``env = |0...0>`` block, so ``V[:, :dim]`` is the vertical stack of the
Kraus operators.
"""

from __future__ import annotations

import itertools
import json
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import numpy.typing as npt

from . import linalg
from .errors import DimMismatch, NotTracePreserving, OutOfRange, Unsupported
from .linalg import CMatrix

TP_ATOL = 1e-9

_PAULIS = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


@dataclass(frozen=True)
class KrausChannel:
    """Completely positive map ``rho -> sum_i K_i rho K_i^dagger``."""

    kraus: tuple[CMatrix, ...]
    label: str = ""
    trace_preserving: bool = True
    dim: int = field(init=False)

    def __post_init__(self) -> None:
        ks = tuple(linalg.as_cmatrix(k) for k in self.kraus)
        if not ks:
            raise DimMismatch("a channel needs at least one Kraus operator")
        d = ks[0].shape[0]
        for k in ks:
            if k.shape != (d, d):
                raise DimMismatch(f"Kraus operator of shape {k.shape} in a dim-{d} channel")
        object.__setattr__(self, "kraus", ks)
        object.__setattr__(self, "dim", d)
        if self.trace_preserving and self.tp_defect() > TP_ATOL:
            raise NotTracePreserving(f"Kraus operators violate sum K^dag K = I by {self.tp_defect():.2e}")

    @property
    def num_kraus(self) -> int:
        return len(self.kraus)

    def tp_defect(self) -> float:
        s = sum(linalg.dagger(k) @ k for k in self.kraus)
        return linalg.operator_norm(s - np.eye(self.dim))

    def __call__(self, rho: npt.ArrayLike) -> CMatrix:
        return apply(self, rho)

    def to_json(self) -> str:
        return json.dumps(
            {
                "dim": self.dim,
                "label": self.label,
                "trace_preserving": self.trace_preserving,
                "kraus": [linalg.matrix_to_pairs(k) for k in self.kraus],
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "KrausChannel":
        data = json.loads(text)
        ks = tuple(linalg.matrix_from_pairs(k) for k in data["kraus"])
        ch = cls(ks, label=data.get("label", ""), trace_preserving=data.get("trace_preserving", True))
        if ch.dim != int(data["dim"]):
            raise DimMismatch("declared dim does not match the Kraus operators")
        return ch


def identity_channel(dim: int) -> KrausChannel:
    return KrausChannel((np.eye(dim, dtype=np.complex128),), label=f"id{dim}")


def unitary_channel(u: npt.ArrayLike, label: str = "unitary") -> KrausChannel:
    return KrausChannel((linalg.as_cmatrix(u),), label=label)


def amplitude_damping(gamma: float) -> KrausChannel:
    """Single-qubit amplitude damping with decay probability ``gamma``."""
    if not 0.0 <= gamma <= 1.0:
        raise OutOfRange(f"gamma={gamma} outside [0, 1]")
    a0 = np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - gamma)]], dtype=np.complex128)
    a1 = np.array([[0.0, np.sqrt(gamma)], [0.0, 0.0]], dtype=np.complex128)
    return KrausChannel((a0, a1), label=f"AD({gamma:g})")


def damp_qubit(rho: npt.ArrayLike, gamma: float) -> CMatrix:
    """Closed-form action of ``AD(gamma)`` on a qubit density matrix.

    Populations are moved without square roots, so e.g. ``AD(1/2)`` on
    ``|1><1|`` gives exactly ``I/2``.
    """
    if not 0.0 <= gamma <= 1.0:
        raise OutOfRange(f"gamma={gamma} outside [0, 1]")
    r = linalg.as_cmatrix(rho)
    if r.shape != (2, 2):
        raise DimMismatch(f"qubit state expected, got shape {r.shape}")
    c = np.sqrt(1.0 - gamma)
    return np.array([[r[0, 0] + gamma * r[1, 1], c * r[0, 1]], [c * r[1, 0], (1.0 - gamma) * r[1, 1]]],
                    dtype=np.complex128)


def depolarizing(mu: float, nqubits: int = 1) -> KrausChannel:
    """``rho -> (1 - mu) rho + mu I/d`` on one or two qubits, as a Pauli mixture."""
    if not 0.0 <= mu <= 1.0:
        raise OutOfRange(f"mu={mu} outside [0, 1]")
    if nqubits not in (1, 2):
        raise OutOfRange("depolarizing is defined for 1 or 2 qubits")
    d = 2**nqubits
    ks = []
    for labels in itertools.product("IXYZ", repeat=nqubits):
        op = linalg.kron(*[_PAULIS[c] for c in labels])
        if all(c == "I" for c in labels):
            ks.append(np.sqrt(1.0 - mu + mu / d**2) * op)
        else:
            ks.append(np.sqrt(mu) / d * op)
    return KrausChannel(tuple(ks), label=f"dep{nqubits}({mu:g})")


def tensor_power(ch: KrausChannel, n: int) -> KrausChannel:
    """``ch`` applied independently to ``n`` subsystems.

    Kraus operators are ordered lexicographically in the factor indices, the
    first factor being the most significant subsystem.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    ks = tuple(linalg.kron(*combo) for combo in itertools.product(ch.kraus, repeat=n))
    return KrausChannel(ks, label=f"{ch.label}^{n}", trace_preserving=ch.trace_preserving)


def tensor(*chs: KrausChannel) -> KrausChannel:
    ks = tuple(linalg.kron(*combo) for combo in itertools.product(*[c.kraus for c in chs]))
    tp = all(c.trace_preserving for c in chs)
    return KrausChannel(ks, label="(x)".join(c.label for c in chs), trace_preserving=tp)


def compose(second: KrausChannel, first: KrausChannel, label: str | None = None) -> KrausChannel:
    """The channel ``second o first``."""
    if second.dim != first.dim:
        raise DimMismatch("cannot compose channels of different dimension")
    ks = tuple(b @ a for b in second.kraus for a in first.kraus)
    tp = second.trace_preserving and first.trace_preserving
    return KrausChannel(ks, label=label or f"{second.label}o{first.label}", trace_preserving=tp)


def apply(ch: KrausChannel, rho: npt.ArrayLike) -> CMatrix:
    """``sum_i K_i rho K_i^dagger``."""
    r = linalg.as_cmatrix(rho)
    if r.shape != (ch.dim, ch.dim):
        raise DimMismatch(f"state of shape {r.shape} for a dim-{ch.dim} channel")
    if abs(np.trace(r) - 1.0) > 1e-9 or linalg.operator_norm(r - linalg.dagger(r)) > 1e-9:
        warnings.warn("input is not a unit-trace Hermitian matrix", RuntimeWarning, stacklevel=2)
    return apply_unchecked(ch.kraus, r)


def apply_unchecked(kraus: Sequence[CMatrix], rho: CMatrix) -> CMatrix:
    """Linear action on any operator (no density-matrix checks)."""
    ks = np.asarray(kraus)
    return np.einsum("kab,bc,kdc->ad", ks, rho, np.conj(ks), optimize=True)


def adjoint(ch: KrausChannel) -> KrausChannel:
    """Kraus operators ``K_i^dagger``; unital iff ``ch`` is trace-preserving."""
    return KrausChannel(
        tuple(linalg.dagger(k) for k in ch.kraus), label=f"{ch.label}^dag", trace_preserving=False
    )


@dataclass(frozen=True)
class ChoiMatrix:
    matrix: CMatrix
    dim: int

    def is_psd(self, atol: float = 1e-9) -> bool:
        return bool(np.linalg.eigvalsh(0.5 * (self.matrix + linalg.dagger(self.matrix)))[0] >= -atol)


def choi(ch: KrausChannel) -> ChoiMatrix:
    """Unnormalised Choi matrix ``(ch (x) id)(|Omega><Omega|)``."""
    vecs = np.array([k.reshape(-1) for k in ch.kraus])
    return ChoiMatrix(vecs.T @ np.conj(vecs), ch.dim)


def choi_distance(ch1: KrausChannel, ch2: KrausChannel) -> float:
    if ch1.dim != ch2.dim:
        raise DimMismatch("channels act on different dimensions")
    return linalg.operator_norm(choi(ch1).matrix - choi(ch2).matrix)


def channels_equal(ch1: KrausChannel, ch2: KrausChannel, tol: float = 1e-10) -> bool:
    return choi_distance(ch1, ch2) <= tol


def env_qubits(num_kraus: int) -> int:
    """Environment qubits needed to hold ``num_kraus`` Kraus indices."""
    return int(np.ceil(np.log2(num_kraus))) if num_kraus > 1 else 0


def stacked_kraus(ch: KrausChannel) -> CMatrix:
    """Kraus operators stacked vertically, zero-padded to a power-of-two count."""
    pad = 2 ** env_qubits(ch.num_kraus) - ch.num_kraus
    blocks = list(ch.kraus) + [np.zeros((ch.dim, ch.dim), dtype=np.complex128)] * pad
    return np.vstack(blocks)


def isometric_extension(ch: KrausChannel) -> CMatrix:
    """Unitary on ``env (x) system`` whose first ``dim`` columns stack the Kraus operators."""
    if not ch.trace_preserving:
        raise Unsupported("isometric extension needs a trace-preserving channel")
    return linalg.complete_to_unitary(stacked_kraus(ch))


def channel_from_isometry(v: npt.ArrayLike, dim: int, label: str = "") -> KrausChannel:
    """Read the Kraus operators off the ``env = 0`` input block of an isometric extension."""
    m = linalg.as_cmatrix(v)
    if m.shape[0] % dim:
        raise DimMismatch("isometry size is not a multiple of the system dimension")
    n_env = m.shape[0] // dim
    cols = m[:, :dim]
    return KrausChannel(tuple(cols[e * dim : (e + 1) * dim] for e in range(n_env)), label=label)


def ry(theta: float) -> CMatrix:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


def amplitude_damping_circuit(gamma: float) -> CMatrix:
    """Two-qubit dilation of AD on ``env (x) system``.

    A rotation ``R_y(theta)`` on the environment controlled by the system,
    with ``sin(theta/2) = sqrt(gamma)``, followed by a CNOT from the
    environment onto the system.
    """
    if not 0.0 <= gamma <= 1.0:
        raise OutOfRange(f"gamma={gamma} outside [0, 1]")
    theta = 2.0 * np.arcsin(np.sqrt(gamma))
    p0 = np.diag([1.0, 0.0]).astype(np.complex128)
    p1 = np.diag([0.0, 1.0]).astype(np.complex128)
    x = _PAULIS["X"]
    eye = np.eye(2, dtype=np.complex128)
    c_ry = linalg.kron(eye, p0) + linalg.kron(ry(theta), p1)
    cnot = linalg.kron(p0, eye) + linalg.kron(p1, x)
    return cnot @ c_ry
