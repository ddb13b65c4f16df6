"""Elementary gate matrices and helpers to embed them in an n-qubit register.

Qubit 0 is the most significant bit of a basis-state label.
"""

from __future__ import annotations

import numpy as np

from .linalg import CMatrix

H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)
X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
Z = np.diag([1, -1]).astype(np.complex128)
I2 = np.eye(2, dtype=np.complex128)
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128
)
SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=np.complex128
)


def embed(u: CMatrix, qubits: tuple[int, ...] | list[int], n: int) -> CMatrix:
    """Dense ``2^n x 2^n`` matrix of ``u`` acting on ``qubits`` (in the given order)."""
    qubits = list(qubits)
    k = len(qubits)
    if u.shape != (2**k, 2**k):
        raise ValueError("gate size does not match the qubit list")
    rest = [q for q in range(n) if q not in qubits]
    order = qubits + rest
    full = np.kron(u, np.eye(2 ** len(rest), dtype=np.complex128))
    # full acts on the register ordered as `order`; permute back to 0..n-1
    t = full.reshape([2] * (2 * n))
    inv = np.argsort(order)
    t = t.transpose(list(inv) + [n + i for i in inv])
    return t.reshape(2**n, 2**n)
