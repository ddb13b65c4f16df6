"""
Dense complex linear algebra.

Every operator, state and unitary in the package is a plain ``numpy``
complex128 array. This module holds the decompositions and matrix functions
the rest of the package builds on: Hermitian eigendecomposition, SVD, the
pseudo-inverse square root, polar decomposition and unitary completion, plus
tensor-product plumbing (kron, partial trace, register permutations).
"""

from __future__ import annotations

from functools import reduce
from typing import NamedTuple, Sequence

import numpy as np
import numpy.typing as npt

from .errors import DimMismatch, NotHermitian, NotIsometry, NotPSD

CMatrix = npt.NDArray[np.complex128]

HERMITIAN_ATOL = 1e-9


class HermEigResult(NamedTuple):
    eigenvalues: npt.NDArray[np.float64]
    eigenvectors: CMatrix


class SvdResult(NamedTuple):
    U: CMatrix
    singular_values: npt.NDArray[np.float64]
    V: CMatrix


def as_cmatrix(a: npt.ArrayLike) -> CMatrix:
    """Coerce ``a`` to a 2-D complex128 array with finite entries."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2 or m.size == 0:
        raise ValueError(f"expected a non-empty matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def dagger(a: CMatrix) -> CMatrix:
    return np.conj(a).T


def kron(*ops: npt.ArrayLike) -> CMatrix:
    """Kronecker product of any number of operators (left factor most significant)."""
    if not ops:
        return np.ones((1, 1), dtype=np.complex128)
    return reduce(np.kron, [np.asarray(o, dtype=np.complex128) for o in ops])


def operator_norm(a: npt.ArrayLike) -> float:
    """Largest singular value."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim == 1:
        return float(np.linalg.norm(m))
    return float(np.linalg.norm(m, 2))


def _hermitian_defect(a: CMatrix) -> float:
    return operator_norm(a - dagger(a))


def is_unitary(u: npt.ArrayLike, atol: float = 1e-10) -> bool:
    m = np.asarray(u, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return operator_norm(dagger(m) @ m - np.eye(m.shape[0])) <= atol


def herm_eig(a: npt.ArrayLike, atol: float = HERMITIAN_ATOL) -> HermEigResult:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    Raises
    ------
    NotHermitian
        If ``||A - A^dagger|| > atol``.
    """
    m = as_cmatrix(a)
    if m.shape[0] != m.shape[1] or _hermitian_defect(m) > atol:
        raise NotHermitian("matrix is not Hermitian within tolerance")
    h = 0.5 * (m + dagger(m))
    w, v = np.linalg.eigh(h)
    return HermEigResult(w, v)


def svd(a: npt.ArrayLike) -> SvdResult:
    """Full SVD ``A = U diag(s) V^dagger`` with ``s`` descending."""
    m = as_cmatrix(a)
    u, s, vh = np.linalg.svd(m, full_matrices=True)
    return SvdResult(u, s, dagger(vh))


def default_cutoff(a: CMatrix) -> float:
    return 1e-10 * max(operator_norm(a), np.finfo(float).tiny)


def pinv_sqrt(a: npt.ArrayLike, tol: float | None = None) -> CMatrix:
    """Pseudo-inverse square root of a PSD matrix.

    Eigenvalues at or below ``tol`` (default ``1e-10 * ||A||``) are treated as
    the kernel and mapped to zero.

    Raises
    ------
    NotPSD
        If ``A`` has an eigenvalue below ``-tol``.
    """
    m = as_cmatrix(a)
    cut = default_cutoff(m) if tol is None else tol
    w, v = herm_eig(m)
    if w[0] < -max(cut, HERMITIAN_ATOL):
        raise NotPSD(f"smallest eigenvalue {w[0]:.3e} is negative")
    keep = w > cut
    f = np.zeros_like(w)
    f[keep] = 1.0 / np.sqrt(w[keep])
    return (v * f) @ dagger(v)


def support_projector(a: npt.ArrayLike, tol: float | None = None) -> CMatrix:
    """Projector onto the eigenspace of ``A`` with eigenvalues above the cutoff."""
    m = as_cmatrix(a)
    cut = default_cutoff(m) if tol is None else tol
    w, v = herm_eig(m)
    vs = v[:, w > cut]
    return vs @ dagger(vs)


def psd_sqrt(a: npt.ArrayLike) -> CMatrix:
    """Principal square root of a PSD matrix; tiny negative eigenvalues are clipped."""
    w, v = herm_eig(a)
    if w[0] < -HERMITIAN_ATOL:
        raise NotPSD(f"smallest eigenvalue {w[0]:.3e} is negative")
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ dagger(v)


def polar(k: npt.ArrayLike) -> tuple[CMatrix, CMatrix]:
    """Polar decomposition ``K = U P`` with ``P = sqrt(K^dagger K)``.

    ``U = W V^dagger`` from the SVD ``K = W S V^dagger`` (descending singular
    values), which also fixes the null-space completion deterministically.
    ``K = 0`` returns ``U = I``.
    """
    m = as_cmatrix(k)
    if m.shape[0] != m.shape[1]:
        raise DimMismatch("polar decomposition needs a square matrix")
    u, s, v = svd(m)
    if not np.any(s > 0):
        d = m.shape[0]
        return np.eye(d, dtype=np.complex128), np.zeros((d, d), dtype=np.complex128)
    p = (v * s) @ dagger(v)
    return u @ dagger(v), 0.5 * (p + dagger(p))


def complete_to_unitary(cols: npt.ArrayLike, atol: float = 1e-9) -> CMatrix:
    """Extend orthonormal columns to a square unitary.

    The given columns are kept verbatim as the leading columns; the rest come
    from Gram-Schmidt over the canonical basis vectors ``e_0, e_1, ...`` in
    index order, skipping those already (numerically) in the span.

    Raises
    ------
    NotIsometry
        If ``cols^dagger cols`` differs from the identity by more than ``atol``.
    """
    c = as_cmatrix(cols)
    dim, ncols = c.shape
    if ncols > dim:
        raise NotIsometry(f"{ncols} columns cannot be orthonormal in dimension {dim}")
    if operator_norm(dagger(c) @ c - np.eye(ncols)) > atol:
        raise NotIsometry("input columns are not orthonormal")
    out = np.zeros((dim, dim), dtype=np.complex128)
    out[:, :ncols] = c
    filled = ncols
    for idx in range(dim):
        if filled == dim:
            break
        vec = np.zeros(dim, dtype=np.complex128)
        vec[idx] = 1.0
        basis = out[:, :filled]
        # two passes of classical Gram-Schmidt keep the result orthogonal to ~eps
        for _ in range(2):
            vec = vec - basis @ (dagger(basis) @ vec)
        nrm = np.linalg.norm(vec)
        if nrm < 1e-6:
            continue
        out[:, filled] = vec / nrm
        filled += 1
    return out


def partial_trace(rho: npt.ArrayLike, dims: Sequence[int], trace_out: Sequence[int]) -> CMatrix:
    """Trace out the subsystems with indices ``trace_out`` (subsystem 0 most significant)."""
    m = as_cmatrix(rho)
    dims = list(dims)
    n = len(dims)
    out = sorted(set(trace_out))
    keep = [i for i in range(n) if i not in out]
    t = m.reshape(dims + dims)
    perm = keep + out + [n + i for i in keep] + [n + i for i in out]
    dk = int(np.prod([dims[i] for i in keep])) if keep else 1
    do = int(np.prod([dims[i] for i in out])) if out else 1
    t = t.transpose(perm).reshape(dk, do, dk, do)
    return np.einsum("ajbj->ab", t)


def permute_subsystems(op: npt.ArrayLike, dims: Sequence[int], perm: Sequence[int]) -> CMatrix:
    """Reorder the tensor factors of a square operator.

    Output factor ``k`` is input factor ``perm[k]``.
    """
    m = as_cmatrix(op)
    n = len(dims)
    t = m.reshape(list(dims) + list(dims))
    t = t.transpose(list(perm) + [n + p for p in perm])
    d = m.shape[0]
    return t.reshape(d, d)


def swap_registers(d_a: int, d_b: int) -> CMatrix:
    """Permutation matrix mapping ``|a>|b>`` to ``|b>|a>``."""
    d = d_a * d_b
    s = np.zeros((d, d), dtype=np.complex128)
    for a in range(d_a):
        for b in range(d_b):
            s[b * d_a + a, a * d_b + b] = 1.0
    return s


def basis_vector(index: int, dim: int) -> npt.NDArray[np.complex128]:
    v = np.zeros(dim, dtype=np.complex128)
    v[index] = 1.0
    return v


def projector(vec: npt.ArrayLike) -> CMatrix:
    v = np.asarray(vec, dtype=np.complex128).reshape(-1)
    return np.outer(v, np.conj(v))


def matrix_to_pairs(m: npt.ArrayLike) -> list:
    """Row-major ``[[ [re, im], ... ], ...]`` form used by the JSON formats."""
    a = np.asarray(m, dtype=np.complex128)
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.atleast_2d(a)]


def matrix_from_pairs(data: list) -> CMatrix:
    a = np.asarray(data, dtype=np.float64)
    if a.ndim != 3 or a.shape[-1] != 2:
        raise ValueError("expected nested [[ [re, im], ... ]] data")
    return (a[..., 0] + 1j * a[..., 1]).astype(np.complex128)


def vector_to_pairs(v: npt.ArrayLike) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=np.complex128).reshape(-1)]


def vector_from_pairs(data: list) -> npt.NDArray[np.complex128]:
    a = np.asarray(data, dtype=np.float64)
    return (a[:, 0] + 1j * a[:, 1]).astype(np.complex128)
