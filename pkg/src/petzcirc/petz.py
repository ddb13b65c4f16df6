"""
Petz recovery maps and fidelity measures.

The code-specific Petz map of a code with projector ``P`` under a channel
``E = {E_i}`` has Kraus operators::

    R_i = P E_i^dagger E(P)^{-1/2}

No completion is added: ``sum_i R_i^dagger R_i`` equals the projector onto
the support of ``E(P)``, so the map is trace preserving on every state the
noise can produce from the codespace.

Worst-case fidelities of single-qubit codes are found by writing
``F^2(theta, phi)`` as a quartic form in the logical amplitudes. The
``2 x 2 x 2 x 2`` response tensor

    T[a, b, c, d] = <a_L| C(|c_L><d_L|) |b_L>

is computed once, after which any grid of logical states costs a handful of
vectorised multiplications.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, NamedTuple, Union

import numpy as np
import numpy.typing as npt
from scipy import optimize

from . import linalg
from .channels import KrausChannel, apply_unchecked
from .codes import QuantumCode
from .errors import DimMismatch, NotDensity, NumericalFailure, Unsupported
from .linalg import CMatrix

LinearMap = Union[KrausChannel, Callable[[CMatrix], CMatrix]]

GRID = 64
REFINE_TOL = 1e-8


@dataclass(frozen=True)
class PetzMap:
    noise: KrausChannel
    sigma_or_P: CMatrix
    EP: CMatrix
    EP_inv_sqrt: CMatrix
    kraus: tuple[CMatrix, ...]
    scale: float
    support_projector: CMatrix

    @property
    def num_kraus(self) -> int:
        return len(self.kraus)

    @property
    def channel(self) -> KrausChannel:
        """The recovery as a (trace non-increasing) :class:`KrausChannel`."""
        return KrausChannel(self.kraus, label="petz", trace_preserving=False)

    def __call__(self, rho: npt.ArrayLike) -> CMatrix:
        return apply_unchecked(self.kraus, linalg.as_cmatrix(rho))

    def composite(self) -> KrausChannel:
        """``R o E`` with Kraus operators ``R_i E_j`` (``i`` major)."""
        ks = tuple(r @ e for r in self.kraus for e in self.noise.kraus)
        return KrausChannel(ks, label=f"petz o {self.noise.label}", trace_preserving=False)

    def tp_defect(self) -> float:
        s = sum(linalg.dagger(r) @ r for r in self.kraus)
        return linalg.operator_norm(s - self.support_projector)

    def to_json(self) -> str:
        return json.dumps(
            {
                "dim": int(self.EP.shape[0]),
                "scale": self.scale,
                "noise": self.noise.label,
                "kraus": [linalg.matrix_to_pairs(k) for k in self.kraus],
            }
        )


def _petz(noise: KrausChannel, left: CMatrix, ref: CMatrix, tol: float | None) -> PetzMap:
    ep = apply_unchecked(noise.kraus, ref)
    ep = 0.5 * (ep + linalg.dagger(ep))
    b = linalg.pinv_sqrt(ep, tol)
    kraus = tuple(left @ linalg.dagger(e) @ b for e in noise.kraus)
    return PetzMap(
        noise=noise,
        sigma_or_P=ref,
        EP=ep,
        EP_inv_sqrt=b,
        kraus=kraus,
        scale=linalg.operator_norm(b),
        support_projector=linalg.support_projector(ep, tol),
    )


def construct_code_petz(code: QuantumCode, noise: KrausChannel, tol: float | None = None) -> PetzMap:
    """Code-specific Petz map ``R_i = P E_i^dagger E(P)^{-1/2}``.

    Parameters
    ----------
    code : QuantumCode
    noise : KrausChannel
        Channel on the full ``2^n``-dimensional register (build it with
        :func:`~petzcirc.channels.tensor_power` for i.i.d. noise).
    tol : float, optional
        Eigenvalue cutoff for ``E(P)^{-1/2}``; defaults to ``1e-10 ||E(P)||``.
    """
    if noise.dim != code.dim:
        raise DimMismatch(f"noise acts on dim {noise.dim}, code on dim {code.dim}")
    return _petz(noise, code.projector, code.projector, tol)


def construct_state_petz(sigma: npt.ArrayLike, noise: KrausChannel, tol: float | None = None) -> PetzMap:
    """State-specific Petz map ``R_i = sqrt(sigma) E_i^dagger E(sigma)^{-1/2}``."""
    s = linalg.as_cmatrix(sigma)
    if s.shape != (noise.dim, noise.dim):
        raise DimMismatch(f"sigma has shape {s.shape}, noise acts on dim {noise.dim}")
    if linalg.operator_norm(s - linalg.dagger(s)) > 1e-9 or abs(np.trace(s) - 1.0) > 1e-9:
        raise NotDensity("sigma must be Hermitian with unit trace")
    if np.linalg.eigvalsh(0.5 * (s + linalg.dagger(s)))[0] < -1e-9:
        raise NotDensity("sigma has a negative eigenvalue")
    return _petz(noise, linalg.psd_sqrt(s), s, tol)


def fidelity(psi: npt.ArrayLike, rho: npt.ArrayLike) -> float:
    """``F^2 = <psi|rho|psi>``."""
    v = np.asarray(psi, dtype=np.complex128).reshape(-1)
    r = linalg.as_cmatrix(rho)
    if r.shape != (v.size, v.size):
        raise DimMismatch(f"state of length {v.size} against a {r.shape} operator")
    val = np.vdot(v, r @ v)
    if abs(val.imag) > 1e-12:
        raise NumericalFailure(f"fidelity has imaginary part {val.imag:.2e}; rho is not Hermitian")
    return float(val.real)


def _apply_map(ch: LinearMap, op: CMatrix) -> CMatrix:
    if isinstance(ch, KrausChannel):
        return apply_unchecked(ch.kraus, op)
    return np.asarray(ch(op), dtype=np.complex128)


def logical_response(code: QuantumCode, ch: LinearMap) -> npt.NDArray[np.complex128]:
    """``T[a, b, c, d] = <a_L| ch(|c_L><d_L|) |b_L>`` for a ``k = 1`` code."""
    if code.k != 1:
        raise Unsupported("logical response tensors are only defined for single-qubit codes")
    cw = code.codewords
    t = np.zeros((2, 2, 2, 2), dtype=np.complex128)
    for c in range(2):
        for d in range(2):
            out = _apply_map(ch, np.outer(cw[c], np.conj(cw[d])))
            t[:, :, c, d] = np.conj(cw) @ out @ cw.T
    return t


def response_from_outputs(
    outputs: npt.ArrayLike, targets: npt.ArrayLike
) -> npt.NDArray[np.complex128]:
    """Build ``T`` from ``outputs[c][d] = ch(|c><d|)`` and two target vectors.

    Useful when ``ch`` is simulated and the reference encoded states are not
    the codewords of a :class:`QuantumCode` (e.g. an unencoded qubit).
    """
    out = np.asarray(outputs, dtype=np.complex128)
    tg = np.asarray(targets, dtype=np.complex128)
    return np.einsum("ai,cdij,bj->abcd", np.conj(tg), out, tg)


def fidelity_form(
    t: npt.ArrayLike, theta: npt.ArrayLike, phi: npt.ArrayLike = 0.0
) -> npt.NDArray[np.float64]:
    """Evaluate ``F^2(theta, phi)`` from a response tensor (broadcasts)."""
    t = np.asarray(t)
    th, ph = np.broadcast_arrays(np.asarray(theta, dtype=float), np.asarray(phi, dtype=float))
    c = np.stack([np.cos(th / 2) + 0j, np.exp(1j * ph) * np.sin(th / 2)])
    val = np.einsum("a...,b...,c...,d...,abcd->...", np.conj(c), c, c, np.conj(c), t)
    return np.real(val)


class WorstCase(NamedTuple):
    f2_min: float
    state: npt.NDArray[np.complex128]
    theta: float
    phi: float


def minimize_form(t: npt.ArrayLike, grid: int = GRID, refine: bool = True) -> WorstCase:
    """Minimise ``F^2`` over the Bloch sphere: dense grid, then L-BFGS-B polish."""
    th = np.linspace(0.0, np.pi, grid)
    ph = np.linspace(0.0, 2 * np.pi, grid, endpoint=False)
    tt, pp = np.meshgrid(th, ph, indexing="ij")
    vals = fidelity_form(t, tt, pp)
    flat = np.argsort(vals, axis=None)
    best_val = float(vals.flat[flat[0]])
    best = (float(tt.flat[flat[0]]), float(pp.flat[flat[0]]))
    if refine:
        def obj(x: npt.NDArray[np.float64]) -> float:
            return float(fidelity_form(t, x[0], x[1]))

        for idx in flat[: min(4, flat.size)]:
            x0 = np.array([tt.flat[idx], pp.flat[idx]])
            res = optimize.minimize(
                obj,
                x0,
                method="L-BFGS-B",
                bounds=[(0.0, np.pi), (x0[1] - np.pi, x0[1] + np.pi)],
                options={"ftol": REFINE_TOL * 1e-3, "gtol": 1e-10},
            )
            if res.fun < best_val:
                best_val, best = float(res.fun), (float(res.x[0]), float(res.x[1] % (2 * np.pi)))
    theta, phi = best
    state = np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)], dtype=np.complex128)
    return WorstCase(best_val, state, theta, phi)


def worst_case_fidelity(
    code: QuantumCode, composite: LinearMap, grid: int = GRID, refine: bool = True
) -> WorstCase:
    """Minimum of ``F^2(psi_en, composite(psi_en))`` over pure codespace states.

    The returned ``state`` is the logical 2-vector of the minimiser.

    Raises
    ------
    Unsupported
        If ``code.k > 1``.
    """
    if code.k != 1:
        raise Unsupported("worst-case fidelity is only implemented for k = 1")
    return minimize_form(logical_response(code, composite), grid=grid, refine=refine)
