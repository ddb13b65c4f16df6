"""
Statevector / density-matrix simulator for synthesized circuits.

A :class:`SynthesizedCircuit` is an ordered list of operations on a qubit
register (qubit 0 is the most significant bit). Pure states stay pure until
a non-unitary operation (a channel, reset or gate noise) forces the switch
to a density matrix.

Gate noise
----------
With a :class:`NoiseModel` attached, every non-``noiseless`` unitary is
followed by depolarizing noise on its support ``S`` (targets and controls):

* ``|S| = 1``: single-qubit depolarizing with ``mu_1q``;
* ``|S| = 2`` (and no explicit cost): two-qubit depolarizing with ``mu_2q``;
* otherwise the gate is treated as a compiled block of ``n1q`` single-qubit
  and ``n2q`` CNOT gates (``op.cost``, or :func:`generic_cost` by default)
  and each qubit of ``S`` receives single-qubit depolarizing with
  ``p = 1 - (1 - mu_1q)^(n1q/|S|) (1 - mu_2q)^(2 n2q/|S|)``, i.e. its share
  of the elementary gates' noise.

Idle noise
----------
:class:`Idle` applies amplitude damping with ``gamma = 1 - exp(-N t / T1)``
for ``N`` identity gates of duration ``t`` (``NoiseModel.gate_time_id``).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence, Union

import numpy as np
import numpy.typing as npt

from . import linalg
from .channels import amplitude_damping
from .errors import ConfigError, DimMismatch, NotNormalized, NotUnitary, OutOfRange, Unsupported, ZeroProbability
from .linalg import CMatrix

MAX_MIXED_QUBITS = 12
GATE_TIME_ID = 35e-9
ZERO_PROB = 1e-14


# --------------------------------------------------------------------------- state


@dataclass
class SimState:
    """``kind`` is ``"pure"`` (amplitude vector) or ``"mixed"`` (density matrix)."""

    kind: str
    qubits: int
    data: npt.NDArray[np.complex128]

    def __post_init__(self) -> None:
        if self.kind not in ("pure", "mixed"):
            raise ValueError(f"unknown state kind {self.kind!r}")
        d = 2**self.qubits
        shape = (d,) if self.kind == "pure" else (d, d)
        self.data = np.asarray(self.data, dtype=np.complex128).reshape(shape)

    @classmethod
    def zero(cls, n: int) -> "SimState":
        v = np.zeros(2**n, dtype=np.complex128)
        v[0] = 1.0
        return cls("pure", n, v)

    @classmethod
    def from_vector(cls, v: npt.ArrayLike) -> "SimState":
        a = np.asarray(v, dtype=np.complex128).reshape(-1)
        n = _qubits_for(a.size)
        if abs(np.linalg.norm(a) - 1.0) > 1e-10:
            raise NotNormalized(f"state vector has norm {np.linalg.norm(a):.12g}")
        return cls("pure", n, a)

    @classmethod
    def from_density(cls, rho: npt.ArrayLike) -> "SimState":
        r = linalg.as_cmatrix(rho)
        n = _qubits_for(r.shape[0])
        if abs(np.trace(r) - 1.0) > 1e-10:
            raise NotNormalized(f"density matrix has trace {np.trace(r).real:.12g}")
        return cls("mixed", n, r)

    def density(self) -> CMatrix:
        if self.kind == "pure":
            return np.outer(self.data, np.conj(self.data))
        return self.data

    def to_mixed(self) -> "SimState":
        return SimState("mixed", self.qubits, self.density())

    def reduced(self, keep: Sequence[int]) -> CMatrix:
        """Reduced density matrix of the qubits ``keep`` (in ascending order)."""
        out = [q for q in range(self.qubits) if q not in keep]
        return linalg.partial_trace(self.density(), [2] * self.qubits, out)

    def trace(self) -> float:
        if self.kind == "pure":
            return float(np.vdot(self.data, self.data).real)
        return float(np.trace(self.data).real)


def _qubits_for(dim: int) -> int:
    n = int(round(math.log2(dim))) if dim > 0 else -1
    if n < 0 or 2**n != dim:
        raise DimMismatch(f"dimension {dim} is not a power of two")
    return n


# --------------------------------------------------------------------------- ops


@dataclass(frozen=True)
class Unitary:
    """``matrix`` on ``qubits`` (first listed = most significant), optionally controlled."""

    qubits: tuple[int, ...]
    matrix: CMatrix
    controls: tuple[int, ...] = ()
    control_values: tuple[int, ...] = ()
    label: str = ""
    cost: tuple[int, int] | None = None
    noiseless: bool = False

    def __post_init__(self) -> None:
        m = linalg.as_cmatrix(self.matrix)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        object.__setattr__(self, "controls", tuple(int(q) for q in self.controls))
        cv = tuple(self.control_values) or (1,) * len(self.controls)
        object.__setattr__(self, "control_values", tuple(int(v) for v in cv))
        if m.shape != (2 ** len(self.qubits),) * 2:
            raise DimMismatch(f"{m.shape} matrix on {len(self.qubits)} qubits")
        if len(self.control_values) != len(self.controls):
            raise DimMismatch("one control value per control qubit")
        if not linalg.is_unitary(m, 1e-10):
            raise NotUnitary(f"gate {self.label!r} is not unitary")

    @property
    def support(self) -> tuple[int, ...]:
        return self.qubits + self.controls


@dataclass(frozen=True)
class TwoLevel:
    """Two-level unitary acting on basis states ``i < j`` of the register ``qubits``."""

    qubits: tuple[int, ...]
    i: int
    j: int
    block: CMatrix
    label: str = ""
    cost: tuple[int, int] | None = None
    noiseless: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "block", linalg.as_cmatrix(self.block))
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))

    @property
    def support(self) -> tuple[int, ...]:
        return self.qubits

    @property
    def controls(self) -> tuple[int, ...]:
        return ()


@dataclass(frozen=True)
class Channel:
    qubits: tuple[int, ...]
    kraus: tuple[CMatrix, ...]
    label: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "kraus", tuple(linalg.as_cmatrix(k) for k in self.kraus))
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))


@dataclass(frozen=True)
class Reset:
    qubit: int


@dataclass(frozen=True)
class PostSelect:
    qubits: tuple[int, ...]
    outcome: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        oc = tuple(self.outcome) or (0,) * len(self.qubits)
        if len(oc) != len(self.qubits):
            raise DimMismatch("one outcome bit per post-selected qubit")
        object.__setattr__(self, "outcome", tuple(int(b) for b in oc))


@dataclass(frozen=True)
class Idle:
    """``n_gates`` identity gates on each of ``qubits``."""

    qubits: tuple[int, ...]
    n_gates: int


Op = Union[Unitary, TwoLevel, Channel, Reset, PostSelect, Idle]


@dataclass
class SynthesizedCircuit:
    qubits: int
    ops: list[Op] = field(default_factory=list)
    name: str = ""
    metadata: dict = field(default_factory=dict)

    def append(self, op: Op) -> "SynthesizedCircuit":
        for q in _op_qubits(op):
            if not 0 <= q < self.qubits:
                raise DimMismatch(f"qubit {q} outside a {self.qubits}-qubit register")
        if len(set(_op_qubits(op))) != len(_op_qubits(op)):
            raise DimMismatch("an operation lists the same qubit twice")
        self.ops.append(op)
        return self

    def extend(self, ops: Iterable[Op]) -> "SynthesizedCircuit":
        for op in ops:
            self.append(op)
        return self

    def gate_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for op in self.ops:
            key = type(op).__name__
            counts[key] = counts.get(key, 0) + 1
        return counts

    def to_json(self) -> str:
        return json.dumps(
            {"qubits": self.qubits, "name": self.name, "metadata": self.metadata,
             "ops": [_op_to_dict(op) for op in self.ops]}
        )

    @classmethod
    def from_json(cls, text: str) -> "SynthesizedCircuit":
        d = json.loads(text)
        circ = cls(d["qubits"], name=d.get("name", ""), metadata=d.get("metadata", {}))
        circ.extend(_op_from_dict(o) for o in d["ops"])
        return circ


def _op_qubits(op: Op) -> tuple[int, ...]:
    if isinstance(op, Unitary):
        return op.qubits + op.controls
    if isinstance(op, Reset):
        return (op.qubit,)
    return tuple(op.qubits)


def _op_to_dict(op: Op) -> dict:
    if isinstance(op, Unitary):
        return {"type": "unitary", "qubits": list(op.qubits), "matrix": linalg.matrix_to_pairs(op.matrix),
                "controls": list(op.controls), "control_values": list(op.control_values),
                "label": op.label, "cost": list(op.cost) if op.cost else None, "noiseless": op.noiseless}
    if isinstance(op, TwoLevel):
        return {"type": "two_level", "qubits": list(op.qubits), "i": op.i, "j": op.j,
                "block": linalg.matrix_to_pairs(op.block), "label": op.label,
                "cost": list(op.cost) if op.cost else None, "noiseless": op.noiseless}
    if isinstance(op, Channel):
        return {"type": "channel", "qubits": list(op.qubits), "label": op.label,
                "kraus": [linalg.matrix_to_pairs(k) for k in op.kraus]}
    if isinstance(op, Reset):
        return {"type": "reset", "qubit": op.qubit}
    if isinstance(op, PostSelect):
        return {"type": "postselect", "qubits": list(op.qubits), "outcome": list(op.outcome)}
    if isinstance(op, Idle):
        return {"type": "idle", "qubits": list(op.qubits), "n_gates": op.n_gates}
    raise TypeError(f"unknown op {op!r}")


def _op_from_dict(d: dict) -> Op:
    kind = d["type"]
    cost = tuple(d["cost"]) if d.get("cost") else None
    if kind == "unitary":
        return Unitary(tuple(d["qubits"]), linalg.matrix_from_pairs(d["matrix"]), tuple(d["controls"]),
                       tuple(d["control_values"]), d.get("label", ""), cost, d.get("noiseless", False))
    if kind == "two_level":
        return TwoLevel(tuple(d["qubits"]), d["i"], d["j"], linalg.matrix_from_pairs(d["block"]),
                        d.get("label", ""), cost, d.get("noiseless", False))
    if kind == "channel":
        return Channel(tuple(d["qubits"]), tuple(linalg.matrix_from_pairs(k) for k in d["kraus"]), d.get("label", ""))
    if kind == "reset":
        return Reset(d["qubit"])
    if kind == "postselect":
        return PostSelect(tuple(d["qubits"]), tuple(d["outcome"]))
    if kind == "idle":
        return Idle(tuple(d["qubits"]), d["n_gates"])
    raise ValueError(f"unknown op type {kind!r}")


# --------------------------------------------------------------------------- noise


@dataclass(frozen=True)
class NoiseModel:
    T1: float = math.inf
    T2: float | None = None
    gate_time_id: float = GATE_TIME_ID
    mu_1q: float = 0.0
    mu_2q: float = 0.0

    def __post_init__(self) -> None:
        t2 = 2 * self.T1 if self.T2 is None else self.T2
        object.__setattr__(self, "T2", t2)
        if math.isfinite(self.T1) and abs(t2 - 2 * self.T1) > 1e-12 * max(1.0, self.T1):
            raise ConfigError("only T2 = 2 T1 (pure amplitude damping) is supported")
        if math.isinf(self.T1) and not math.isinf(t2):
            raise ConfigError("only T2 = 2 T1 (pure amplitude damping) is supported")
        for name in ("T1", "gate_time_id", "mu_1q", "mu_2q"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")
        if self.mu_1q > 1 or self.mu_2q > 1:
            raise ConfigError("depolarizing strengths must lie in [0, 1]")

    @property
    def has_gate_noise(self) -> bool:
        return self.mu_1q > 0 or self.mu_2q > 0


def idle_gamma(n_gates: float, t: float = GATE_TIME_ID, T1: float = math.inf) -> float:
    """``gamma = 1 - exp(-N t / T1)`` for ``N`` identity gates of duration ``t``."""
    if n_gates < 0 or t < 0 or T1 < 0:
        raise OutOfRange("idle parameters must be non-negative")
    if T1 == 0:
        return 1.0 if n_gates * t > 0 else 0.0
    return float(-math.expm1(-n_gates * t / T1))


def idle_gates_for_gamma(gamma: float, t: float = GATE_TIME_ID, T1: float = 100e-6) -> float:
    """Inverse of :func:`idle_gamma` in ``N`` (not rounded)."""
    if not 0 <= gamma < 1:
        raise OutOfRange("gamma must lie in [0, 1)")
    return float(-T1 * math.log1p(-gamma) / t)


def generic_cost(q: int) -> tuple[int, int]:
    """``(n1q, n2q)`` for a generic ``q``-qubit unitary.

    The CNOT count is the quantum Shannon decomposition figure
    ``ceil(23/48 4^q - 3/2 2^q + 4/3)`` for ``q >= 3`` (3 for ``q = 2``); the
    single-qubit count is taken as one layer per CNOT plus one per qubit.
    """
    if q <= 0:
        return (0, 0)
    if q == 1:
        return (1, 0)
    cx = 3 if q == 2 else math.ceil(23 / 48 * 4**q - 1.5 * 2**q + 4 / 3 - 1e-9)
    return (cx + q, cx)


def two_level_cost(q: int) -> tuple[int, int]:
    """``(n1q, n2q)`` for a two-level unitary on ``q`` qubits.

    The Gray-code construction needs ``O(q^2)`` single-qubit and CNOT gates;
    the count is taken as ``q^2`` of each.
    """
    if q <= 0:
        return (0, 0)
    if q == 1:
        return (1, 0)
    return (q * q, q * q)


def lumped_rate(n1q: int, n2q: int, mu_1q: float, mu_2q: float, width: int) -> float:
    """Per-qubit depolarizing strength for a compiled block (see module docstring)."""
    keep = (1 - mu_1q) ** (n1q / width) * (1 - mu_2q) ** (2 * n2q / width)
    return float(1 - keep)


# --------------------------------------------------------------------------- kernels


def _apply_left(t: np.ndarray, u: CMatrix, axes: Sequence[int], ctrl_axes: Sequence[int] = (),
                ctrl_vals: Sequence[int] = ()) -> np.ndarray:
    """Left-multiply ``u`` onto tensor axes ``axes``; rows with the controls unset are untouched."""
    if ctrl_axes:
        idx = [slice(None)] * t.ndim
        for a, v in zip(ctrl_axes, ctrl_vals):
            idx[a] = v
        sub = t[tuple(idx)]
        shifted = [a - sum(c < a for c in ctrl_axes) for a in axes]
        t[tuple(idx)] = _apply_left(sub, u, shifted)
        return t
    k = len(axes)
    ut = u.reshape([2] * (2 * k))
    out = np.tensordot(ut, t, axes=(list(range(k, 2 * k)), list(axes)))
    return np.moveaxis(out, list(range(k)), list(axes))


def _apply_two_level_rows(t: np.ndarray, axes: Sequence[int], i: int, j: int, block: CMatrix) -> np.ndarray:
    k = len(axes)
    v = np.moveaxis(t, list(axes), list(range(k)))
    shape = v.shape
    m = v.reshape(2**k, -1)
    rows = block @ m[[i, j]]
    m[i], m[j] = rows[0], rows[1]
    out = m.reshape(shape)
    return np.moveaxis(out, list(range(k)), list(axes))


def _depolarize(t: np.ndarray, n: int, qubits: Sequence[int], p: float) -> None:
    """In-place ``rho -> (1-p) rho + p Tr_S(rho) (x) I/2^|S|`` on a density tensor."""
    if p <= 0:
        return
    k = len(qubits)
    v = np.moveaxis(t, list(qubits) + [n + q for q in qubits], list(range(2 * k)))
    d = 2**k
    labels = [np.unravel_index(i, (2,) * k) for i in range(d)]
    avg = sum(v[tuple(r) + tuple(r)] for r in labels) / d
    v *= 1 - p
    for r in labels:
        v[tuple(r) + tuple(r)] += p * avg


def _depolarize_each(t: np.ndarray, n: int, qubits: Sequence[int], p: float) -> None:
    for q in qubits:
        _depolarize(t, n, (q,), p)


class RunResult(NamedTuple):
    state: SimState
    postselect_probs: list[float]

    @property
    def success_prob(self) -> float:
        return float(np.prod(self.postselect_probs)) if self.postselect_probs else 1.0


class _Engine:
    def __init__(self, state: SimState, max_mixed: int, normalize: bool):
        self.n = state.qubits
        self.kind = state.kind
        self.max_mixed = max_mixed
        self.normalize = normalize
        if self.kind == "mixed":
            self._check_mixed()
        self.t = np.array(state.data, dtype=np.complex128).reshape([2] * (self.n * (1 if self.kind == "pure" else 2)))
        self.probs: list[float] = []

    def _check_mixed(self) -> None:
        if self.n > self.max_mixed:
            raise Unsupported(f"mixed-state simulation is capped at {self.max_mixed} qubits (got {self.n})")

    def to_mixed(self) -> None:
        if self.kind == "mixed":
            return
        self.kind = "mixed"
        self._check_mixed()
        v = self.t.reshape(-1)
        self.t = np.outer(v, np.conj(v)).reshape([2] * (2 * self.n))

    def unitary(self, qubits, u, controls=(), cvals=()) -> None:
        self.t = _apply_left(self.t, u, qubits, controls, cvals)
        if self.kind == "mixed":
            n = self.n
            self.t = _apply_left(self.t, np.conj(u), [n + q for q in qubits], [n + c for c in controls], cvals)

    def two_level(self, qubits, i, j, block) -> None:
        self.t = _apply_two_level_rows(self.t, qubits, i, j, block)
        if self.kind == "mixed":
            self.t = _apply_two_level_rows(self.t, [self.n + q for q in qubits], i, j, np.conj(block))

    def channel(self, qubits, kraus) -> None:
        if len(kraus) == 1 and linalg.is_unitary(kraus[0]):
            self.unitary(qubits, kraus[0])
            return
        self.to_mixed()
        n = self.n
        acc = None
        for k in kraus:
            s = _apply_left(self.t.copy(), k, qubits)
            s = _apply_left(s, np.conj(k), [n + q for q in qubits])
            acc = s if acc is None else acc + s
        self.t = acc

    def reset(self, q) -> None:
        self.to_mixed()
        n = self.n
        v = np.moveaxis(self.t, [q, n + q], [0, 1])
        v[0, 0] += v[1, 1]
        v[1, 1] = 0
        v[0, 1] = 0
        v[1, 0] = 0

    def postselect(self, qubits, outcome) -> None:
        n = self.n
        idx = [slice(None)] * self.t.ndim
        for q, b in zip(qubits, outcome):
            idx[q] = b
        if self.kind == "mixed":
            for q, b in zip(qubits, outcome):
                idx[n + q] = b
        mask = np.zeros_like(self.t)
        mask[tuple(idx)] = self.t[tuple(idx)]
        self.t = mask
        dim = 2**n
        if self.kind == "pure":
            p = float(np.vdot(self.t.reshape(-1), self.t.reshape(-1)).real)
        else:
            p = float(np.trace(self.t.reshape(dim, dim)).real)
        self.probs.append(p)
        if self.normalize:
            if p < ZERO_PROB:
                raise ZeroProbability(f"post-selection probability {p:.3e}")
            self.t = self.t / (np.sqrt(p) if self.kind == "pure" else p)

    def gate_noise(self, op, noise: NoiseModel) -> None:
        sup = op.support
        w = len(sup)
        if w == 0:
            return
        self.to_mixed()
        if w == 1 and op.cost is None:
            _depolarize(self.t, self.n, sup, noise.mu_1q)
        elif w == 2 and op.cost is None:
            _depolarize(self.t, self.n, sup, noise.mu_2q)
        else:
            n1, n2 = op.cost if op.cost is not None else (
                two_level_cost(w) if isinstance(op, TwoLevel) else generic_cost(w))
            _depolarize_each(self.t, self.n, sup, lumped_rate(n1, n2, noise.mu_1q, noise.mu_2q, w))

    def state(self) -> SimState:
        d = 2**self.n
        shape = (d,) if self.kind == "pure" else (d, d)
        return SimState(self.kind, self.n, self.t.reshape(shape).copy())


def run(
    circ: SynthesizedCircuit,
    init: SimState | None = None,
    noise: NoiseModel | None = None,
    max_mixed: int = MAX_MIXED_QUBITS,
    normalize: bool = True,
) -> RunResult:
    """Apply ``circ.ops`` in order to ``init`` (default ``|0...0>``).

    With ``normalize=False`` every operation acts linearly: post-selection
    projects without renormalising, so the result is the unnormalised
    branch and arbitrary operators (e.g. ``|a><b|``) may be propagated.

    Raises
    ------
    ZeroProbability
        If a post-selection has probability below ``1e-14`` (normalising mode).
    """
    init = SimState.zero(circ.qubits) if init is None else init
    if init.qubits != circ.qubits:
        raise DimMismatch(f"{init.qubits}-qubit state for a {circ.qubits}-qubit circuit")
    eng = _Engine(init, max_mixed, normalize)
    for op in circ.ops:
        if isinstance(op, Unitary):
            eng.unitary(op.qubits, op.matrix, op.controls, op.control_values)
        elif isinstance(op, TwoLevel):
            eng.two_level(op.qubits, op.i, op.j, op.block)
        elif isinstance(op, Channel):
            eng.channel(op.qubits, op.kraus)
        elif isinstance(op, Reset):
            eng.reset(op.qubit)
        elif isinstance(op, PostSelect):
            eng.postselect(op.qubits, op.outcome)
        elif isinstance(op, Idle):
            if noise is not None and math.isfinite(noise.T1) and op.n_gates > 0:
                g = idle_gamma(op.n_gates, noise.gate_time_id, noise.T1)
                ks = amplitude_damping(g).kraus
                for q in op.qubits:
                    eng.channel((q,), ks)
            continue
        else:
            raise TypeError(f"unknown op {op!r}")
        if (
            noise is not None
            and noise.has_gate_noise
            and isinstance(op, (Unitary, TwoLevel))
            and not op.noiseless
        ):
            eng.gate_noise(op, noise)
    return RunResult(eng.state(), eng.probs)


def evolve_operator(
    circ: SynthesizedCircuit, op: npt.ArrayLike, noise: NoiseModel | None = None,
    max_mixed: int = MAX_MIXED_QUBITS,
) -> CMatrix:
    """Propagate an arbitrary operator through ``circ`` as a linear map."""
    m = linalg.as_cmatrix(op)
    st = SimState("mixed", _qubits_for(m.shape[0]), m)
    return run(circ, st, noise, max_mixed=max_mixed, normalize=False).state.data


def idle_noise(state: SimState, qubits: Sequence[int], n_gates: int, noise: NoiseModel) -> SimState:
    """Amplitude damping from ``n_gates`` identity gates on each listed qubit."""
    circ = SynthesizedCircuit(state.qubits, [Idle(tuple(qubits), n_gates)])
    return run(circ, state, noise).state


def reset(state: SimState, qubit: int) -> SimState:
    """Trace out ``qubit`` and re-prepare it in ``|0>``."""
    return run(SynthesizedCircuit(state.qubits, [Reset(qubit)]), state).state


def sample_probability(p: float, shots: int, rng: np.random.Generator) -> float:
    """Binomial estimate of an outcome probability from ``shots`` repetitions."""
    if shots <= 0:
        raise ConfigError("shots must be positive")
    p = min(max(float(p), 0.0), 1.0)
    return float(rng.binomial(shots, p) / shots)


def sample_counts(probs: npt.ArrayLike, shots: int, rng: np.random.Generator) -> npt.NDArray[np.int64]:
    """Multinomial outcome counts for a computational-basis readout."""
    p = np.clip(np.real(np.asarray(probs, dtype=float)), 0.0, None)
    return rng.multinomial(shots, p / p.sum())
