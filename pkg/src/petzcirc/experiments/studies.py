"""
The numerical studies: fidelity sweeps, noisy fidelity maps, gate-noise
thresholds, approximation-error fits and resource tables.

Every study returns a :class:`Table` whose rows are produced in a fixed
order, so identical configurations give identical output.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .. import channels, codes, iso_synth, povm_synth, simulator as sim
from ..errors import NoCrossing
from .config import ExperimentConfig
from .pipelines import Setup, _wcirc, iso_for, povm_for, response, theta_grid

LOG_MU_RANGE = (-8.0, -1.0)
MU_REL_PRECISION = 0.02


@dataclass
class Table:
    columns: list[str]
    rows: list[list] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    kind: str = "lines"  # how the SVG writer draws it

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]


def _setup(cfg: ExperimentConfig, method: str, gamma: float, mu_1q: float | None = None,
           mu_2q: float | None = None, injection: str | None = None) -> Setup:
    return Setup(
        method=method,
        gamma=gamma,
        injection=injection or cfg.noise_injection,
        mu_1q=cfg.mu_1q if mu_1q is None else mu_1q,
        mu_2q=cfg.mu_2q if mu_2q is None else mu_2q,
        t1=cfg.t1,
        prep=cfg.prep,
        code=cfg.code,
    )


def _maybe_sample(values: np.ndarray, cfg: ExperimentConfig, rng: np.random.Generator) -> np.ndarray:
    if cfg.shots is None:
        return values
    return np.array([sim.sample_probability(v, cfg.shots, rng) for v in np.ravel(values)]).reshape(np.shape(values))


def sweep_theta(cfg: ExperimentConfig) -> Table:
    """``F^2`` against the logical polar angle at fixed ``gamma``."""
    gamma = cfg.gamma[0]
    th = theta_grid(cfg.theta_points)
    rng = cfg.rng()
    cols = {}
    for m in cfg.methods:
        r = response(_setup(cfg, m, gamma))
        cols[m] = _maybe_sample(r.f2(th, cfg.phi), cfg, rng)
    base_setup = _setup(cfg, "unencoded", gamma, 0.0, 0.0)
    cols["unencoded"] = _maybe_sample(response(base_setup).f2(th, cfg.phi), cfg, rng)
    names = ["theta"] + [f"F2_{m}" for m in cols]
    rows = [[float(t)] + [float(cols[m][i]) for m in cols] for i, t in enumerate(th)]
    return Table(names, rows, {"study": "sweep-theta", "gamma": gamma, "phi": cfg.phi,
                               "noise_injection": cfg.noise_injection})


def sweep_gamma(cfg: ExperimentConfig) -> Table:
    """``F^2`` of the logical ``|1>`` against ``gamma``, with the unencoded baseline."""
    rng = cfg.rng()
    names = ["gamma", "gamma_realized"] + [f"F2_{m}" for m in cfg.methods] + ["F2_unencoded"]
    rows = []
    for g in cfg.gamma:
        row = [float(g)]
        vals = []
        realized = g
        for m in cfg.methods:
            r = response(_setup(cfg, m, g))
            realized = r.gamma
            vals.append(float(_maybe_sample(r.f2(math.pi), cfg, rng)))
        base = response(_setup(cfg, "unencoded", g, 0.0, 0.0))
        vals.append(float(_maybe_sample(base.f2(math.pi), cfg, rng)))
        rows.append(row + [float(realized)] + vals)
    return Table(names, rows, {"study": "sweep-gamma", "state": "|1>", "noise_injection": cfg.noise_injection})


def fidelity_map(cfg: ExperimentConfig) -> Table:
    """``F^2(theta, gamma)`` for the unencoded qubit and each recovery at its own ``mu``."""
    th = theta_grid(cfg.theta_points)
    rng = cfg.rng()
    scenarios = [("unencoded", 0.0)] + [(m, cfg.mu_map.get(m, cfg.mu_1q)) for m in cfg.methods]
    rows = []
    for name, mu in scenarios:
        for g in cfg.gamma:
            r = response(_setup(cfg, name, g, mu, mu))
            vals = _maybe_sample(r.f2(th, cfg.phi), cfg, rng)
            rows += [[name, float(mu), float(g), float(t), float(v)] for t, v in zip(th, vals)]
    return Table(["scenario", "mu", "gamma", "theta", "F2"], rows,
                 {"study": "fid-map", "noise_injection": cfg.noise_injection}, kind="heatmap")


def encoded_advantage(cfg: ExperimentConfig, method: str, gamma: float, mu: float) -> float:
    """Encoded minus unencoded fidelity at gate noise ``mu`` (worst case or ``|1>``)."""
    th = theta_grid(cfg.threshold_theta_points) if cfg.threshold_mode == "worst" else np.array([math.pi])
    enc = response(_setup(cfg, method, gamma, mu, mu)).f2(th, cfg.phi)
    base = response(_setup(cfg, "unencoded", gamma, 0.0, 0.0)).f2(th, cfg.phi)
    return float(np.min(enc) - np.min(base))


def find_threshold(cfg: ExperimentConfig, method: str, gamma: float) -> float:
    """Bisection on ``log10 mu`` for the sign change of :func:`encoded_advantage`.

    Raises
    ------
    NoCrossing
        If the encoded qubit does not beat the unencoded one at the lowest
        ``mu``, or still beats it at the highest.
    """
    lo, hi = LOG_MU_RANGE
    if encoded_advantage(cfg, method, gamma, 10**lo) <= 0:
        raise NoCrossing(f"{method} at gamma={gamma}: no advantage even at mu=1e{lo:g}")
    if encoded_advantage(cfg, method, gamma, 10**hi) > 0:
        raise NoCrossing(f"{method} at gamma={gamma}: advantage persists at mu=1e{hi:g}")
    while 10 ** (hi - lo) - 1 > MU_REL_PRECISION:
        mid = 0.5 * (lo + hi)
        if encoded_advantage(cfg, method, gamma, 10**mid) > 0:
            lo = mid
        else:
            hi = mid
    return float(10 ** (0.5 * (lo + hi)))


def threshold_scan(cfg: ExperimentConfig) -> Table:
    """Break-even gate noise ``mu`` per ``gamma`` for the iso and POVM recoveries."""
    methods = [m for m in cfg.methods if m in ("iso", "povm")] or ["iso", "povm"]
    rows = []
    for g in cfg.gamma:
        rows.append([float(g)] + [find_threshold(cfg, m, g) for m in methods])
    return Table(["gamma"] + [f"mu_{m}" for m in methods], rows,
                 {"study": "threshold", "mode": cfg.threshold_mode, "theta_points": cfg.threshold_theta_points,
                  "noise_injection": cfg.noise_injection})


def delta_fit(cfg: ExperimentConfig) -> Table:
    """POVM gap ``Delta(gamma)`` with a quadratic fit stored in the metadata."""
    code = codes.get_code(cfg.code)
    samples = povm_synth.delta_curve(code, cfg.gamma)
    fit = povm_synth.quadratic_fit([s.gamma for s in samples], [s.delta for s in samples])
    rows = [[s.gamma, s.delta, s.exact, s.approx] for s in samples]
    meta = {"study": "delta-fit", "coefficients": list(fit.coefficients), "r_squared": fit.r_squared}
    return Table(["gamma", "delta", "F2min_exact", "F2min_povm"], rows, meta)


def resources(cfg: ExperimentConfig, n: int = 4, N: int = 4) -> Table:
    """Resource table at ``(n, N)`` plus counts measured on the configured code."""
    code = codes.get_code(cfg.code)
    gamma = cfg.gamma[0]
    iso = iso_for(_setup(cfg, "iso", gamma))
    seq = povm_for(_setup(cfg, "povm", gamma))
    rows = []
    for m in ("iso", "povm", "blockenc", "qsvt-reference"):
        rep = iso_synth.resource_count(n, 2, N, m, measured_two_level=len(iso.gates) if m == "iso" else None)
        rows.append([m, rep.gate_formula, rep.ancilla_formula, rep.ancilla, rep.gate_order,
                     rep.approximate, rep.probabilistic])
    noise_kraus = channels.amplitude_damping(gamma).num_kraus
    measured = {
        "code": code.name,
        "gamma": gamma,
        "iso_two_level_count": len(iso.gates),
        "iso_two_level_bound": 2 ** (2 * code.n) * noise_kraus**code.n,
        "iso_ancilla": iso.ancilla_qubits,
        "povm_steps": len(seq.steps),
        "povm_ancilla": seq.ancilla_count,
    }
    return Table(["method", "gate_formula", "ancilla_formula", "ancilla", "gate_order", "approximate",
                  "probabilistic"], rows, {"study": "resources", "n": n, "N": N, "measured": measured},
                 kind="none")


def synth(cfg: ExperimentConfig) -> dict:
    """Synthesized recoveries of the configured code at the first ``gamma``, as JSON-ready data."""
    gamma = cfg.gamma[0]
    out: dict = {"code": cfg.code, "gamma": gamma}
    for m in cfg.methods:
        s = _setup(cfg, m, gamma)
        if m == "iso":
            out["iso"] = json.loads(iso_for(s).to_json())
        elif m == "povm":
            out["povm"] = json.loads(povm_for(s).to_json())
        else:
            out["blockenc"] = json.loads(_wcirc(cfg.code, gamma).to_json())
    return out
