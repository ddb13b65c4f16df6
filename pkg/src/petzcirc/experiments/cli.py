"""Command-line entry point: ``petzcirc <study> [options]``.

Settings are layered: built-in defaults for the study, then the JSON config
file given with ``--config``, then explicit flags.

Exit codes: 0 on success, 2 on a configuration error, 3 on a numerical
failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from ..errors import ConfigError, NumericalFailure
from . import studies
from .config import FORMATS, ExperimentConfig, parse_sweep
from .output import write
from .pipelines import INJECTIONS

log = logging.getLogger("petzcirc")

STUDIES = {
    "sweep-theta": studies.sweep_theta,
    "sweep-gamma": studies.sweep_gamma,
    "fid-map": studies.fidelity_map,
    "threshold": studies.threshold_scan,
    "delta-fit": studies.delta_fit,
    "resources": studies.resources,
    "synth": studies.synth,
}

DEFAULTS = {
    "sweep-theta": {"gamma": [0.2]},
    "sweep-gamma": {"gamma": "0:0.5:11", "noise_injection": "idle"},
    "fid-map": {"gamma": "0:0.3:7", "theta_points": 17, "methods": ["povm", "iso"], "noise_injection": "idle"},
    "threshold": {"gamma": [0.1, 0.2, 0.3], "methods": ["iso", "povm"], "noise_injection": "idle"},
    "delta-fit": {"gamma": "0:0.3:16", "methods": ["povm"]},
    "resources": {"gamma": [0.1]},
    "synth": {"gamma": [0.1]},
}


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # usage errors are config errors
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _summary(fn) -> str | None:
    doc = (fn.__doc__ or "").strip()
    return doc.splitlines()[0] if doc else None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="petzcirc", description="Petz recovery circuit studies")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="study", required=True, parser_class=_Parser)
    for name in STUDIES:
        s = sub.add_parser(name, help=_summary(STUDIES[name]))
        s.add_argument("--config", type=Path, help="JSON file mirroring the experiment configuration")
        s.add_argument("--method", help="comma-separated recovery methods (iso, povm, blockenc)")
        s.add_argument("--code", help="code name (leung4, unencoded)")
        s.add_argument("--gamma", help="damping value, list 'a,b' or range 'start:stop:num'")
        s.add_argument("--mu1", type=float, help="single-qubit depolarizing strength")
        s.add_argument("--mu2", type=float, help="two-qubit depolarizing strength")
        s.add_argument("--shots", type=int, help="binomial sampling of probabilities (default: exact)")
        s.add_argument("--seed", type=int)
        s.add_argument("--noise-injection", choices=INJECTIONS)
        s.add_argument("--theta-points", type=int)
        s.add_argument("--phi", type=float)
        s.add_argument("--prep", choices=("exact", "hardware"))
        s.add_argument("--threshold-mode", choices=("worst", "ket1"))
        s.add_argument("--out", type=Path, help="output file (default: stdout)")
        s.add_argument("--format", choices=FORMATS)
    return p


def make_config(args: argparse.Namespace) -> ExperimentConfig:
    data = dict(DEFAULTS[args.study])
    if args.config is not None:
        try:
            file_data = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(file_data, dict):
            raise ConfigError("config file must hold a JSON object")
        data.update(file_data)
    flags = {
        "methods": args.method,
        "code": args.code,
        "gamma": parse_sweep(args.gamma) if args.gamma is not None else None,
        "mu_1q": args.mu1,
        "mu_2q": args.mu2,
        "shots": args.shots,
        "seed": args.seed,
        "noise_injection": args.noise_injection,
        "theta_points": args.theta_points,
        "phi": args.phi,
        "prep": args.prep,
        "threshold_mode": args.threshold_mode,
        "output": str(args.out) if args.out is not None else None,
        "format": args.format,
    }
    data.update({k: v for k, v in flags.items() if v is not None})
    return ExperimentConfig.from_dict(data)


def run_study(study: str, cfg: ExperimentConfig) -> str:
    result = STUDIES[study](cfg)
    out = Path(cfg.output) if cfg.output else None
    if isinstance(result, dict):  # circuit exports are always JSON
        text = json.dumps(result, indent=2)
        if out is not None:
            out.write_text(text)
        return text
    return write(result, cfg.format, out)


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
        cfg = make_config(args)
        log.info("running %s with %s", args.study, cfg.to_dict())
        text = run_study(args.study, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    if cfg.output is None:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
