"""Command line entry point: ``dyadic-rad-lab <experiment> [--config cfg.json] [--out dir]``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from .experiments import EXIT_CONFIG, EXPERIMENTS, run

COLUMNS = {
    "counterexample": "N, mode, embed_norm, lp_norm, ratio (= embed_norm / lp_norm), car_constant, "
                      "khintchine_ratio (Rad_p norm of xs over their l^p sum), fitted_exponent",
    "rmf-probe": "level, space, ratio (||M_R f||_p / ||f||_p), std_ratio (same with M), witness",
    "lemma-audit": "instance, level, dim, p, r, s, lhs, car, maximal_lorentz, ratio, a..e (step holds), e_ratio",
    "witness": "atom, value (p-th moment realized on the level-N atom)",
    "radnorm": "n, p, mode, moment, norm",
    "rbound": "operators, p, value, certified",
    "typeconst": "space, p, value, certified",
    "car-constant": "p, car_constant",
    "embed-norm": "p, embed_norm, lp_norm",
    "op-norm-search": "p, value, certified",
    "condexp": "atom, x0, x1, ... (values of E_j f)",
    "maximal": "atom, value",
    "lorentz": "p, s, lorentz_norm",
}

HELP = {
    "counterexample": "sweep the level-N pair whose embedding realizes a Rademacher moment",
    "rmf-probe": "search for large ||M_R f||_p / ||f||_p in l^1_n or l^2_n",
    "lemma-audit": "check the stopping-time embedding bound step by step",
    "witness": "assemble a Carleson family bounding the integral of the maximal R-bound",
    "radnorm": "Rademacher moment of a list of vectors",
    "rbound": "lower bound on the R-bound of an operator family",
    "typeconst": "lower bound on the type-p constant of a sequence space",
    "car-constant": "Carleson constant of a family",
    "embed-norm": "L^p(Rad) norm of the embedded function",
    "op-norm-search": "lower bound on the norm of the embedding operator",
    "condexp": "conditional expectation onto level j",
    "maximal": "standard or Rademacher maximal function",
    "lorentz": "Lorentz L^{p,s} norm",
}


def _space_arg(text: str):
    s = text.strip()
    return json.loads(s) if s.startswith("{") else json.loads(Path(s).read_text())


def _add_overrides(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", type=Path, help="JSON configuration file")
    sp.add_argument("--out", type=Path, default=Path("."), help="output directory (default: .)")
    sp.add_argument("--p", type=float, help="exponent")
    sp.add_argument("--space", type=_space_arg, help="space description, inline JSON or path")
    sp.add_argument("--mode", choices=["auto", "exact", "mc"])
    sp.add_argument("--samples", type=int, help="Monte-Carlo sample count")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--level", type=int)
    sp.add_argument("--levels", type=int, nargs="+")
    sp.add_argument("--N", dest="start", type=int, help="truncation start")
    sp.add_argument("--N-min", dest="n_min", type=int)
    sp.add_argument("--N-max", dest="n_max", type=int)
    sp.add_argument("--r", type=float)
    sp.add_argument("--s", type=float)
    sp.add_argument("--j", type=int)
    sp.add_argument("--kind", choices=["std", "rad"])
    sp.add_argument("--q", dest="qs", type=float, action="append", help="extra exponent (repeatable)")
    sp.add_argument("--instances", type=int)
    sp.add_argument("--xs-rule", dest="xs_rule", choices=["ones", "random"])
    sp.add_argument("--vectors", help="CSV file of vectors, one per row")
    sp.add_argument("--function", help="dyadic function CSV file")
    sp.add_argument("--family", help="Carleson family JSON manifest")
    sp.add_argument("--operators", help="JSON file with a list of matrices")
    sp.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dyadic-rad-lab", description=__doc__)
    sub = ap.add_subparsers(dest="experiment", required=True, metavar="experiment")
    for name in EXPERIMENTS:
        sp = sub.add_parser(name, help=HELP[name], description=HELP[name],
                            epilog=f"CSV columns: {COLUMNS[name]}.  The JSON summary carries 'schema': 1.")
        _add_overrides(sp)
    return ap


_SCALAR_KEYS = ("p", "space", "mode", "samples", "seed", "level", "levels", "start", "n_min", "n_max",
                "r", "s", "j", "kind", "qs", "instances", "xs_rule")
_INPUT_KEYS = ("vectors", "function", "family")


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    cfg: dict = {}
    if args.config is not None:
        try:
            cfg = json.loads(args.config.read_text())
        except (OSError, ValueError) as exc:
            logging.error("cannot read configuration: %s", exc)
            return EXIT_CONFIG
        if not isinstance(cfg, dict):
            logging.error("configuration must be a JSON object")
            return EXIT_CONFIG
    if cfg.get("experiment", args.experiment) != args.experiment:
        logging.error("configuration is for %r, not %r", cfg["experiment"], args.experiment)
        return EXIT_CONFIG
    cfg["experiment"] = args.experiment
    for key in _SCALAR_KEYS:
        v = getattr(args, key)
        if v is not None:
            cfg[key] = v
    inputs = dict(cfg.get("inputs", {}))
    for key in _INPUT_KEYS:
        v = getattr(args, key)
        if v is not None:
            inputs[key] = v
    if args.operators is not None:
        try:
            inputs["operators"] = json.loads(Path(args.operators).read_text())
        except (OSError, ValueError) as exc:
            logging.error("cannot read operators: %s", exc)
            return EXIT_CONFIG
    if inputs:
        cfg["inputs"] = inputs
    return run(cfg, args.out)


if __name__ == "__main__":
    sys.exit(main())
