"""Command-line surface tying the library together.

Subcommands: estimate (histogram/sample file to point estimate), approx
(best-polynomial report), risk-sweep (Monte Carlo rate table to CSV),
lower-bound (two-point and composite constructions), check-speed
(divergence-speed fit), priors (moment-matched pair to CSV).  Every
command prints one JSON document with the resolved configuration
embedded, so a run can be reproduced from its own output.  Exit codes:
0 success, 2 malformed input (with line number), 3 configuration
rejected, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import (
    ConfigurationError,
    InputFormatError,
    MinifuncError,
)
from .estimators import (
    EstimatorConfig,
    Histogram,
    composite_estimate,
    corrected_plugin_estimate,
    default_config,
    default_correction_order,
    plain_plugin_estimate,
    recommended_estimator,
    tuned_config,
    validate_config,
)
from .functionals import Functional, check_divergence_speed, power_functional, shannon_functional
from .lowerbounds import (
    canonical_two_point_pair,
    composite_lower_bound,
    divergence,
    fitted_bound_constants,
    hellinger_le_cam_bound,
    le_cam_bound,
    moment_matched_pair,
    tilted_pair,
)
from .polyapprox import remez_best_approx
from .risklab import ESTIMATORS, rate_sweep

__all__ = ["RunConfig", "main", "parse_phi", "read_counts", "schema_path"]


@dataclass(frozen=True)
class RunConfig:
    """Resolved invocation: command name, parameter dict, master seed.

    Everything inside params is a plain JSON type, so a config
    round-trips through to_json/from_json without loss.
    """

    command: str
    params: dict
    master_seed: int = 0

    def to_json(self) -> str:
        return json.dumps(
            {
                "command": self.command,
                "params": self.params,
                "master_seed": self.master_seed,
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        doc = json.loads(text)
        return cls(
            command=doc["command"],
            params=doc["params"],
            master_seed=doc["master_seed"],
        )

    def as_embedded(self) -> dict:
        return dict(self.params, seed=self.master_seed)


def schema_path(command: str):
    """Filesystem path of the published output schema for a command."""
    name = command.replace("-", "_") + ".json"
    return resources.files("minifunc") / "schemas" / name


def parse_phi(text: str) -> tuple[Functional, dict]:
    """'shannon', 'power:<alpha>', or a JSON object with a kind field."""
    text = text.strip()
    if text == "shannon":
        return shannon_functional(), {"kind": "shannon"}
    if text.startswith("power:"):
        try:
            alpha = float(text.split(":", 1)[1])
        except ValueError:
            raise InputFormatError(f"bad power exponent in {text!r}") from None
        return power_functional(alpha), {"kind": "power", "alpha": alpha}
    if text.startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            raise InputFormatError(f"phi JSON does not parse: {e}") from None
        kind = doc.get("kind")
        if kind == "shannon":
            return shannon_functional(), {"kind": "shannon"}
        if kind == "power":
            if "alpha" not in doc:
                raise InputFormatError("power phi needs an alpha field")
            alpha = float(doc["alpha"])
            return power_functional(alpha), {"kind": "power", "alpha": alpha}
        raise InputFormatError(f"unknown phi kind {kind!r}")
    raise InputFormatError(
        f"phi must be 'shannon', 'power:<alpha>', or a JSON object, got {text!r}"
    )


def _parse_interval(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise InputFormatError(f"interval must be 'lo,hi', got {text!r}")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError:
        raise InputFormatError(f"interval must be 'lo,hi', got {text!r}") from None
    return lo, hi


def _parse_int_list(text: str, what: str) -> list[int]:
    out = []
    for piece in text.split(","):
        try:
            out.append(int(piece))
        except ValueError:
            raise InputFormatError(f"{what} must be comma-separated integers, got {text!r}") from None
    return out


def read_counts(path: str, k_override: int | None = None) -> tuple[np.ndarray, str]:
    """Load a histogram CSV (header symbol,count) or a raw sample file.

    Symbols are 0-based indices; the alphabet size is the largest index
    plus one unless k_override says otherwise (zero-count symbols are
    real symbols).  Returns (counts, kind) with kind 'histogram' or
    'samples'; for samples the number of lines is the sample size.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as e:
        raise InputFormatError(f"cannot read {path}: {e}") from None
    first = ""
    for raw in lines:
        if raw.strip():
            first = raw.strip()
            break
    if not first:
        raise InputFormatError("input file is empty", line=1)

    if first.replace(" ", "").lower() == "symbol,count":
        return (_parse_histogram(lines, k_override), "histogram")
    return (_parse_samples(lines, k_override), "samples")


def _resolve_k(entries_max: int, k_override: int | None) -> int:
    inferred = entries_max + 1
    if k_override is None:
        return inferred
    if k_override < inferred:
        raise ConfigurationError(
            f"--k={k_override} is smaller than the largest symbol index {entries_max}"
        )
    return k_override


def _parse_histogram(lines, k_override) -> np.ndarray:
    entries: dict[int, int] = {}
    seen_header = False
    for lineno, raw in enumerate(lines, start=1):
        s = raw.strip()
        if not s:
            continue
        if not seen_header:
            seen_header = True
            continue
        parts = s.split(",")
        if len(parts) != 2:
            raise InputFormatError(f"expected 'symbol,count', got {s!r}", line=lineno)
        try:
            sym, cnt = int(parts[0]), int(parts[1])
        except ValueError:
            raise InputFormatError(f"non-integer field in {s!r}", line=lineno) from None
        if sym < 0 or cnt < 0:
            raise InputFormatError("symbol and count must be non-negative", line=lineno)
        if sym in entries:
            raise InputFormatError(f"duplicate symbol {sym}", line=lineno)
        entries[sym] = cnt
    if not entries:
        raise InputFormatError("histogram has no data rows", line=max(1, len(lines)))
    k = _resolve_k(max(entries), k_override)
    counts = np.zeros(k, dtype=np.int64)
    for sym, cnt in entries.items():
        counts[sym] = cnt
    return counts


def _parse_samples(lines, k_override) -> np.ndarray:
    symbols = []
    for lineno, raw in enumerate(lines, start=1):
        s = raw.strip()
        if not s:
            continue
        try:
            sym = int(s)
        except ValueError:
            raise InputFormatError(f"expected one integer symbol, got {s!r}", line=lineno) from None
        if sym < 0:
            raise InputFormatError("symbols must be non-negative", line=lineno)
        symbols.append(sym)
    k = _resolve_k(max(symbols), k_override)
    return np.bincount(np.asarray(symbols, dtype=np.int64), minlength=k).astype(np.int64)


def _resolve_seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get("MINIFUNC_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise ConfigurationError(f"MINIFUNC_SEED must be an integer, got {env!r}") from None


def _num_or_null(x) -> float | None:
    x = float(x)
    return x if math.isfinite(x) else None


def _cmd_estimate(args) -> dict:
    phi, phi_doc = parse_phi(args.phi)
    seed = _resolve_seed(args)
    counts, kind = read_counts(args.input, args.k)
    total = int(counts.sum())
    if args.model == "multinomial":
        n = total if args.n is None else args.n
        if n != total:
            raise ConfigurationError(
                f"--n={n} disagrees with the {total} samples in the input"
            )
    else:
        if args.n is None:
            raise ConfigurationError("poissonized model needs --n (the nominal rate scale)")
        n = args.n
    h = Histogram(counts=counts, n_nominal=n, model=args.model)

    alpha = phi.alpha if phi.alpha is not None else 1.0
    order = args.order if args.order is not None else default_correction_order(alpha)
    warnings: list[str] = []
    if (args.c1 is None) != (args.c2 is None):
        raise ConfigurationError("--c1 and --c2 must be given together")
    if args.c1 is not None:
        preset = "explicit"
        cfg = EstimatorConfig(c1=args.c1, c2=args.c2, correction_order=order, rng_seed=seed)
        violations = validate_config(cfg, alpha)
        if violations and not args.allow_unvalidated:
            raise ConfigurationError(
                "constants fail the admissibility inequalities: "
                + "; ".join(str(v) for v in violations)
            )
        warnings.extend(f"admissibility: {v}" for v in violations)
    elif args.preset == "tuned":
        preset = "tuned"
        cfg = tuned_config(alpha, correction_order=order, rng_seed=seed)
        warnings.extend(f"admissibility: {v}" for v in validate_config(cfg, alpha))
    else:
        preset = "default"
        cfg = default_config(alpha, correction_order=order, rng_seed=seed)

    estimator = args.estimator or recommended_estimator(alpha)
    if estimator == "composite":
        res = composite_estimate(h, phi, cfg, rng=np.random.default_rng(seed))
        estimate = res.estimate
        branch_counts = dict(res.branch_counts)
        warnings.extend(res.warnings)
        extras = {
            "n_effective": res.n_effective,
            "degree": res.degree,
            "threshold": res.threshold,
            "poly_interval": list(res.poly_interval),
        }
    else:
        if estimator == "corrected":
            estimate = corrected_plugin_estimate(h, phi, cfg)
        else:
            estimate = plain_plugin_estimate(h, phi)
        branch_counts = {"plugin": h.k, "poly": 0}
        extras = {"n_effective": None, "degree": None, "threshold": None, "poly_interval": None}

    rc = RunConfig(
        command="estimate",
        params={
            "phi": phi_doc,
            "n": n,
            "k": int(h.k),
            "model": args.model,
            "input_kind": kind,
            "estimator": estimator,
            "c1": cfg.c1,
            "c2": cfg.c2,
            "correction_order": cfg.correction_order,
            "preset": preset,
        },
        master_seed=seed,
    )
    return {
        "command": "estimate",
        "config": rc.as_embedded(),
        "estimate": estimate,
        "branch_counts": branch_counts,
        "warnings": warnings,
        **extras,
    }


def _cmd_approx(args) -> dict:
    phi, phi_doc = parse_phi(args.phi)
    seed = _resolve_seed(args)
    interval = _parse_interval(args.interval)
    result = remez_best_approx(phi.eval, args.L, interval)
    rc = RunConfig(
        command="approx",
        params={"phi": phi_doc, "L": args.L, "interval": list(interval)},
        master_seed=seed,
    )
    return {
        "command": "approx",
        "config": rc.as_embedded(),
        "sup_error": result.sup_error,
        "coefficients": [float(c) for c in result.poly.coeffs],
        "alternation_points": [float(x) for x in result.alternation_points],
        "iterations": result.iterations,
        "converged": result.converged,
    }


def _cmd_check_speed(args) -> dict:
    phi, phi_doc = parse_phi(args.phi)
    seed = _resolve_seed(args)
    report = check_divergence_speed(phi, args.ell, alpha=args.alpha)
    rc = RunConfig(
        command="check-speed",
        params={"phi": phi_doc, "ell": args.ell, "alpha": report.alpha},
        master_seed=seed,
    )
    return {
        "command": "check-speed",
        "config": rc.as_embedded(),
        "holds": report.holds,
        "W": report.W,
        "c": report.c,
        "c_prime": report.c_prime,
        "spread": report.spread,
        "witness": _num_or_null(report.witness) if report.witness is not None else None,
    }


def _cmd_lower_bound(args) -> dict:
    phi, phi_doc = parse_phi(args.phi)
    seed = _resolve_seed(args)
    params = {
        "phi": phi_doc,
        "k": args.k,
        "n": args.n,
        "construction": args.construction,
        "p": None,
        "c": None,
        "lam": None,
        "degree": None,
        "gap": None,
    }
    extras: dict = {"condition": None, "e_l": None, "gamma": None}
    if args.construction in ("le-cam", "hellinger"):
        params["p"] = args.p
        params["c"] = args.c
        pair = canonical_two_point_pair(phi, args.k, args.n, p=args.p, c=args.c)
        if args.construction == "le-cam":
            bound = le_cam_bound(pair.P, pair.Q, phi, args.n)
            terms = {
                "theta_gap": pair.theta_gap,
                "kl": divergence(pair.P, pair.Q, "kl"),
                "kl_bound": pair.kl_bound,
            }
        else:
            h2 = divergence(pair.P, pair.Q, "hellinger")
            bound = hellinger_le_cam_bound(pair.P, pair.Q, phi, args.n)
            terms = {"theta_gap": pair.theta_gap, "hellinger_sq": h2}
    else:
        if phi.alpha is None:
            raise ConfigurationError("composite construction needs a phi with an exponent")
        if args.gap is None:
            raise ConfigurationError("composite construction needs --gap (the separation to certify)")
        lam = args.lam if args.lam is not None else min(
            0.05 * args.k * math.log(args.n) / args.n, math.sqrt(args.k) / 12.0
        )
        L = args.degree if args.degree is not None else int(math.ceil(2.0 * math.log(args.n)))
        d = args.gap
        W, Wp = fitted_bound_constants(phi, phi.alpha)
        res = composite_lower_bound(phi, args.n, args.k, lam=lam, L=L, d=d, W=W, Wprime=Wp)
        bound = res.bound
        terms = {key: float(val) for key, val in res.terms.items()}
        params["lam"] = lam
        params["degree"] = L
        params["gap"] = d
        extras = {
            "condition": res.condition,
            "e_l": _num_or_null(res.e_l),
            "gamma": _num_or_null(res.gamma) if res.gamma is not None else None,
        }
    rc = RunConfig(command="lower-bound", params=params, master_seed=seed)
    return {
        "command": "lower-bound",
        "config": rc.as_embedded(),
        "construction": args.construction,
        "bound_value": bound,
        "terms": terms,
        **extras,
    }


def _cmd_priors(args) -> dict:
    phi, phi_doc = parse_phi(args.phi)
    seed = _resolve_seed(args)
    if args.gamma is not None:
        eta = args.eta if args.eta is not None else args.gamma
        pair = tilted_pair(phi, args.L, args.gamma, eta, grid_size=args.grid_size)
        interval = None
    else:
        interval = _parse_interval(args.interval)
        pair = moment_matched_pair(phi.eval, args.L, interval, grid_size=args.grid_size)
        eta = None
    lines = ["x,w0,w1"]
    for x, w0, w1 in zip(pair.support, pair.w0, pair.w1):
        lines.append(f"{float(x)!r},{float(w0)!r},{float(w1)!r}")
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
    rc = RunConfig(
        command="priors",
        params={
            "phi": phi_doc,
            "L": args.L,
            "interval": list(interval) if interval is not None else None,
            "gamma": args.gamma,
            "eta": eta,
            "grid_size": args.grid_size,
        },
        master_seed=seed,
    )
    return {
        "command": "priors",
        "config": rc.as_embedded(),
        "gap": pair.gap,
        "expected_gap": _num_or_null(pair.expected_gap),
        "matched_orders": pair.matched_orders,
        "support_size": int(pair.support.size),
        "warnings": list(pair.warnings),
        "out": args.out,
    }


def _cmd_risk_sweep(args) -> dict:
    if args.phi is not None:
        phi, phi_doc = parse_phi(args.phi)
    else:
        phi, phi_doc = power_functional(args.alpha), {"kind": "power", "alpha": args.alpha}
    seed = _resolve_seed(args)
    n_grid = _parse_int_list(args.n_grid, "--n-grid")
    estimators = [e.strip() for e in args.estimators.split(",") if e.strip()]
    result = rate_sweep(
        args.family,
        phi,
        estimators,
        n_grid,
        k_rule=args.k_rule,
        reps=args.reps,
        param=args.param,
        master_seed=seed,
        model=args.model,
        jobs=args.jobs,
    )
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.write(result.to_csv())
    rc = RunConfig(
        command="risk-sweep",
        params={
            "family": args.family,
            "param": args.param,
            "phi": phi_doc,
            "n_grid": sorted(n_grid),
            "k_rule": args.k_rule,
            "reps": args.reps,
            "estimators": estimators,
            "model": args.model,
            "jobs": args.jobs,
        },
        master_seed=seed,
    )
    return {
        "command": "risk-sweep",
        "config": rc.as_embedded(),
        "out": args.out,
        "slopes": {est: _num_or_null(s) for est, s in result.slopes.items()},
        "theory_slope": _num_or_null(result.theory_slope),
    }


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="minifunc",
        description="Estimation and approximation tools for additive functionals "
        "of discrete distributions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="estimate theta from a histogram or sample file")
    p.add_argument("--phi", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--model", choices=["multinomial", "poissonized"], default="multinomial")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--c1", type=float)
    p.add_argument("--c2", type=float)
    p.add_argument("--order", type=int, choices=[2, 4])
    p.add_argument("--estimator", choices=list(ESTIMATORS))
    p.add_argument("--preset", choices=["default", "tuned"], default="default")
    p.add_argument("--allow-unvalidated", action="store_true")
    p.add_argument("--seed", type=int)
    p.set_defaults(handler=_cmd_estimate)

    p = sub.add_parser("approx", help="best uniform polynomial approximation report")
    p.add_argument("--phi", required=True)
    p.add_argument("--L", required=True, type=int)
    p.add_argument("--interval", default="0,1")
    p.add_argument("--seed", type=int)
    p.set_defaults(handler=_cmd_approx)

    p = sub.add_parser("check-speed", help="fit divergence-speed constants for phi")
    p.add_argument("--phi", required=True)
    p.add_argument("--ell", type=int, default=1)
    p.add_argument("--alpha", type=float)
    p.add_argument("--seed", type=int)
    p.set_defaults(handler=_cmd_check_speed)

    p = sub.add_parser("lower-bound", help="minimax lower-bound constructions")
    p.add_argument("--phi", required=True)
    p.add_argument("--k", required=True, type=int)
    p.add_argument("--n", required=True, type=int)
    p.add_argument(
        "--construction", choices=["le-cam", "hellinger", "composite"], default="le-cam"
    )
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--lam", type=float)
    p.add_argument("--degree", type=int)
    p.add_argument("--gap", type=float)
    p.add_argument("--seed", type=int)
    p.set_defaults(handler=_cmd_lower_bound)

    p = sub.add_parser("priors", help="moment-matched measure pair to CSV")
    p.add_argument("--phi", required=True)
    p.add_argument("--L", required=True, type=int)
    p.add_argument("--interval", default="0,1")
    p.add_argument("--gamma", type=float)
    p.add_argument("--eta", type=float)
    p.add_argument("--grid-size", type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.set_defaults(handler=_cmd_priors)

    p = sub.add_parser("risk-sweep", help="Monte Carlo risk table across an n-grid")
    p.add_argument("--family", required=True, choices=["uniform", "zipf", "two_spike", "dirichlet"])
    p.add_argument("--param", type=float)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--phi")
    group.add_argument("--alpha", type=float)
    p.add_argument("--n-grid", required=True)
    p.add_argument("--k-rule", default="n")
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--estimators", default="plugin,composite")
    p.add_argument("--model", choices=["multinomial", "poissonized"], default="multinomial")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.set_defaults(handler=_cmd_risk_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        doc = args.handler(args)
    except InputFormatError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except ConfigurationError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except MinifuncError as e:
        print(f"error: {e}", file=sys.stderr)
        return 4
    print(json.dumps(doc, indent=2, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
