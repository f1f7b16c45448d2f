"""Command-line front end: ``python -m wrtree <subcommand> ...``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import coupling as cp
from . import ewens
from . import formulas as F
from .generator import RandomSource, generate
from .montecarlo import STATISTICS, CouplingSpec, ExperimentConfig, enumerate_exact, run_experiment
from .tree import RecursiveTree, compute_stats
from .verify import THEOREMS
from .weights import WeightTableExhausted, parse_family

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _seed(args) -> int:
    if args.seed is None:
        args.seed = int(np.random.SeedSequence().entropy)
        print(f"seed: {args.seed}", file=sys.stderr)
    return args.seed


def _family(text: str):
    try:
        return parse_family(text)
    except (ValueError, OSError) as exc:
        raise UsageError(f"invalid family {text!r}: {exc}") from None


def _emit(args, text: str) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _floats(text: str) -> List[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _tree_payload(t: RecursiveTree, fmt: str) -> str:
    if fmt == "json":
        return json.dumps({"n": t.n, "parents": list(t.parents())})
    if fmt == "csv":
        return "node,parent\n" + "".join(f"{j},{p}\n" for j, p in enumerate(t.parents(), start=2))
    return t.to_text()


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_gen(args) -> int:
    seq = _family(args.family)
    t = generate(seq, args.n, RandomSource(_seed(args)))
    _emit(args, _tree_payload(t, args.format))
    return EXIT_OK


def cmd_stats(args) -> int:
    t = RecursiveTree.read(args.tree)
    d = compute_stats(t).as_dict()
    if args.format == "csv":
        rows = [(k, v) for k, v in d.items() if not isinstance(v, list)]
        _emit(args, "statistic,value\n" + "".join(f"{k},{v}\n" for k, v in rows))
    else:
        _emit(args, json.dumps(d))
    return EXIT_OK


def cmd_couple(args) -> int:
    if args.kind == cp.URT_MK:
        if args.m is None or float(args.m) != int(float(args.m)) or float(args.m) < 1:
            raise UsageError(f"urt-mk needs a positive integer --m, got {args.m}")
        if args.k is None:
            raise UsageError("urt-mk needs --k")
        pair = cp.couple_urt_to_mk(int(float(args.m)), args.k, args.n, RandomSource(_seed(args)))
    else:
        if not args.family:
            raise UsageError("hoppe-wrt needs --family")
        seq = _family(args.family)
        pair = cp.couple_hoppe_to_wrt(seq, args.n, RandomSource(_seed(args)), args.k)
    inv = cp.check_pathwise(pair)
    s, t = compute_stats(pair.source).as_dict(), compute_stats(pair.target).as_dict()
    if args.format == "csv":
        rows = [k for k, v in s.items() if not isinstance(v, list)]
        _emit(args, "statistic,source,target\n" + "".join(f"{k},{s[k]},{t[k]}\n" for k in rows))
    else:
        _emit(args, json.dumps({"params": pair.params, "seed": args.seed,
                                "source": {"parents": list(pair.source.parents()), "stats": s},
                                "target": {"parents": list(pair.target.parents()), "stats": t},
                                "invariants": inv}, indent=2))
    proven = cp.GUARANTEED[args.kind]
    return EXIT_OK if all(inv[name] for name in proven) else EXIT_FAIL


def cmd_ewens(args) -> int:
    if not args.theta > 0:
        raise UsageError("theta must be positive")
    if args.n < 2:
        raise UsageError("n must be at least 2")
    p = ewens.sample_hoppe_permutation(args.theta, args.n, RandomSource(_seed(args)))
    if args.format == "json":
        _emit(args, json.dumps({"n": p.n, "cycles": [list(c) for c in p.cycles],
                                "cycle_type": list(p.cycle_type())}))
    else:
        _emit(args, str(p))
    return EXIT_OK


def cmd_bijection(args) -> int:
    if args.to_tree:
        text = Path(args.to_tree).read_text()
        try:
            perm = ewens.CyclePermutation.parse(text)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        _emit(args, ewens.perm_to_tree(perm).to_text())
    else:
        try:
            t = RecursiveTree.read(args.to_perm)
        except ValueError as exc:
            raise UsageError(f"malformed tree file: {exc}") from None
        _emit(args, str(ewens.tree_to_perm(t)))
    return EXIT_OK


def cmd_enumerate(args) -> int:
    seq = _family(args.family)
    d = enumerate_exact(seq, args.n, args.statistic, exact=args.exact, allow_large=args.allow_large)
    if args.format == "csv":
        _emit(args, "value,probability\n" + "".join(f"{v},{p}\n" for v, p in d.probabilities.items()))
    else:
        _emit(args, json.dumps({"family": seq.spec, "n": args.n, "statistic": args.statistic,
                                "mean": str(d.mean) if args.exact else d.mean,
                                "variance": str(d.variance) if args.exact else d.variance,
                                "distribution": {str(v): (str(p) if args.exact else p)
                                                 for v, p in d.probabilities.items()}}, indent=2))
    return EXIT_OK


def cmd_experiment(args) -> int:
    seq = _family(args.family)
    coupling = None
    if args.coupling:
        if args.coupling == cp.URT_MK:
            if args.m is None or float(args.m) != int(float(args.m)):
                raise UsageError("urt-mk needs a positive integer --m")
            coupling = CouplingSpec(cp.URT_MK, k=args.k, m=int(float(args.m)))
        else:
            coupling = CouplingSpec(cp.HOPPE_WRT, k=cp.resolve_split_size(seq, args.k), seq=seq)
    seed = _seed(args) if args.mode == "montecarlo" else (args.seed or 0)
    cfg = ExperimentConfig(args.statistic, seq, args.n, args.reps, seed, mode=args.mode,
                           t_grid=tuple(_floats(args.t_grid or "")),
                           cdf_points=tuple(_floats(args.cdf_points or "")),
                           coupling=coupling, threads=args.threads, allow_large=args.allow_large)
    report = run_experiment(cfg)
    if args.format == "csv":
        _emit(args, report.tail_csv() if args.table == "tail" else report.cdf_csv())
    else:
        _emit(args, report.to_json())
    return EXIT_OK if all(c["pass"] for c in report.checks) else EXIT_FAIL


def cmd_formula(args) -> int:
    seq = _family(args.family)
    q, n = args.quantity, args.n
    if q == "depth":
        p = F.depth_moments(seq, n)
        out = {"mean": p.mean, "variance": p.variance}
    elif q == "branches":
        p = F.branch_moments(seq, n)
        out = {"mean": p.mean, "variance": p.variance,
               "wasserstein_bound": F.wasserstein_normal_bound(p.variance)}
    elif q == "leaves":
        out = {"mean": F.leaf_expectation(seq, n)}
        if seq.family == "thetak":
            out["theta_k_closed_form"] = F.theta_k_leaves_exact(seq.theta, seq.k, n)
        if seq.constancy_index is not None:
            b = F.wrt_leaf_mean_bounds(seq, n)
            out["mean_bounds"] = [b.lo, b.hi]
    elif q == "concentration":
        if args.t is None:
            raise UsageError("concentration needs --t")
        out = {"t": args.t, "bound": F.leaf_concentration_bound(seq, n, args.t)}
    else:
        out = {"mean_leading_terms": F.height_expectation_asymptotic(n)}
    _emit(args, json.dumps({"family": seq.spec, "n": n, "quantity": q, **out}))
    return EXIT_OK


def cmd_verify(args) -> int:
    kwargs = {"threads": args.threads}
    for name in ("family", "n", "reps", "mode"):
        value = getattr(args, name)
        if value is not None:
            kwargs[name] = value
    if args.mode != "enumerate":
        kwargs["seed"] = _seed(args)
    result = THEOREMS[args.theorem](**kwargs)
    for line in result.lines():
        print(line, file=sys.stderr)
    _emit(args, result.to_csv() if args.format == "csv" else result.to_json())
    return EXIT_OK if result.passed else EXIT_FAIL


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wrtree", description="Weighted recursive trees: "
                                 "generation, couplings, permutations and verification.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, formats=("json", "csv"), default="json"):
        p.add_argument("--seed", type=int, help="root seed; drawn from entropy when omitted")
        p.add_argument("--format", choices=formats, default=default)
        p.add_argument("--out", help="write to this file instead of stdout")
        p.add_argument("--threads", type=_positive_int, default=1)

    p = sub.add_parser("gen", help="generate one tree")
    p.add_argument("--family", required=True)
    p.add_argument("--n", type=_positive_int, required=True)
    common(p, ("text", "json", "csv"), "text")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("stats", help="statistics of a tree file")
    p.add_argument("tree")
    common(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("couple", help="one coupled source/target pair")
    p.add_argument("kind", choices=(cp.URT_MK, cp.HOPPE_WRT))
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--m", type=float)
    p.add_argument("--k", type=_positive_int)
    p.add_argument("--family")
    common(p)
    p.set_defaults(func=cmd_couple)

    p = sub.add_parser("ewens", help="sample a Hoppe permutation of {2..n}")
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    common(p, ("text", "json"), "text")
    p.set_defaults(func=cmd_ewens)

    p = sub.add_parser("bijection", help="convert between tree and permutation files")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--to-tree", metavar="PERM_FILE")
    g.add_argument("--to-perm", metavar="TREE_FILE")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bijection)

    p = sub.add_parser("enumerate", help="exact law of a statistic by enumeration")
    p.add_argument("--family", required=True)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--statistic", choices=STATISTICS, required=True)
    p.add_argument("--exact", action="store_true", help="rational arithmetic")
    p.add_argument("--allow-large", action="store_true")
    common(p)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("experiment", help="Monte Carlo or enumeration experiment report")
    p.add_argument("--statistic", choices=STATISTICS, required=True)
    p.add_argument("--family", required=True)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--reps", type=_positive_int, default=1000)
    p.add_argument("--mode", choices=("montecarlo", "enumerate"), default="montecarlo")
    p.add_argument("--t-grid", help="comma-separated deviations for the leaf tail table")
    p.add_argument("--cdf-points", help="comma-separated points for the empirical CDF")
    p.add_argument("--coupling", choices=(cp.URT_MK, cp.HOPPE_WRT))
    p.add_argument("--m", type=float)
    p.add_argument("--k", type=_positive_int)
    p.add_argument("--table", choices=("cdf", "tail"), default="cdf", help="table emitted with --format csv")
    p.add_argument("--allow-large", action="store_true")
    common(p)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("formula", help="closed-form predictions")
    p.add_argument("quantity", choices=("depth", "branches", "leaves", "concentration", "height"))
    p.add_argument("--family", default="uniform")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--t", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_formula)

    p = sub.add_parser("verify", help="run a verification experiment")
    p.add_argument("theorem", choices=sorted(THEOREMS))
    p.add_argument("--family")
    p.add_argument("--n", type=_positive_int)
    p.add_argument("--reps", type=_positive_int)
    p.add_argument("--mode", choices=("montecarlo", "enumerate"))
    common(p)
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
    except WeightTableExhausted as exc:
        print(f"error: {exc}", file=sys.stderr)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_USAGE
