"""Command line front end: ``haarmult <subcommand> [flags]``.

Output is JSON on stdout unless ``--out`` names a file.  ``--format csv``
(or an ``--out`` path ending in ``.csv``) switches to CSV; ``--pretty``
prints an aligned table instead.  Relative ``--out`` paths are resolved
against ``$HAARMULT_OUTPUT_DIR`` when it is set.

Exit codes: 0 success, 1 domain error, 2 I/O or parse error, 64 usage.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import io as hio
from .decomposition import AtomicDecomposition, IntervalAtom, certify, decompose, reconstruct, verify_atom
from .dyadic import apply_multiplier, conditional_expectation, haar_forward, haar_inverse, haar_projection
from .opnorm import (ExperimentConfig, alternating_multiplier, duality_check, even_levels_multiplier,
                     exact_opnorm_l2, growth_experiment, lower_bound_opnorm)
from .spaces import SpaceParams, classify_record, region_diagram, tl_norm
from .variation import MultiplierSequence, family_profile, running_variation, u_variation, vu_norm

OUTPUT_DIR_ENV = "HAARMULT_OUTPUT_DIR"
EXIT_OK, EXIT_DOMAIN, EXIT_IO, EXIT_USAGE = 0, 1, 2, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise UsageError(message)


# ---------------------------------------------------------------------------
# result containers: each handler returns a Result


class Result:
    """A JSON payload plus an optional CSV table (header, rows)."""

    def __init__(self, payload, table=None):
        self.payload = payload
        self.table = table

    def csv_text(self) -> str:
        if self.table is None:
            if not isinstance(self.payload, dict):
                header, rows = ["value"], [[self.payload]]
            else:
                header = ["key", "value"]
                rows = [[k, v if not isinstance(v, (dict, list)) else json.dumps(hio._clean(v))]
                        for k, v in hio._clean(self.payload).items()]
        else:
            header, rows = self.table
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v) for v in row])
        return buf.getvalue()

    def pretty_text(self) -> str:
        if self.table is not None:
            header, rows = self.table
            cells = [list(map(str, header))] + [[_fmt(v) for v in row] for row in rows]
        elif isinstance(self.payload, dict):
            cells = [[k, _fmt(v)] for k, v in hio._clean(self.payload).items()]
        else:
            return _fmt(self.payload) + "\n"
        widths = [max(len(r[i]) for r in cells) for i in range(len(cells[0]))]
        return "".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() + "\n" for r in cells)


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, (dict, list)):
        return json.dumps(hio._clean(v))
    return str(v)


def _grid_result(f) -> Result:
    return Result({"J": f.J, "samples": f.samples.tolist()},
                  (["sample"], [[v] for v in f.samples.tolist()]))


def _params(args) -> SpaceParams:
    return SpaceParams(args.s, args.p, args.q)


def _multiplier(args) -> MultiplierSequence:
    if getattr(args, "values", None):
        return MultiplierSequence([float(v) for v in args.values.split(",")])
    if getattr(args, "family", None):
        size = args.size if args.size is not None else args.J
        return {"alternating": alternating_multiplier, "even": even_levels_multiplier}[args.family](size)
    if getattr(args, "multiplier", None):
        return hio.read_sequence(args.multiplier)
    raise UsageError("a multiplier is required (--multiplier, --values or --family)")


def _config(args) -> ExperimentConfig:
    return ExperimentConfig(J=args.J, trials=args.trials, iterations=args.iterations, seed=args.seed,
                            coords_per_step=args.coords_per_step, random_coords=args.random_coords,
                            workers=args.workers)


# ---------------------------------------------------------------------------
# handlers


def cmd_haar(args):
    if args.direction == "forward":
        c = haar_forward(hio.read_grid(args.input))
        rows = [[-1, 0, c.mean]] + [[j, mu, float(v)] for j, d in enumerate(c.details)
                                    for mu, v in enumerate(np.asarray(d).tolist())]
        return Result(c.to_dict(), (["level", "index", "coefficient"], rows))
    return _grid_result(haar_inverse(hio.read_coefficients(args.input)))


def cmd_expect(args):
    return _grid_result(conditional_expectation(hio.read_grid(args.input), args.level))


def cmd_project(args):
    return _grid_result(haar_projection(hio.read_grid(args.input), args.level))


def cmd_apply(args):
    f = hio.read_grid(args.input)
    args.J = f.J
    return _grid_result(apply_multiplier(f, _multiplier(args)))


def cmd_variation(args):
    m = _multiplier(args)
    if args.running:
        w = running_variation(m, args.u) ** (1.0 / args.u)
        return Result({"u": args.u, "running": w.tolist()}, (["n", "variation"], list(enumerate(w.tolist()))))
    if args.norm:
        return Result(vu_norm(m, args.u))
    return Result(u_variation(m, args.u))


def cmd_profile(args):
    ns, prof = family_profile(args.kind, args.alpha, args.u, args.N)
    return Result({"kind": args.kind, "alpha": args.alpha, "u": args.u, "n": ns.tolist(),
                   "variation": prof.tolist()},
                  (["n", "variation"], [[int(n), float(v)] for n, v in zip(ns, prof)]))


def cmd_decompose(args):
    m = _multiplier(args)
    dec = decompose(m, args.u, args.epsilon, args.levels)
    if args.certify:
        if args.seed is None:
            raise UsageError("--certify needs --seed")
        dec.certificates = certify(m, dec, sigma=args.sigma, n_pairs=args.pairs, seed=args.seed)
    return Result(dec.to_dict())


def _read_decomposition(path) -> AtomicDecomposition:
    data = hio.read_json(path)
    try:
        return AtomicDecomposition.from_dict(data)
    except (KeyError, TypeError) as exc:
        raise hio.FormatError(f"{path}: {exc}") from exc


def cmd_reconstruct(args):
    dec = _read_decomposition(args.input)
    N = args.N if args.N is not None else dec.length
    m = reconstruct(dec, N)
    return Result(m.to_dict(), (["n", "value"], list(enumerate(m.values.tolist()))))


def cmd_verify(args):
    data = hio.read_json(args.input)
    if isinstance(data, dict) and "intervals" in data:
        try:
            atom = IntervalAtom.from_dict(data)
        except (KeyError, TypeError) as exc:
            raise hio.FormatError(f"{args.input}: {exc}") from exc
        rep = verify_atom(atom)
        return Result({"passed": rep.passed, "disjoint": rep.disjoint, "norm": rep.norm,
                       "u_class": rep.u_class, "reason": rep.reason})
    dec = _read_decomposition(args.input)
    if args.sequence is None:
        reports = [verify_atom(a) for _, a in dec.terms]
        return Result({"atoms": len(reports), "atoms_valid": all(r.passed for r in reports),
                       "max_atom_norm": max((r.norm for r in reports), default=0.0)})
    m = hio.read_sequence(args.sequence)
    return Result(certify(m, dec, sigma=args.sigma, n_pairs=args.pairs, seed=args.seed))


def cmd_norm(args):
    f = hio.read_grid(args.input)
    return Result({**_params(args).as_dict(), "J": f.J, "norm": tl_norm(f, _params(args))})


def cmd_classify(args):
    return Result(classify_record(_params(args)))


def cmd_diagram(args):
    regions = region_diagram(args.q, args.resolution)
    rows = []
    for reg in regions:
        for kind in ("vertex", "point"):
            for i, (x, y) in enumerate(reg["vertices"] if kind == "vertex" else reg["points"]):
                rows.append([reg["label"], kind, i, float(x), float(y)])
    return Result({"q": args.q, "regions": regions}, (["region", "kind", "index", "inv_p", "s"], rows))


def cmd_opnorm(args):
    m = _multiplier(args)
    params = _params(args)
    if args.exact:
        if params.p != 2 or params.q != 2:
            raise ValueError("--exact needs p = q = 2")
        rep = exact_opnorm_l2(m, params.s, args.J, weight=args.weight)
    else:
        rep = lower_bound_opnorm(m, params, _config(args))
    return Result(rep.to_dict(with_witness=args.with_witness))


def cmd_growth(args):
    sizes = [int(v) for v in args.sizes.split(",")]
    res = growth_experiment(_params(args), args.family, sizes, args.J, _config(args),
                            scale=args.scale, sep=args.sep)
    rows = [[r["size"], r["value"], r["kind"], r["seed"]] for r in res["rows"]]
    return Result(res, (["size", "value", "kind", "seed"], rows))


def cmd_duality(args):
    return Result(duality_check(_multiplier(args), _params(args), _config(args)))


# ---------------------------------------------------------------------------
# parser


def _add_output(p):
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=("json", "csv"), help="output format (default: json, or csv for *.csv)")
    p.add_argument("--pretty", action="store_true", help="human readable table")


def _add_params(p):
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--q", type=float, required=True)


def _add_multiplier(p):
    p.add_argument("--multiplier", help="multiplier file (JSON or CSV)")
    p.add_argument("--values", help="comma separated multiplier values")
    p.add_argument("--family", choices=("alternating", "even"))
    p.add_argument("--size", type=int, help="family length (default: J)")


def _add_search(p, seed_required=True):
    p.add_argument("--J", type=int, default=8)
    p.add_argument("--seed", type=int, required=seed_required)
    p.add_argument("--trials", type=int, default=32)
    p.add_argument("--iterations", type=int, default=200)
    p.add_argument("--coords-per-step", type=int, default=8)
    p.add_argument("--random-coords", type=int, default=4)
    p.add_argument("--workers", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="haarmult", description="Haar multipliers on dyadic function spaces.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("haar", help="Haar transform of a grid function")
    p.add_argument("--direction", choices=("forward", "inverse"), default="forward")
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_haar)

    for name, func, helptext in (("expect", cmd_expect, "conditional expectation E_N"),
                                 ("project", cmd_project, "frequency projection D_j")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--input", required=True)
        p.add_argument("--level", type=int, required=True)
        p.set_defaults(func=func)

    p = sub.add_parser("apply", help="apply T_m to a grid function")
    p.add_argument("--input", required=True)
    _add_multiplier(p)
    p.set_defaults(func=cmd_apply)

    p = sub.add_parser("variation", help="u-variation of a sequence")
    p.add_argument("--input", dest="multiplier", required=False)
    p.add_argument("--values")
    p.add_argument("--u", type=float, required=True)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--norm", action="store_true", help="print the V_u norm instead")
    g.add_argument("--running", action="store_true", help="variation over [0, n] for every n")
    p.set_defaults(func=cmd_variation)

    p = sub.add_parser("profile", help="truncated variations of a power family")
    p.add_argument("--kind", choices=("power", "alternating-power"), required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--u", type=float, required=True)
    p.add_argument("--N", type=int, required=True)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("decompose", help="atomic decomposition of a sequence")
    p.add_argument("--input", dest="multiplier")
    p.add_argument("--values")
    p.add_argument("--u", type=float, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--levels", type=int, default=14, help="dyadic levels of the path (J_rho)")
    p.add_argument("--certify", action="store_true")
    p.add_argument("--seed", type=int)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--pairs", type=int, default=10_000)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("reconstruct", help="sequence from a decomposition")
    p.add_argument("--input", required=True)
    p.add_argument("--N", type=int)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("verify", help="check an atom or a decomposition")
    p.add_argument("--input", required=True)
    p.add_argument("--sequence", help="original sequence: run every certificate")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--pairs", type=int, default=10_000)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("norm", help="discrete Triebel-Lizorkin norm")
    p.add_argument("--input", required=True)
    _add_params(p)
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("classify", help="parameter regions and thresholds")
    _add_params(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("diagram", help="region boundaries in the (1/p, s) plane")
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--resolution", type=int, default=1)
    p.set_defaults(func=cmd_diagram)

    p = sub.add_parser("opnorm", help="operator norm of T_m")
    _add_params(p)
    _add_multiplier(p)
    _add_search(p, seed_required=False)
    p.add_argument("--exact", action="store_true", help="exact value (p = q = 2 only)")
    p.add_argument("--weight", choices=("tl", "sobolev"), default="tl")
    p.add_argument("--with-witness", action="store_true")
    p.set_defaults(func=cmd_opnorm)

    p = sub.add_parser("growth", help="norm growth across a multiplier family")
    _add_params(p)
    p.add_argument("--family", choices=("alternating", "even", "separated"), required=True)
    p.add_argument("--sizes", required=True, help="comma separated sizes")
    p.add_argument("--sep", type=int, default=2)
    p.add_argument("--scale", type=float, default=1.0)
    _add_search(p)
    p.set_defaults(func=cmd_growth)

    p = sub.add_parser("duality", help="compare norms at (s,p,q) and the dual triple")
    _add_params(p)
    _add_multiplier(p)
    _add_search(p)
    p.set_defaults(func=cmd_duality)

    for p in sub.choices.values():
        _add_output(p)
    return parser


def _emit(args, result: Result) -> None:
    fmt = args.format
    if fmt is None:
        fmt = "csv" if args.out and args.out.lower().endswith(".csv") else "json"
    if args.pretty:
        text = result.pretty_text()
    elif fmt == "csv":
        text = result.csv_text()
    else:
        text = hio.dumps(result.payload)
    if not args.out:
        sys.stdout.write(text)
        return
    path = Path(args.out)
    if not path.is_absolute() and os.environ.get(OUTPUT_DIR_ENV):
        path = Path(os.environ[OUTPUT_DIR_ENV]) / path
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError:
        return EXIT_USAGE
    try:
        if args.command == "opnorm" and not args.exact and args.seed is None:
            raise UsageError("opnorm needs --seed unless --exact is given")
        _emit(args, args.func(args))
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"haarmult {args.command}: error: {exc}\n")
        return EXIT_USAGE
    except (OSError, hio.FormatError) as exc:
        sys.stderr.write(f"haarmult: {exc}\n")
        return EXIT_IO
    except (ValueError, MemoryError) as exc:
        sys.stderr.write(f"haarmult: {exc}\n")
        return EXIT_DOMAIN
    return EXIT_OK


def main() -> None:
    sys.exit(run())
