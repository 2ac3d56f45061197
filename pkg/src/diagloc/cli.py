"""Command line interface.

Exit codes: 0 success, 1 usage error, 2 invalid input file, 3 infeasible
search, 4 a verification found violations.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

from . import bounds, gallery
from .algebra import BitVector
from .diagform import (
    form_of,
    metrics,
    parse_form,
    parse_spectrum,
    serialize_form,
    serialize_spectrum,
    spectrum_of,
)
from .errors import InfeasibleSearch, InvalidInput
from .groupring import LEMMAS, verify_suite
from .localize import (
    CURVE_HEADER,
    STRATEGIES,
    AnnealParams,
    Objective,
    affine_localize,
    anneal_search,
    check_local_map,
    exhaustive_search,
    generic_vector_check,
    localizability_curve,
)
from .perms import conjugate_form, parse_permutation, permute_spectrum, random_permutation

SEED_ENV = "DIAGLOC_SEED"

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_VIOLATION = 0, 1, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InvalidInput(exc.strerror or str(exc)) from None


def _load(path: str, parser):
    try:
        return parser(_read(path))
    except InvalidInput as exc:
        raise InvalidInput(f"{path}: {exc}") from None


def _emit(args, text: str):
    if args.output and args.output != "-":
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=1) + "\n"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV, "0")
    try:
        return int(raw)
    except ValueError:
        raise InvalidInput(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _parse_k_range(text: str) -> range:
    lo, sep, hi = text.partition("..")
    try:
        return range(int(lo), int(hi) + 1) if sep else range(int(lo), int(lo) + 1)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a..b, got {text!r}") from None


def _parse_mass(text: str):
    label, sep, kg = text.partition("=")
    try:
        return label, float(kg) if sep else float(label)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected label=kg, got {text!r}") from None


def _spectrum_input(args):
    if args.form:
        return spectrum_of(_load(args.form, parse_form))
    if args.spectrum:
        return _load(args.spectrum, parse_spectrum)
    raise InvalidInput("give --form or --spectrum")


# ---------------------------------------------------------------------------


def cmd_analyze(args):
    form = _load(args.form, parse_form)
    if args.perm:
        form = conjugate_form(_load(args.perm, parse_permutation), form)
    met = metrics(form)
    if args.format == "csv":
        d = met.to_dict()
        return _csv(list(d), [[repr(v) if isinstance(v, float) else v for v in d.values()]])
    return _json(met.to_dict())


def cmd_spectrum(args):
    if args.to_form:
        spec = _load(args.spectrum, parse_spectrum) if args.spectrum else None
        if spec is None:
            raise InvalidInput("--to-form needs --spectrum")
        if args.perm:
            spec = permute_spectrum(_load(args.perm, parse_permutation), spec)
        return serialize_form(form_of(spec), "text" if args.format == "csv" else "json")
    spec = _spectrum_input(args)
    if args.perm:
        spec = permute_spectrum(_load(args.perm, parse_permutation), spec)
    return serialize_spectrum(spec, args.format)


def cmd_search(args):
    spec = _spectrum_input(args)
    objective = Objective.parse(args.objective)
    if args.strategy == "exhaustive":
        out = exhaustive_search(spec, objective)
    elif args.strategy == "affine":
        out = affine_localize(form_of(spec))
        out.objective_value = objective.value(out.best_form)
    else:
        params = AnnealParams(args.iters, args.t0, args.cooling, args.restarts)
        out = anneal_search(spec, objective, params, seed=args.seed)
    doc = {"objective": str(objective), **out.to_dict()}
    if args.format == "csv":
        keys = ["strategy", "objective", "objective_value", "nnz", "locality", "evaluations"]
        return _csv(keys, [[doc[k] for k in keys]])
    return _json(doc)


def cmd_check_map(args):
    perm = _load(args.perm, parse_permutation)
    try:
        S = [BitVector.from_str(s).bits for s in args.set.split(",") if s.strip()]
    except InvalidInput as exc:
        raise InvalidInput(f"--set: {exc}") from None
    local = check_local_map(perm, S, args.m)
    doc = {"n": perm.n, "S": [format(J, f"0{perm.n}b") for J in S], "m": args.m, "local": local}
    if args.generic:
        doc["generic"] = generic_vector_check(perm, S, args.m, seed=args.seed)
    if args.format == "csv":
        return _csv(list(doc), [[";".join(v) if isinstance(v, list) else v for v in doc.values()]])
    return _json(doc)


def _perm_source(n: int, spec: str, seed: int):
    from itertools import permutations
    from .perms import TablePermutation
    if spec == "all":
        if n > 3:
            raise InfeasibleSearch("--perms all is limited to n <= 3")
        return (TablePermutation(t) for t in permutations(range(1 << n)))
    head, _, count = spec.partition(":")
    if head != "random" or not count.isdigit():
        raise InvalidInput(f"--perms must be 'all' or 'random:<N>', got {spec!r}")
    return (random_permutation(n, [seed, i]) for i in range(int(count)))


def cmd_verify_lemmas(args):
    lemma_ids = LEMMAS if not args.lemmas else tuple(s.strip() for s in args.lemmas.split(","))
    if not 1 <= args.n <= 5:
        raise InvalidInput("--n must be in [1, 5]")
    reports = verify_suite(_perm_source(args.n, args.perms, args.seed), lemma_ids)
    args._failed = any(not r.passed for r in reports.values())
    if args.format == "json":
        return _json({lid: r.to_dict() for lid, r in reports.items()})
    width = max(len(lid) for lid in reports)
    lines = [f"{'lemma':<{width}}  {'instances':>10}  {'violations':>10}  result"]
    for lid, r in reports.items():
        lines.append(f"{lid:<{width}}  {r.instances_checked:>10}  {len(r.violations):>10}  "
                     f"{'PASS' if r.passed else 'FAIL'}")
    return "\n".join(lines) + "\n"


def cmd_bounds(args):
    chains = [bounds.bound_chain(m) for m in range(args.m_min, args.m_max + 1)]
    if args.format == "json":
        return _json([{"m": c.m, "A": c.A, "B": c.B, "D": c.D, "E": c.E,
                       "E_bitlength": c.E.bit_length(), "log2_G": bounds.format_log2(c.log2_G),
                       "closed_form_ok": c.E == bounds.closed_form_exponent(c.m)} for c in chains])
    return bounds.bounds_csv(chains, with_e=args.with_e)


def cmd_cosmic(args):
    masses = args.mass or bounds.DEFAULT_MASSES
    table = bounds.cosmic_table(range(1, args.m_max + 1), masses)
    for note in table.notes:
        print(f"note: {note}", file=sys.stderr)
    if args.figure:
        from .plotting import plot_cosmic
        plot_cosmic(table, args.figure)
    return _json(table.to_dict()) if args.format == "json" else table.to_csv()


def cmd_montecarlo(args):
    params = AnnealParams(args.iters, args.t0, args.cooling, args.restarts)
    points = localizability_curve(args.n, args.m, args.k_range, args.trials,
                                  args.strategy, args.seed, params)
    if args.figure:
        from .plotting import plot_curve
        plot_curve(points, args.figure, w=args.w,
                   title=f"n={args.n}, m={args.m}, {args.strategy}, {args.trials} trials")
    if args.format == "json":
        doc = {"n": args.n, "m": args.m, "strategy": args.strategy, "seed": args.seed,
               "points": [dict(zip(CURVE_HEADER, p.row())) for p in points]}
        if args.w is not None:
            doc["w"] = args.w
        return _json(doc)
    return _csv(CURVE_HEADER, [p.row() for p in points])


def cmd_examples(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, form in gallery.build().items():
        for fmt, ext in (("json", "json"), ("text", "txt")):
            path = out / f"{name}.{ext}"
            path.write_text(serialize_form(form, fmt))
            written.append(str(path))
    (out / "cnot_chain.json").write_text(_json(gallery.cnot_chain().to_dict()))
    (out / "first_two_swap.json").write_text(_json(gallery.first_two_swap().to_dict()))
    written += [str(out / "cnot_chain.json"), str(out / "first_two_swap.json")]
    spectra = {name: spectrum_of(f).sorted_values() for name, f in gallery.build().items()}
    same = len({tuple(v) for v in spectra.values()}) == 1
    return _json({"written": written, "spectra_match": same})


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None,
                        help=f"random seed (default: ${SEED_ENV} or 0)")
    common.add_argument("-o", "--output", default=None, help="output path (default: stdout)")
    common.add_argument("--format", choices=("json", "csv"), default=None)

    p = _Parser(prog="diagloc", description="Diagonal forms under eigenbasis permutations.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, fmt, **kw):
        sp = sub.add_parser(name, parents=[common], **kw)
        sp.set_defaults(func=func, default_format=fmt)
        return sp

    sp = add("analyze", cmd_analyze, "json", help="nnz, locality, entropy and nnz lower bound")
    sp.add_argument("--form", required=True)
    sp.add_argument("--perm", help="conjugate by this permutation first")

    sp = add("spectrum", cmd_spectrum, "json", help="spectrum of a form, or the form of a spectrum")
    sp.add_argument("--form")
    sp.add_argument("--spectrum")
    sp.add_argument("--perm", help="permute the spectrum")
    sp.add_argument("--to-form", action="store_true", help="output the form of --spectrum")

    sp = add("search", cmd_search, "json", help="search permutations for a sparse/local form")
    sp.add_argument("--form")
    sp.add_argument("--spectrum")
    sp.add_argument("--strategy", choices=("exhaustive", "affine", "anneal"), default="anneal")
    sp.add_argument("--objective", default="nnz", help="nnz | locality | locality:<m>")
    _anneal_args(sp)

    sp = add("check-map", cmd_check_map, "json", help="column locality test for a permutation")
    sp.add_argument("--perm", required=True)
    sp.add_argument("--set", required=True, help="comma separated masks, e.g. 001,110")
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--generic", action="store_true", help="also run the random-vector check")

    sp = add("verify-lemmas", cmd_verify_lemmas, "table", help="finite-instance lemma checks")
    sp.add_argument("--n", type=int, default=3)
    sp.add_argument("--perms", default="all", help="all | random:<N>")
    sp.add_argument("--lemmas", help=f"comma separated subset of {', '.join(LEMMAS)}")

    sp = add("bounds", cmd_bounds, "csv", help="the A_m .. G_m bound chain")
    sp.add_argument("--m-min", type=int, default=1)
    sp.add_argument("--m-max", type=int, default=12)
    sp.add_argument("--with-e", action="store_true", help="append the exact exponent E")

    sp = add("cosmic", cmd_cosmic, "csv", help="compare log2 G_m with black-hole entropies")
    sp.add_argument("--m-max", type=int, default=12)
    sp.add_argument("--mass", type=_parse_mass, action="append", help="label=kg (repeatable)")
    sp.add_argument("--figure", help="also render a figure to this path")

    sp = add("montecarlo", cmd_montecarlo, "csv", help="localizability of random sparse forms")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--k-range", type=_parse_k_range, required=True, help="a..b")
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--strategy", choices=STRATEGIES, default="affine")
    sp.add_argument("--w", type=float, help="mark k = 2^w on the figure")
    sp.add_argument("--figure", help="also render a figure to this path")
    _anneal_args(sp, iters=500, restarts=1)

    sp = add("examples", cmd_examples, "json", help="write the gallery fixtures")
    sp.add_argument("--out", required=True)
    return p


def _anneal_args(sp, iters=2000, restarts=2):
    sp.add_argument("--iters", type=int, default=iters)
    sp.add_argument("--t0", type=float, default=1.0)
    sp.add_argument("--cooling", type=float, default=0.995)
    sp.add_argument("--restarts", type=int, default=restarts)


def dispatch(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.seed is None:
            args.seed = _default_seed()
        if args.format is None:
            args.format = args.default_format
        args._failed = False
        text = args.func(args)
        _emit(args, text)
    except InfeasibleSearch as exc:
        print(f"diagloc: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except InvalidInput as exc:
        print(f"diagloc: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_VIOLATION if args._failed else EXIT_OK


def main():
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
