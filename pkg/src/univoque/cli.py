"""Command-line front end: ``univoque {alpha,tree,dim,staircase,oracle}``."""
from __future__ import annotations

import argparse
import csv
import json
import os
import re
import sys
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .dimension import Side, dj_function, interval_dim, local_dim
from .entropy import (
    DEFAULT_TOL,
    EmptySubshift,
    TooLarge,
    brute_counts,
    build_sft,
    count_blocks_matrix,
    entropy_H,
    entropy_HJ,
)
from .expansion import (
    DEFAULT_PRECISION,
    BaseEnclosure,
    PrecisionExhausted,
    RationalInterval,
    base_from_alpha,
    komornik_loreti,
    quasi_greedy_alpha,
)
from .phimap import NotInPlateau
from .plateaux import (
    PlateauTree,
    UndecidableAtPrecision,
    children,
    children_direct,
    node_record,
    write_cache,
)
from .words import Alphabet, Word, eventually_periodic, format_digits, parse_digits, periodic

EXIT_OK, EXIT_PARSE, EXIT_PRECISION, EXIT_MISMATCH = 0, 2, 3, 4
PRECISION_ENV = "UNIVOQUE_PRECISION_BITS"


class QSpecError(ValueError):
    pass


@dataclass(frozen=True)
class Config:
    M: int = 1
    precision_bits: int = DEFAULT_PRECISION
    depth: int = 6
    max_word_len: int = 8
    tol: Fraction = DEFAULT_TOL
    cache_path: str | None = None
    output_format: str = "human"

    def __post_init__(self):
        if min(self.M, self.precision_bits, self.depth, self.max_word_len) <= 0 or self.tol <= 0:
            raise QSpecError("configuration values must be positive")
        if self.tol < Fraction(1, 2 ** self.precision_bits):
            raise QSpecError("tol is finer than the working precision")

    def tree(self) -> PlateauTree:
        return PlateauTree(self.M, self.max_word_len, self.max_word_len, self.precision_bits)


# ---------------------------------------------------------------------------
# base specifications

_SEQ = re.compile(r"^(?:pre\((?P<pre>[0-9,]*)\))?per\((?P<per>[0-9,]+)\)$")
_NODE = re.compile(r"^(?P<point>qL|qR|qc|qG|qF):(?P<path>[0-9.]+)$")
_NODE_POINTS = {"qL": "q_L", "qR": "q_R", "qc": "q_c", "qG": "q_G", "qF": "q_F"}


def parse_sequence(text: str, M: int):
    m = _SEQ.match(text.strip())
    if not m:
        raise QSpecError(f"cannot parse sequence spec {text!r}; use per(..) or pre(..)per(..)")
    pre = parse_digits(m.group("pre")) if m.group("pre") else ()
    per = parse_digits(m.group("per"))
    if max(pre + per) > M:
        raise QSpecError(f"digit larger than M={M} in {text!r}")
    return eventually_periodic(pre, per, M) if pre else periodic(per, M)


def parse_q(text: str, config: Config, tree: PlateauTree | None = None) -> BaseEnclosure:
    """Decimal literal, ``golden``, ``kl``, ``alpha:<seq>``, a bare sequence spec, or ``qR:<path>``."""
    text = text.strip()
    M, bits = config.M, config.precision_bits
    if text == "kl":
        return komornik_loreti(M, bits)
    if text == "golden":
        if M != 1:
            raise QSpecError("golden is defined for M = 1")
        return base_from_alpha(periodic((1, 0), 1), bits)
    if text.startswith("alpha:"):
        return base_from_alpha(parse_sequence(text[len("alpha:"):], M), bits)
    if text.startswith(("per(", "pre(")):
        return base_from_alpha(parse_sequence(text, M), bits)
    node_match = _NODE.match(text)
    if node_match:
        tree = tree or config.tree()
        try:
            node = tree.node(node_match.group("path"))
        except KeyError as exc:
            raise QSpecError(str(exc)) from None
        point = getattr(node, _NODE_POINTS[node_match.group("point")])
        if point is None:
            raise QSpecError(f"node {node.label} has no {node_match.group('point')}")
        return point
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise QSpecError(f"cannot parse base {text!r}") from None
    if not 1 < value <= M + 1:
        raise QSpecError(f"base {text} outside (1, {M + 1}]")
    return BaseEnclosure(Alphabet(M), RationalInterval.point(value), None, bits)


# ---------------------------------------------------------------------------
# output


def _emit(config: Config, rows: list[dict], human: list[str], out) -> None:
    if config.output_format == "json":
        for r in rows:
            out.write(json.dumps(r, sort_keys=True) + "\n")
    elif config.output_format == "csv":
        if rows:
            w = csv.DictWriter(out, fieldnames=list(rows[0]), lineterminator="\n")
            w.writeheader()
            w.writerows(rows)
    else:
        for line in human:
            out.write(line + "\n")


# ---------------------------------------------------------------------------
# commands


def cmd_alpha(config: Config, args, out) -> int:
    q = parse_q(args.q, config)
    digits = quasi_greedy_alpha(q, args.n)
    text = format_digits(digits.digits, config.M)
    _emit(config, [{"q": str(q), "alpha": text, "precision_bits": q.precision_bits}],
          [text], out)
    return EXIT_OK


def cmd_tree(config: Config, args, out) -> int:
    tree = config.tree()
    tree.expand(args.levels)
    nodes = tree.built_nodes()
    if args.window:
        lo, hi = (Fraction(t) for t in args.window)
        nodes = [n for n in nodes if n.is_root or (n.q_R.hi >= lo and (n.q_L is None or n.q_L.lo <= hi))]
    records = [node_record(n) for n in nodes]
    if config.cache_path:
        write_cache(tree, config.cache_path)
    rows = [dict(zip(("path", "word", "q_L", "q_R", "q_c", "q_G", "q_F", "kind"), r.split("\t"))) for r in records]
    _emit(config, rows, records, out)
    return EXIT_OK


def cmd_dim(config: Config, args, out) -> int:
    tree = config.tree()
    if args.interval:
        t1, t2 = (parse_q(t, config, tree) for t in args.interval)
        value = interval_dim(tree, t1, t2, config.tol, config.depth)
        label = f"[{args.interval[0]}, {args.interval[1]}]"
    else:
        q = parse_q(args.q, config, tree)
        value = local_dim(tree, q, Side(args.side), config.tol, config.depth)
        label = args.q
    row = {"q": label, "lo": float(value.lo), "hi": float(value.hi), "basis": value.basis.value,
           "plateau": value.plateau.label if value.plateau is not None else "", "note": value.note}
    _emit(config, [row], [str(value)], out)
    return EXIT_OK


def staircase_rows(config: Config, which: str, t1: Fraction | None, t2: Fraction | None, grid_n: int) -> list[dict]:
    if grid_n < 2:
        raise QSpecError("grid needs at least two points")
    tree = config.tree()
    node = None
    kind = which
    if ":" in which:
        kind, path = which.split(":", 1)
        node = tree.node(path)
    if kind not in ("H", "HJ", "f", "DJ"):
        raise QSpecError(f"unknown staircase {which!r}")
    if kind in ("HJ", "DJ") and node is None:
        raise QSpecError(f"{kind} needs a node path, e.g. {kind}:18")
    if t1 is None or t2 is None:
        if node is None:
            t1, t2 = Fraction(1) + Fraction(1, 100), Fraction(config.M + 1)
        else:
            t1 = node.q_L.hi if node.q_L is not None else Fraction(1)
            t2 = node.q_R.lo
    rows = []
    for i in range(grid_n):
        qv = t1 + (t2 - t1) * i / (grid_n - 1)
        q = BaseEnclosure.exact(qv, config.M)
        if kind == "H":
            v = entropy_H(tree, q, config.tol).value
        elif kind == "HJ":
            try:
                v = entropy_HJ(tree, node, q, config.tol).value
            except NotInPlateau:
                continue
        elif kind == "DJ":
            try:
                v = dj_function(tree, node, q, config.tol).value
            except NotInPlateau:
                continue
        else:
            v = local_dim(tree, q, Side.TWO_SIDED, config.tol, config.depth).value
        rows.append({"q": _decimal(qv), "value_lo": _decimal(v.lo), "value_hi": _decimal(v.hi)})
    return rows


def _decimal(x: Fraction) -> str:
    return repr(float(x))


def cmd_staircase(config: Config, args, out) -> int:
    t1 = Fraction(args.t1) if args.t1 is not None else None
    t2 = Fraction(args.t2) if args.t2 is not None else None
    rows = staircase_rows(config, args.which, t1, t2, args.grid)
    fmt = config.output_format if config.output_format != "human" else "csv"
    _emit(Config(config.M, config.precision_bits, config.depth, config.max_word_len, config.tol,
                 config.cache_path, fmt), rows, [], out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# oracle suites


def _suite_counts(config: Config):
    alphabet = Alphabet(config.M)
    length = 6 if config.M == 1 else 4
    n_max = 12
    for l in range(1, length + 1):
        for digits in product(range(config.M + 1), repeat=l):
            w = Word(alphabet, digits)
            try:
                g = build_sft(w)
                matrix = [count_blocks_matrix(g, n) for n in range(1, n_max + 1)]
            except EmptySubshift:
                matrix = [0] * n_max
            brute = brute_counts(w, n_max)
            yield f"counts {w}", matrix == brute, f"matrix {matrix} brute {brute}"


def _suite_plateaus(config: Config):
    tree = config.tree()
    for node in tree.children_of(tree.root)[1:]:
        m = node.m
        if 2 * 3 * m > 24:
            continue
        direct = [str(w) for w in children_direct(node, 2 * 3 * m)]
        # reference words up to length 6 give every pullback of length <= 6m
        pulled = [str(k.generating_word) for k in children(node, 6)[1:] if len(k.generating_word) <= 2 * 3 * m]
        yield f"plateaus {node.generating_word}", direct == pulled, f"direct {direct} pullback {pulled}"


def _suite_constants(config: Config):
    checks = [
        ("golden", base_from_alpha(periodic((1, 0), 1)), Fraction(161803, 100000)),
        ("(1100)^inf", base_from_alpha(periodic((1, 1, 0, 0), 1)), Fraction(175488, 100000)),
        ("q_KL", komornik_loreti(1), Fraction(178723, 100000)),
    ]
    for name, q, expected in checks:
        ok = abs(q.mid - expected) < Fraction(1, 10**5)
        yield f"constants {name}", ok, str(q)


SUITES = {"counts": _suite_counts, "plateaus": _suite_plateaus, "constants": _suite_constants}


def cmd_oracle(config: Config, args, out) -> int:
    names = list(SUITES) if args.suite == "all" else [args.suite]
    rows, lines, failed = [], [], False
    for name in names:
        for check, ok, detail in SUITES[name](config):
            rows.append({"check": check, "result": "pass" if ok else "FAIL", "detail": "" if ok else detail})
            lines.append(f"{'pass' if ok else 'FAIL'}  {check}" + ("" if ok else f"  {detail}"))
            failed |= not ok
    _emit(config, rows, lines, out)
    return EXIT_MISMATCH if failed else EXIT_OK


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--M", type=int, default=1, help="largest digit")
    common.add_argument("--precision", type=int, default=None, help="working precision in bits")
    common.add_argument("--depth", type=int, default=6, help="tree depth budget")
    common.add_argument("--max-word-len", type=int, default=8, help="word-length horizon of the tree")
    common.add_argument("--tol", type=str, default="1e-9", help="target width of entropy brackets")
    common.add_argument("--cache", default=None, help="tree cache file")
    common.add_argument("--format", choices=("human", "csv", "json"), default="human")

    parser = argparse.ArgumentParser(prog="univoque", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("alpha", parents=[common], help="quasi-greedy expansion of 1")
    p.add_argument("--q", required=True)
    p.add_argument("--n", type=int, default=16)
    p.set_defaults(run=cmd_alpha)

    p = sub.add_parser("tree", parents=[common], help="build and list the plateau tree")
    p.add_argument("--levels", type=int, default=1)
    p.add_argument("--window", nargs=2, metavar=("LO", "HI"))
    p.set_defaults(run=cmd_tree)

    p = sub.add_parser("dim", parents=[common], help="local or interval dimension")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--q")
    g.add_argument("--interval", nargs=2, metavar=("T1", "T2"))
    p.add_argument("--side", choices=[s.value for s in Side], default="two-sided")
    p.set_defaults(run=cmd_dim)

    p = sub.add_parser("staircase", parents=[common], help="entropy or dimension on a grid, as CSV")
    p.add_argument("--which", default="H", help="H, f, HJ:<path> or DJ:<path>")
    p.add_argument("--t1")
    p.add_argument("--t2")
    p.add_argument("--grid", type=int, default=50)
    p.set_defaults(run=cmd_staircase)

    p = sub.add_parser("oracle", parents=[common], help="brute-force cross-checks")
    p.add_argument("--suite", choices=(*SUITES, "all"), default="all")
    p.set_defaults(run=cmd_oracle)
    return parser


def make_config(args) -> Config:
    bits = args.precision
    if bits is None:
        bits = int(os.environ.get(PRECISION_ENV, DEFAULT_PRECISION))
    return Config(args.M, bits, args.depth, args.max_word_len, Fraction(args.tol), args.cache, args.format)


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = make_config(args)
        return args.run(config, args, out)
    except (PrecisionExhausted, UndecidableAtPrecision, TooLarge, NotInPlateau) as exc:
        print(f"error: {exc}\nhint: raise --precision (or {PRECISION_ENV}) or --max-word-len", file=sys.stderr)
        return EXIT_PRECISION
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
