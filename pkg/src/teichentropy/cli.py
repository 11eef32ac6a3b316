"""Command-line entry point ``teichentropy``.

Exit codes: 0 success, 2 invalid input, 3 numerical failure or boundary hit,
4 iteration cap exceeded. Every command is deterministic for fixed flags.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from fractions import Fraction

import numpy as np

from .entropy import bernoulli_flow_entropy, estimate_htop_flow, maximize_entropy_finite, roof_table
from .errors import CapExceededError, InvalidInputError, NumericalError
from .induction import DEFAULT_CAP, IETPoint, golden_point, roof_tau0, roof_tau1, step_G
from .montecarlo import cylinder_frequencies, margulis_check, shortest_returns, simulate_chunks
from .rauzy import Permutation, rauzy_class
from .symbolic import format_word, parse_word

DEFAULT_SEED = 20240601
SCHEMA_VERSION = 1

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC, EXIT_CAP = 0, 2, 3, 4


def _dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def _clean(v):
    """Replace non-finite floats by strings so the JSON stays standard."""
    if isinstance(v, dict):
        return {k: _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def _envelope(kind: str, body: dict) -> dict:
    return {"schema": f"teichentropy/{kind}/v{SCHEMA_VERSION}", **_clean(body)}


def _csv(rows: list[list]) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\r\n").writerows(rows)
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _positive(kind=int):
    def parse(text):
        value = kind(text)
        if value <= 0:
            raise argparse.ArgumentTypeError(f"{text} must be positive")
        return value
    return parse


def _nonnegative(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"{text} must be nonnegative")
    return value


def _parse_lambda(text: str, backend: str):
    if text.strip().lower() == "golden":
        return golden_point()
    parts = [t for t in text.split(",") if t.strip()]
    try:
        values = [Fraction(t.strip()) for t in parts]
    except (ValueError, ZeroDivisionError) as exc:
        raise InvalidInputError(f"cannot parse lengths {text!r}") from exc
    if backend == "float":
        values = [float(v) for v in values]
    return values


def _perm_for(args, m: int | None = None) -> Permutation:
    if args.perm:
        return Permutation.parse(args.perm)
    if m is None:
        raise InvalidInputError("--perm is required")
    return Permutation(tuple(range(m, 0, -1)))


def cmd_rauzy(args) -> int:
    cls = rauzy_class(Permutation.parse(args.perm))
    fmt = args.format or "json"
    if fmt == "dot":
        text = cls.to_dot()
    elif fmt == "json":
        text = _dump_json(_envelope("rauzy", {"size": len(cls), **cls.to_json()}))
    else:
        raise InvalidInputError("rauzy supports --format json or dot")
    _emit(text, args.out)
    print(f"class size {len(cls)}", file=sys.stderr)
    return EXIT_OK


def cmd_orbit(args) -> int:
    lam = _parse_lambda(args.lam, args.backend)
    if isinstance(lam, IETPoint):
        point = lam
    else:
        point = IETPoint.normalized(lam, _perm_for(args, len(lam)))
    rows, letters, status, code = [], [], "complete", EXIT_OK
    for k in range(args.depth):
        try:
            t0 = roof_tau0(point)
            t1 = roof_tau1(point, args.cap)
            nxt, letter = step_G(point, args.cap)
        except NumericalError as exc:
            status, code = f"boundary: {exc}", EXIT_NUMERIC
            break
        except CapExceededError as exc:
            status, code = f"cap: {exc}", EXIT_CAP
            break
        letters.append(letter)
        rows.append((k, letter, float(t0), float(t1), nxt))
        point = nxt
    fmt = args.format or "csv"
    if fmt == "csv":
        table = [["step", "letter", "type", "n", "roof_tau0", "roof_tau1", "lambda"]]
        table += [[k, str(u), u.c, u.n, repr(t0), repr(t1), " ".join(str(v) for v in p.lam)]
                  for k, u, t0, t1, p in rows]
        text = _csv(table)
    elif fmt == "json":
        text = _dump_json(_envelope("orbit", {
            "word": format_word(letters),
            "letters": [u.to_json() for u in letters],
            "roof_tau0": [r[2] for r in rows],
            "roof_tau1": [r[3] for r in rows],
            "final": point.to_json(),
            "status": status,
        }))
    else:
        raise InvalidInputError("orbit supports --format csv or json")
    _emit(text, args.out)
    if code != EXIT_OK:
        print(f"orbit stopped after {len(rows)} steps: {status}", file=sys.stderr)
    return code


_LAW = re.compile(r"^\s*(?:([0-9.]+)\s*\*\s*)?log\(\s*i\s*(?:\+\s*([0-9]+))?\s*\)\s*$")


def _parse_roofs(text: str) -> list[float]:
    out = []
    for part in text.split(","):
        part = part.strip().replace(" ", "")
        m = re.fullmatch(r"(?:([0-9.]+)\*?)?log\(?([0-9.]+)\)?", part)
        if m and not re.fullmatch(r"[0-9.]+", part):
            out.append(float(m.group(1) or 1) * math.log(float(m.group(2))))
            continue
        try:
            out.append(float(part))
        except ValueError as exc:
            raise InvalidInputError(f"cannot parse roof {part!r}") from exc
    return out


def cmd_entropy(args) -> int:
    if args.kind == "finite":
        if not args.roofs:
            raise InvalidInputError("--roofs is required")
        c = _parse_roofs(args.roofs)
        beta, p = maximize_entropy_finite(c)
        est = bernoulli_flow_entropy(c)
        body = {**est.to_json(), "maximizer": [float(x) for x in p], "roofs": c}
        if abs(beta - est.beta) > 1e-9:
            raise NumericalError("maximizer and pressure root disagree")
    elif args.kind == "bernoulli":
        if args.roofs:
            body = bernoulli_flow_entropy(_parse_roofs(args.roofs)).to_json()
        elif args.law:
            m = _LAW.match(args.law)
            if not m:
                raise InvalidInputError("--law must look like 'k*log(i+s)'")
            k, s = float(m.group(1) or 1), int(m.group(2) or 0)
            body = bernoulli_flow_entropy(lambda i: k * np.log(i + s)).to_json()
        else:
            raise InvalidInputError("--roofs or --law is required")
    else:
        perm = _perm_for(args, 2)
        q = parse_word(args.q or "a:1.b:1", perm)
        body = estimate_htop_flow(q, args.bound or 12).to_json()
    _emit(_dump_json(_envelope("entropy", body)), args.out)
    return EXIT_OK


def cmd_roofs(args) -> int:
    perm = _perm_for(args, 2)
    q = parse_word(args.q or "a:1.b:1", perm)
    table = roof_table(q, args.bound or 10)
    fmt = args.format or "csv"
    if fmt == "csv":
        rows = [["word", "weight", "value", "lower", "upper", "cylinder_diameter"]]
        rows += [[format_word(e.word), e.weight, repr(e.value), repr(e.lower), repr(e.upper),
                  repr(e.cylinder_diameter)] for e in table]
        text = _csv(rows)
    elif fmt == "json":
        text = _dump_json(_envelope("roofs", {"q": format_word(q), "entries": [
            {"word": format_word(e.word), "weight": e.weight, "value": e.value, "lower": e.lower,
             "upper": e.upper, "cylinder_diameter": e.cylinder_diameter} for e in table]}))
    else:
        raise InvalidInputError("roofs supports --format csv or json")
    _emit(text, args.out)
    return EXIT_OK


def cmd_frequencies(args) -> int:
    perm = _perm_for(args, 2)
    words = [parse_word(w, perm) for w in args.word]
    if not words:
        raise InvalidInputError("at least one --word is required")
    samples = simulate_chunks(perm, args.iterations, args.seed, args.chunks, args.threads)
    stats = cylinder_frequencies(words, args.iterations, args.seed, samples=samples)
    fmt = args.format or "csv"
    if fmt == "csv":
        rows = [["word", "hits", "total", "frequency", "standard_error", "batch_standard_error"]]
        rows += [[format_word(s.word), s.hits, s.total, repr(s.frequency), repr(s.standard_error),
                  repr(s.batch_standard_error)] for s in stats]
        text = _csv(rows)
    elif fmt == "json":
        text = _dump_json(_envelope("frequencies", {
            "iterations": args.iterations, "seed": args.seed,
            "restarts": sum(s.restarts for s in samples),
            "cylinders": [s.to_json() for s in stats]}))
    else:
        raise InvalidInputError("frequencies supports --format csv or json")
    _emit(text, args.out)
    return EXIT_OK


def cmd_margulis(args) -> int:
    perm = _perm_for(args, 2)
    p_prime = parse_word(args.p_prime or "a:1.b:1", perm)
    p = parse_word(args.p, perm) if args.p else p_prime
    returns = [parse_word(r, perm) for r in args.r] if args.r else \
        shortest_returns(p, args.returns)
    samples = simulate_chunks(perm, args.iterations, args.seed, args.chunks, args.threads)
    report = margulis_check(p_prime, p, returns, args.iterations, args.seed, samples=samples)
    body = {**report.to_json(), "iterations": args.iterations, "seed": args.seed,
            "restarts": sum(s.restarts for s in samples)}
    _emit(_dump_json(_envelope("margulis", body)), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="teichentropy", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, fmt_choices):
        p.add_argument("--perm", help="permutation images, e.g. 3,2,1")
        p.add_argument("--format", choices=fmt_choices)
        p.add_argument("--out", help="output path (default stdout)")
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)
        p.add_argument("--threads", type=_positive(), default=1)
        p.add_argument("--backend", choices=("rational", "float"), default="rational")

    p = sub.add_parser("rauzy", help="enumerate a Rauzy class")
    common(p, ("json", "dot"))
    p.set_defaults(func=cmd_rauzy)

    p = sub.add_parser("orbit", help="trace the Zorich coding of a point")
    common(p, ("csv", "json"))
    p.add_argument("--lambda", dest="lam", default="golden", help="'golden' or rationals '7/10,3/10'")
    p.add_argument("--depth", type=_nonnegative, default=10)
    p.add_argument("--cap", type=_positive(), default=DEFAULT_CAP)
    p.set_defaults(func=cmd_orbit)

    p = sub.add_parser("entropy", help="entropy solvers")
    common(p, ("json",))
    p.add_argument("kind", choices=("finite", "bernoulli", "flow"))
    p.add_argument("--roofs", help="comma list, e.g. 'log2,log2' or '1,2'")
    p.add_argument("--law", help="roof law c_i such as '2*log(i)' or '2*log(i+1)'")
    p.add_argument("--q", help="base word, e.g. 'a:1.b:1'")
    p.add_argument("--bound", type=_positive(), help="induction-length truncation bound")
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("roofs", help="roof table of the return alphabet of q")
    common(p, ("csv", "json"))
    p.add_argument("--q")
    p.add_argument("--bound", type=_positive())
    p.set_defaults(func=cmd_roofs)

    p = sub.add_parser("frequencies", help="Monte-Carlo cylinder frequencies")
    common(p, ("csv", "json"))
    p.add_argument("--word", action="append", default=[])
    p.add_argument("--iterations", type=_positive(), default=10**5)
    p.add_argument("--chunks", type=_positive(), default=1)
    p.set_defaults(func=cmd_frequencies)

    p = sub.add_parser("margulis", help="uniform-expansion check")
    common(p, ("json",))
    p.add_argument("--p-prime", dest="p_prime")
    p.add_argument("--p")
    p.add_argument("--r", action="append", help="explicit return word (repeatable)")
    p.add_argument("--returns", type=_positive(), default=12, help="number of lightest returns")
    p.add_argument("--iterations", type=_positive(), default=10**6)
    p.add_argument("--chunks", type=_positive(), default=1)
    p.set_defaults(func=cmd_margulis)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except CapExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (NumericalError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
