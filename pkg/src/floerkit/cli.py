"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 domain or regularity error (bad
input, failed precondition, unwritable output), 3 numerical failure
(including a failing selftest).
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import os
import sys
import warnings
from fractions import Fraction
from pathlib import Path

from . import __version__, cascades, czindex, rabinowitz, specflow, spherehf
from .core import load_path
from .errors import DomainError, FloerkitError, NumericalError

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_NUMERICAL = 0, 1, 2, 3
OUTPUT_DIR_ENV = "FLOERKIT_OUTPUT_DIR"
_RANGE_FLAGS = ("--window", "--sweep")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _pair(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected lo,hi but got {text!r}")
    try:
        lo, hi = (float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"non-numeric range {text!r}") from None
    if lo > hi:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return lo, hi


def _exact_pair(text: str):
    _pair(text)
    return tuple(Fraction(p.strip()) for p in text.split(","))


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _positive(kind):
    def parse(text):
        value = kind(text)
        if value <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return value
    return parse


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="floerkit", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"floerkit {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, formats=("json", "text"), flag="--format"):
        sp.add_argument(flag, dest="format", choices=formats, default=formats[0])
        sp.add_argument("-o", "--output", help=f"write to a file (relative to ${OUTPUT_DIR_ENV} if set)")

    sf = sub.add_parser("specflow", help="spectral flow of a symmetric path file")
    sf.add_argument("path", help="JSON path document")
    sf.add_argument("--method", default="crossing_form",
                    choices=specflow.METHODS + ("crossing", "endpoint", "oracle", "all"))
    sf.add_argument("--delta", type=_positive(float),
                    help="regularize degenerate asymptotes by A - delta*beta(s)")
    common(sf, flag="--report")

    cz = sub.add_parser("cz", help="Robbin-Salamon index of a generator path on [0, 1]")
    cz.add_argument("path", help="JSON generator document")
    cz.add_argument("--delta", type=float, default=0.0)
    cz.add_argument("--sweep", type=_floats, help="decreasing positive deltas for the limits")
    cz.add_argument("--steps", type=_positive(int))
    common(cz, flag="--report")

    mb = sub.add_parser("mbh", help="Morse-Bott cascade complex of a shipped model")
    mb.add_argument("--model", choices=sorted(cascades.MODELS), default="s2-zsq")
    mb.add_argument("--tube", type=_positive(float), default=1e-3)
    mb.add_argument("--steps", type=_positive(int), default=100)
    mb.add_argument("--samples", type=_positive(int), default=64)
    mb.add_argument("--window", type=_pair)
    mb.add_argument("--grading", choices=("morse", "signature"), default="morse")
    common(mb, formats=("json", "text", "csv"))

    rb = sub.add_parser("rabinowitz", help="randomized suites for the circle model")
    rb.add_argument("--suite", choices=("step1", "step2", "critical", "gradient"), default="step1")
    rb.add_argument("--n-samples", type=int, default=rabinowitz.DEFAULT_SAMPLES)
    rb.add_argument("--delta", type=_positive(float), default=0.2)
    rb.add_argument("--tol", type=_positive(float), default=1e-10)
    rb.add_argument("--seed", type=int, default=0)
    rb.add_argument("--count", type=_positive(int), default=100)
    rb.add_argument("--k", type=int, default=1, help="orbit multiplicity for the critical suite")
    rb.add_argument("--derivative", choices=rabinowitz.DERIVATIVES, default="spectral")
    common(rb, formats=("csv", "json", "text"))

    sh = sub.add_parser("sphere-hf", help="Floer homology table of the unit cotangent bundle of S^n")
    sh.add_argument("--n", type=int, required=True)
    sh.add_argument("--window", type=_exact_pair, default=(-20, 20))
    sh.add_argument("--scan", action="store_true",
                    help="emit the lacunary scan (index pairs that could carry a differential)")
    common(sh, formats=("table", "csv", "json"))

    st = sub.add_parser("selftest", help="run the acceptance checks")
    from .selftest import DEFAULT_SEED
    st.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common(st, formats=("text", "json"))
    return p


# ---------------------------------------------------------------- emitters

def _json(payload) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _csv(header, rows) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return out.getvalue()


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise DomainError(f"cannot read {path}: {exc.strerror}") from None


def run_specflow(args) -> str:
    path = load_path(_read(args.path))
    if args.delta:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", specflow.RegularizationWarning)
            path = specflow.delta_regularize(path, args.delta)
    methods = specflow.METHODS if args.method == "all" else (args.method,)
    reports = [dataclasses.replace(specflow.spectral_flow(path, m), delta=float(args.delta or 0.0))
               for m in methods]
    if args.format == "json":
        payload = reports[0].to_dict() if len(reports) == 1 else {"reports": [r.to_dict() for r in reports]}
        return _json(payload)
    lines = []
    for r in reports:
        lines.append(f"{r.method}: flow {r.flow}")
        lines += [f"  s = {c.s:.10g}  kernel {c.kernel_dim}  signature {c.signature:+d}" for c in r.crossings]
    return "\n".join(lines) + "\n"


def run_cz(args) -> str:
    gen = load_path(_read(args.path))
    if args.sweep:
        lim = czindex.perturbed_limits(gen, args.sweep, args.steps)
        if args.format == "json":
            return _json(lim.to_dict())
        return f"mu_plus {lim.mu_plus}\nmu_minus {lim.mu_minus}\ngap {lim.gap}\n"
    rep = czindex.rs_index(gen, args.delta, args.steps)
    if args.format == "json":
        return _json(rep.to_dict())
    lines = [f"index {rep.index} (delta = {rep.perturbation:g})"]
    lines += [f"  t = {c.t:.10g}  kernel {c.kernel_dim}  signature {c.signature:+d}  weight {c.weight}"
              for c in rep.crossings]
    return "\n".join(lines) + "\n"


def run_mbh(args) -> str:
    model = cascades.MODELS[args.model]()
    cx = cascades.build_complex(model, args.grading, args.tube, args.steps, args.samples, args.window)
    ranks = cascades.homology(cx)
    if args.format == "json":
        payload = cx.to_dict()
        payload.update({"model": args.model, "homology": {str(k): v for k, v in ranks.items()}})
        return _json(payload)
    if args.format == "csv":
        return cx.to_csv()
    lines = [f"{g.id:10s} degree {str(g.grading):>4s}  action {g.action:+.4f}  d -> "
             + (", ".join(cx.boundary_of(g.id)) or "0") for g in cx.generators]
    lines += [f"H_{k} = (Z/2)^{v}" for k, v in ranks.items()]
    return "\n".join(lines) + "\n"


def _rabinowitz_rows(args):
    model = rabinowitz.CircleModel(args.derivative)
    n = args.n_samples
    if args.suite == "step1":
        for i, loop in enumerate(rabinowitz.step1_loops(args.count, args.seed, args.delta, n)):
            r = rabinowitz.eta_bound_check(loop, model, args.delta)
            yield [i, r.lhs, r.rhs, r.holds]
    elif args.suite == "step2":
        for i, loop in enumerate(rabinowitz.step2_loops(args.count, args.seed, args.delta, n)):
            r = rabinowitz.grad_lower_bound(loop, model, args.delta)
            yield [i, r.bound, r.grad_norm, r.holds]
    elif args.suite == "gradient":
        for i, (loop, d) in enumerate(rabinowitz.gradient_cases(args.count, args.seed, n)):
            r = rabinowitz.gradient_fd_check(loop, d, model)
            yield [i, r.fd, r.pairing, r.rel_error <= 1e-6]
    else:
        for i, start in enumerate(rabinowitz.critical_starts(args.k, args.count, args.seed, n)):
            c = rabinowitz.find_critical(start, model, args.tol)
            yield [i, c.eta, c.action, abs(c.action - c.eta) < 10 * args.tol]


def run_rabinowitz(args) -> str:
    if args.n_samples < rabinowitz.MIN_SAMPLES:
        raise DomainError(f"--n-samples must be at least {rabinowitz.MIN_SAMPLES}")
    header = ["case", "lhs", "rhs", "holds"]
    rows = list(_rabinowitz_rows(args))
    if args.format == "csv":
        return _csv(header, [[i, repr(a), repr(b), str(h).lower()] for i, a, b, h in rows])
    if args.format == "json":
        return _json({"suite": args.suite, "seed": args.seed,
                      "cases": [dict(zip(header, r)) for r in rows],
                      "all_hold": all(r[3] for r in rows)})
    held = sum(bool(r[3]) for r in rows)
    return f"suite {args.suite} (seed {args.seed}): {held}/{len(rows)} hold\n"


def run_sphere_hf(args) -> str:
    if args.scan:
        scan = spherehf.lacunary_scan(args.n)
        if args.format == "json":
            return _json([list(t) for t in scan])
        if args.format == "csv":
            return _csv(["i1", "i2", "dm"], scan)
        return "".join(f"i1={a} i2={b} dm={c}\n" for a, b, c in scan) or "no candidates\n"
    table = spherehf.hf_table(args.n, args.window)
    if args.format == "json":
        return _json(table.to_dict())
    if args.format == "csv":
        return _csv(["degree", "value", "rank"], table.rows())
    lines = [f"HF_* for n = {table.n}, degrees in [{table.window[0]}, {table.window[1]}]"]
    lines += [f"  {d:>7s}  Z/2" for d, _, r in table.rows() if r == 1]
    return "\n".join(lines) + "\n"


def run_selftest(args) -> tuple[str, int]:
    from .selftest import run_selftest as run
    results = run(args.seed)
    code = EXIT_OK if all(r.passed for r in results) else EXIT_NUMERICAL
    if args.format == "json":
        return _json({"seed": args.seed, "criteria": [r.to_dict() for r in results],
                      "passed": code == EXIT_OK}), code
    lines = [f"seed {args.seed}"] + [r.line() for r in results]
    return "\n".join(lines) + "\n", code


COMMANDS = {"specflow": run_specflow, "cz": run_cz, "mbh": run_mbh,
            "rabinowitz": run_rabinowitz, "sphere-hf": run_sphere_hf, "selftest": run_selftest}


def _normalize(argv):
    """Let range flags take values that start with a minus sign."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok in _RANGE_FLAGS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def _emit(text: str, target: str | None):
    if target is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    path = Path(target)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not path.is_absolute():
        path = Path(base) / path
    try:
        path.write_text(text)
    except OSError as exc:
        raise DomainError(f"cannot write {path}: {exc.strerror}") from None


def _error_payload(kind: str, exc: BaseException, code: int) -> str:
    payload = {"error": {"type": type(exc).__name__, "kind": kind, "message": str(exc),
                         "exit_code": code}}
    for attr in ("clause", "candidates", "residual", "witness"):
        if getattr(exc, attr, None) is not None:
            value = getattr(exc, attr)
            payload["error"][attr] = [list(v) for v in value] if attr == "candidates" else value
    return _json(payload)


def main(argv=None) -> int:
    argv = _normalize(sys.argv[1:] if argv is None else list(argv))
    json_mode = any(tok == "json" or tok.endswith("=json") for tok in argv)
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        if json_mode:
            sys.stdout.write(_error_payload("usage", exc, EXIT_USAGE))
        sys.stderr.write(f"{exc}\n")
        return EXIT_USAGE
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        result = COMMANDS[args.command](args)
        text, code = result if isinstance(result, tuple) else (result, EXIT_OK)
        _emit(text, args.output)
        return code
    except FloerkitError as exc:
        numerical = isinstance(exc, NumericalError)
        code = EXIT_NUMERICAL if numerical else EXIT_DOMAIN
        if args.format == "json":
            sys.stdout.write(_error_payload("numerical" if numerical else "domain", exc, code))
        sys.stderr.write(f"floerkit {args.command}: {type(exc).__name__}: {exc}\n")
        return code


if __name__ == "__main__":
    sys.exit(main())
