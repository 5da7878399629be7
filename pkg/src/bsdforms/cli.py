"""Command-line interface: generate, verify, classify, Cayley transport, sample.

Exit codes: 0 success, 1 nonzero residual or failed pipeline, 2 parse error,
3 hypothesis violation.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile

import numpy as np

from .errors import BSDError, HypothesisViolated, NotAnEmbedding
from .model import (
    Embedding,
    ModelSignature,
    cayley,
    inverse_cayley,
    residual,
    sample_model,
    sample_shilov,
    write_samples_csv,
)
from .scalars import DEFAULT_TOL

EXIT_OK, EXIT_RESIDUAL, EXIT_PARSE, EXIT_HYPOTHESIS = 0, 1, 2, 3


class ParseError(Exception):
    pass


def write_atomic(path, text):
    """Write ``text`` to ``path`` via a temporary file and rename; '-' is stdout."""
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    with os.fdopen(fd, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _read(path):
    if path == "-":
        return sys.stdin.read()
    with open(path) as fh:
        return fh.read()


def load_embedding(path, backend=None):
    try:
        E = Embedding.loads(_read(path))
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ParseError(f"cannot parse embedding file {path}: {exc}") from exc
    if backend == "float" and E.exact:
        E = E.to_float()
    return E


def _backend(args):
    return os.environ.get("BSD_BACKEND") or args.backend


def _sigs(args, need_target=True):
    pos = list(getattr(args, "dims", None) or [])
    vals = [args.p, args.q, args.pp, args.qq]
    for k, v in enumerate(pos[:4]):
        if vals[k] is None:
            vals[k] = v
    p, q, pp, qq = vals
    if p is None or q is None or (need_target and (pp is None or qq is None)):
        raise ParseError("signatures need p q (and p' q') as positionals or --p --q --pp --qq")
    try:
        src = ModelSignature(p, q)
        tgt = ModelSignature(pp, qq) if need_target else None
    except ValueError as exc:
        raise HypothesisViolated(str(exc)) from exc
    return src, tgt


def _autos_path(out):
    if out in (None, "-"):
        return None
    stem = out[:-5] if out.endswith(".json") else out
    return stem + ".autos.json"


# commands ---------------------------------------------------------------------------------
def cmd_gen(args):
    from .normalize import check_hypotheses
    from .scramble import representative, scramble

    src, tgt = _sigs(args)
    check_hypotheses(src, tgt, args.degree)
    E = representative(args.kind, src, tgt, args.degree)
    autos = None
    if args.scramble:
        s = scramble(E, args.scramble, args.seed)
        E = s.embedding
        autos = {"source": [a.to_json() for a in s.source_autos],
                 "target": [a.to_json() for a in s.target_autos]}
    if _backend(args) == "float":
        E = E.to_float()
    rep = residual(E, tol=args.tol)
    if not rep.is_zero:
        print(f"generation self-check failed: {rep.describe()}", file=sys.stderr)
        return EXIT_RESIDUAL
    write_atomic(args.output, E.dumps() + "\n")
    if autos is not None:
        path = args.autos or _autos_path(args.output)
        if path:
            write_atomic(path, json.dumps(autos, sort_keys=True, indent=1) + "\n")
    return EXIT_OK


def cmd_verify(args):
    E = load_embedding(args.file, _backend(args))
    rep = residual(E, args.degree, tol=args.tol)
    if args.json:
        off = None
        if rep.offender is not None:
            i, j, mono, c = rep.offender
            off = {"row": i + 1, "col": j + 1, "monomial": mono, "coefficient": c}
        print(json.dumps({"zero": rep.is_zero, "degree": rep.degree, "offender": off,
                          "max_abs": rep.max_abs}, sort_keys=True))
    else:
        print(rep.describe())
    return EXIT_OK if rep.is_zero else EXIT_RESIDUAL


def cmd_classify(args):
    from .normalize import classify

    E = load_embedding(args.file, _backend(args))
    cert = classify(E, tol=args.tol)
    out = args.output
    if out is None:
        stem = args.file[:-5] if args.file.endswith(".json") else args.file
        out = "-" if args.file == "-" else stem + ".cert.json"
    if out != "-":
        write_atomic(out, cert.dumps() + "\n")
    else:
        sys.stderr.write(cert.dumps() + "\n")
    print(cert.verdict)
    return EXIT_OK


def _read_rows(path):
    text = _read(path)
    rows = []
    for k, row in enumerate(csv.reader(io.StringIO(text))):
        if not row:
            continue
        try:
            vals = [float(x) for x in row]
        except ValueError as exc:
            raise ParseError(f"bad number in row {k + 1}: {exc}") from exc
        if len(vals) % 2:
            raise ParseError(f"row {k + 1} has an odd number of fields")
        rows.append(np.array(vals[0::2]) + 1j * np.array(vals[1::2]))
    return rows


def _split_model_row(sig, v):
    q, N = sig.q, sig.N
    if v.size != q * q + q * N:
        raise ParseError(f"model rows need {2 * (q * q + q * N)} fields, got {2 * v.size}")
    return v[: q * q].reshape(q, q), v[q * q:].reshape(q, N)


def cmd_cayley(args):
    src, _ = _sigs(args, need_target=False)
    rows = _read_rows(args.file)
    out = []
    for v in rows:
        if args.direction == "forward":
            W, Z = _split_model_row(src, v)
            out.append(cayley(src, W, Z))
        else:
            if v.size != src.p * src.q:
                raise ParseError(f"boundary rows need {2 * src.p * src.q} fields, got {2 * v.size}")
            W, Z = inverse_cayley(src, v.reshape(src.p, src.q))
            out.append(np.concatenate([W.reshape(-1), Z.reshape(-1)]))
    buf = io.StringIO()
    write_samples_csv(buf, out)
    write_atomic(args.output, buf.getvalue())
    return EXIT_OK


def cmd_sample(args):
    src, _ = _sigs(args, need_target=False)
    if args.kind == "model":
        pts = [np.concatenate([W.reshape(-1), Z.reshape(-1)]) for W, Z in sample_model(src, args.count, args.seed)]
    else:
        pts = sample_shilov(src, args.count, args.seed)
    buf = io.StringIO()
    write_samples_csv(buf, pts)
    write_atomic(args.output, buf.getvalue())
    return EXIT_OK


# parser -------------------------------------------------------------------------------------
def _common(sp, dims=True):
    sp.add_argument("--p", type=int)
    sp.add_argument("--q", type=int)
    sp.add_argument("--pp", type=int, help="target p'")
    sp.add_argument("--qq", type=int, help="target q'")
    sp.add_argument("--degree", type=int, default=6, help="truncation degree D")
    sp.add_argument("--backend", choices=("exact", "float"), default="exact")
    sp.add_argument("--tol", type=float, default=DEFAULT_TOL)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("-o", "--output", default="-")
    if dims:
        sp.add_argument("dims", nargs="*", type=int, help="p q [p' q']")


def build_parser():
    ap = argparse.ArgumentParser(prog="bsdforms", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="emit a class representative or a scrambled instance")
    g.add_argument("kind", choices=("linear", "whitney"))
    _common(g)
    g.add_argument("--scramble", type=int, default=0, help="scramble depth")
    g.add_argument("--autos", help="where to write the scrambling automorphisms")
    g.set_defaults(fn=cmd_gen)

    v = sub.add_parser("verify", help="check the embedding equation to degree D")
    v.add_argument("file")
    _common(v, dims=False)
    v.set_defaults(degree=None)
    v.add_argument("--json", action="store_true", help="machine-readable report")
    v.set_defaults(fn=cmd_verify)

    c = sub.add_parser("classify", help="normalize and classify; writes a certificate")
    c.add_argument("file")
    _common(c, dims=False)
    c.set_defaults(output=None, fn=cmd_classify)

    k = sub.add_parser("cayley", help="Cayley transport of CSV points")
    k.add_argument("direction", choices=("forward", "inverse"))
    k.add_argument("file")
    _common(k, dims=False)
    k.set_defaults(fn=cmd_cayley)

    s = sub.add_parser("sample", help="random model or boundary points as CSV")
    s.add_argument("count", type=int)
    _common(s, dims=False)
    s.add_argument("--kind", choices=("model", "shilov"), default="model")
    s.set_defaults(fn=cmd_sample)
    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    if args.tol <= 0:
        print("error: --tol must be positive", file=sys.stderr)
        return EXIT_PARSE
    try:
        return args.fn(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except HypothesisViolated as exc:
        print(f"hypothesis violated: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except NotAnEmbedding as exc:
        print(f"not an embedding: {exc}", file=sys.stderr)
        return EXIT_RESIDUAL
    except BSDError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RESIDUAL


if __name__ == "__main__":
    sys.exit(main())
