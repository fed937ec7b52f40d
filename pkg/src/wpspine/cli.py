"""Command-line entry point.

Every command prints JSON (or a table for ``reproduce``) on stdout and writes
a ``run.json`` manifest into ``--run-dir`` (default: the directory of
``--out``, else the working directory).  Exit codes: 0 success, 1 failed
validation, 2 bad arguments.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import mpmath
import numpy as np

from . import __version__

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class ValidationFailure(Exception):
    """A check ran and did not hold."""


def _digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def _mp(x, digits: int = 30) -> str:
    return mpmath.nstr(x, digits)


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}")


def _bits(text: str) -> str:
    if not text or set(text) - {"0", "1"}:
        raise argparse.ArgumentTypeError(f"expected a string of 0/1 flags, got {text!r}")
    return text


def _mask(args):
    from .trees import CuspMask

    bits = args.cusps if args.cusps is not None else "0" * args.n
    if len(bits) != args.n:
        raise ValueError(f"--cusps needs {args.n} flags, got {len(bits)}")
    return CuspMask.from_bits(bits)


# ---------------------------------------------------------------------------
# commands; each returns (stdout text, {file name: bytes})


def cmd_trees(args):
    from .trees import enumerate_anti, enumerate_delaunay

    mask = _mask(args)
    found = (enumerate_anti if args.anti else enumerate_delaunay)(args.n, mask)
    body = {"n": args.n, "cusps": mask.bits(), "class": "anti" if args.anti else "delaunay", "count": len(found)}
    body["trees"] = [t.to_json() for t in found]
    return _dump(body), {}


def cmd_volume(args):
    from .wp_poly import wp_volume

    mask = _mask(args)
    poly = wp_volume(args.n, mask, args.route)
    body = {"n": args.n, "cusps": mask.bits(), "route": args.route, "polynomial": poly.to_json(), "text": str(poly)}
    if args.eval is not None:
        if len(args.eval) != args.n:
            raise ValueError(f"--eval needs {args.n} lengths")
        body["value"] = _mp(poly.evaluate(args.eval))
    return _dump(body), {}


def _coeff_json(c):
    from .wp_poly import WPPolynomial

    if isinstance(c, WPPolynomial):
        return {"exact": c.to_json(), "text": str(c), "value": _mp(c.evaluate([]))}
    return {"value": _mp(c)}


def cmd_series(args):
    from . import series

    if args.what == "variance":
        from .variance import c_wp, variance_pipeline

        rows = variance_pipeline(args.nmax)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["n", "variance", "ratio"])
        for n, var, ratio in rows:
            writer.writerow([n, _mp(var, 20), "" if ratio is None else _mp(ratio, 20)])
        files = {args.out: buf.getvalue().encode()} if args.out else {}
        last = rows[-1]
        body = {"what": "variance", "nmax": args.nmax, "c_wp": _mp(c_wp()), "variance": _mp(last[1]), "ratio": _mp(last[2])}
        return _dump(body), files

    mu = series.AtomicWeight.parse(args.mu)
    u = series.parse_number(args.u)
    ring = mu.ring() if u == 0 else series.REAL
    if ring is series.REAL:
        mu = series.AtomicWeight(tuple((_to_real(m), _to_real(K)) for m, K in mu.atoms))
    with mpmath.workdps(series.REAL_DPS):
        if args.what == "R":
            s = series.solve_string(mu, args.order, ring)
        elif args.what == "Z":
            s = series.Z_series(series.solve_string(mu, args.order, ring), mu)
        elif args.what == "eta":
            s = series.eta(_to_real(u) if ring is series.REAL else u, mu, args.order, ring)
        else:
            s = series.xhat(_to_real(u) if ring is series.REAL else u, mu, args.order, ring)
        coeffs = [_coeff_json(c) for c in s]
    body = {"what": args.what, "mu": args.mu, "u": args.u, "order": args.order, "ring": "exact" if ring is series.EXACT else "real"}
    body["coefficients"] = coeffs
    return _dump(body), {}


def _to_real(q):
    from fractions import Fraction

    if isinstance(q, Fraction):
        return mpmath.mpf(q.numerator) / q.denominator
    return mpmath.mpf(q)


def cmd_sample(args):
    from .sampler import SampleConfig, ks_against_x1, sample_D

    cfg = SampleConfig(args.n, tuple(args.lengths), args.count, seed=args.seed, max_rejections=args.max_rejections, workers=args.threads)
    stats = sample_D(cfg, keep_samples=args.ks is not None)
    body = {"n": args.n, "lengths": list(cfg.lengths), "seed": args.seed, **stats.summary()}
    body["standard_errors"] = [stats.standard_error(k) for k in (1, 2)]
    if args.ks is not None:
        body["ks"] = ks_against_x1(stats, args.ks)
    files = {}
    if args.out:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["bin_left", "bin_right", "count"])
        for lo, hi, c in zip(stats.bin_edges[:-1], stats.bin_edges[1:], stats.counts):
            writer.writerow([f"{lo:.6f}", f"{hi:.6f}", int(c)])
        files[args.out] = buf.getvalue().encode()
    return _dump(body), files


def cmd_verify(args):
    from . import acceptance, identities

    rng = np.random.default_rng(args.seed)
    if args.what in ("shears", "poisson"):
        from .geometry import CORNER_SUM_SIGN, poisson_check, shears

        worst = 0.0
        for _ in range(args.count):
            t, d, lengths = acceptance.random_decorated_tree(rng)
            if args.what == "poisson":
                worst = max(worst, poisson_check(t, d, lengths).max_deviation)
            else:
                sh = shears(t, d, lengths)
                worst = max([worst] + [abs(sh.corner_sum(b) - CORNER_SUM_SIGN * lengths[b]) for b in t.boundary_vertices if lengths[b] > 0])
        bound = 1e-10
        rows = [{"check": args.what, "value": worst, "bound": bound}]
    elif args.what == "E":
        rows = []
        for L, u in ((1, 0.2), (2, -0.3), (0.5, 0.1)):
            closed, direct = identities.quad_E(2, 2, L, u), identities.quad_E_direct(L, u)
            rows.append({"check": f"E_22(L={L}, u={u})", "closed": _mp(closed), "direct": _mp(direct), "value": float(abs(closed - direct) / abs(direct)), "bound": 1e-8})
    elif args.what == "hermite":
        phi = rng.uniform(0, np.pi, (4 * args.count, 2))
        phi = phi[phi.sum(axis=1) < np.pi]
        from .geometry import hermite_sum

        with mpmath.workdps(30):
            worst = max(float(abs(hermite_sum(mpmath.mpf(a), mpmath.mpf(b)) - 1)) for a, b in phi)
        rows = [{"check": "hermite", "value": worst, "bound": 1e-12}]
    else:
        res = acceptance.run_criterion(10)
        rows = [{"check": m.label, "value": float(m.value), "bound": m.bound, "exact": m.exact} for m in res.measures]
        rows = [r for r in rows if r["check"] not in ("Hermite cotangent sum", "Poisson brackets against triangle targets", "corner shears sum to -L")]
    ok = all((r["value"] == 0) if r.get("exact") else r["value"] < r["bound"] for r in rows)
    body = {"what": args.what, "passed": ok, "checks": rows}
    if not ok:
        raise ValidationFailure(_dump(body))
    return _dump(body), {}


def cmd_reproduce(args):
    from . import acceptance

    numbers = [int(x) for x in args.only.split(",")] if args.only else None

    def progress(res):
        print(acceptance.format_line(res, args.tol_scale), file=sys.stderr, flush=True)

    results = acceptance.run_all(numbers, args.tol_scale, progress)
    lines = [f"{'#':>2}  {'status':6}  {'time':>7}  title"]
    for r in results:
        lines.append(f"{r.number:>2}  {'PASS' if r.passed else 'FAIL':6}  {r.runtime:6.1f}s  {r.title}")
    report = {"tol_scale": args.tol_scale, "criteria": [r.to_json() for r in results], "passed": all(r.passed for r in results)}
    files = {args.json: _dump(report).encode()} if args.json else {}
    text = "\n".join(lines) + "\n"
    failed = [r for r in results if not r.passed]
    if failed:
        names = ", ".join(f"criterion {r.number} ({'; '.join(r.failures(args.tol_scale))})" for r in failed)
        for name, data in files.items():
            Path(name).write_bytes(data)
        raise ValidationFailure(text + f"FAILED: {names}\n")
    return text, files


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wpspine", description="Volumes, series and sampling for genus-0 surfaces via spine trees.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("--run-dir", help="directory for run.json (default: beside --out, else the working directory)")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("trees", help="enumerate tree classes")
    t.add_argument("--n", type=int, required=True)
    t.add_argument("--cusps", type=_bits, help="one 0/1 flag per boundary, 1 = cusp (default all 0)")
    t.add_argument("--anti", action="store_true", help="anti-Delaunay class instead of trivalent trees")

    v = sub.add_parser("volume", help="exact volume polynomial")
    v.add_argument("--n", type=int, required=True)
    v.add_argument("--cusps", type=_bits)
    v.add_argument("--route", choices=["anti", "ie"], default="anti")
    v.add_argument("--eval", type=_floats, metavar="L1,...,Ln", help="also evaluate at these lengths")

    s = sub.add_parser("series", help="generating-function coefficients")
    s.add_argument("what", nargs="?", choices=["R", "Z", "eta", "xhat", "variance"], default=None)
    s.add_argument("--what", dest="what_flag", choices=["R", "Z", "eta", "xhat"])
    s.add_argument("--mu", default="1:0", help='atoms "x1:K1,x2:K2"; rationals like 1/3 stay exact')
    s.add_argument("--order", type=int, default=6)
    s.add_argument("--u", default="0")
    s.add_argument("--nmax", type=int, default=200)
    s.add_argument("--out", help="CSV file for the variance table")

    m = sub.add_parser("sample", help="Monte Carlo samples of the distance difference")
    m.add_argument("--n", type=int, required=True)
    m.add_argument("--lengths", type=_floats, required=True, metavar="L1,...,Ln")
    m.add_argument("--count", type=int, required=True)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--max-rejections", type=int, default=10_000)
    m.add_argument("--threads", type=int, help="worker threads (default: WPSPINE_THREADS or CPU count)")
    m.add_argument("--out", help="histogram CSV")
    m.add_argument("--ks", type=float, metavar="L", help="KS statistic against the one-boundary density")

    c = sub.add_parser("verify", help="identity checks")
    c.add_argument("--what", choices=["shears", "poisson", "identities", "E", "hermite"], required=True)
    c.add_argument("--count", type=int, default=100)
    c.add_argument("--seed", type=int, default=12345)

    r = sub.add_parser("reproduce", help="run the acceptance suite")
    r.add_argument("--only", help="comma separated criterion numbers")
    r.add_argument("--tol-scale", type=float, default=1.0, help="multiply every numeric tolerance")
    r.add_argument("--json", help="write the JSON report here")
    return p


COMMANDS = {
    "trees": cmd_trees,
    "volume": cmd_volume,
    "series": cmd_series,
    "sample": cmd_sample,
    "verify": cmd_verify,
    "reproduce": cmd_reproduce,
}


def _write_manifest(args, argv, stdout: str, files: dict[str, bytes]) -> None:
    run_dir = args.run_dir
    if run_dir is None:
        out = getattr(args, "out", None)
        run_dir = os.path.dirname(os.path.abspath(out)) if out else os.getcwd()
    digests = {"stdout": _digest(stdout.encode())}
    digests.update({name: _digest(data) for name, data in files.items()})
    manifest = {
        "command": args.command,
        "argv": list(argv),
        "seed": getattr(args, "seed", None),
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "digests": digests,
    }
    Path(run_dir).mkdir(parents=True, exist_ok=True)
    Path(run_dir, "run.json").write_text(_dump(manifest))


def dispatch(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if args.command == "series":
        args.what = args.what or args.what_flag or "R"
    if args.command == "reproduce" or (args.command == "series" and args.what == "variance"):
        args.seed = None
    start = time.perf_counter()
    try:
        stdout, files = COMMANDS[args.command](args)
        code = EXIT_OK
    except ValidationFailure as exc:
        stdout, files, code = str(exc), {}, EXIT_FAIL
    except (ValueError, ArithmeticError, RuntimeError) as exc:
        print(f"wpspine {args.command}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    for name, data in files.items():
        Path(name).write_bytes(data)
    sys.stdout.write(stdout)
    _write_manifest(args, argv, stdout, files)
    print(f"done in {time.perf_counter() - start:.2f}s", file=sys.stderr)
    return code


def main() -> None:
    sys.exit(dispatch())
