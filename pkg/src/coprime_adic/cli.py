"""Command-line front end: ``coprime-adic {psi,witness,sweep,analyze}``.

Exit codes: 0 verified, 1 falsified, 2 inconclusive, 64 usage or invalid
pair, 65 k outside G_{t1}, 66 malformed weight file.
"""

import argparse
import csv
import io
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

from . import progressions, stability, weights
from .errors import InconclusiveError, InternalConsistencyError, InvalidPairError, PreconditionError, WeightFormatError
from .modarith import gcd

log = logging.getLogger("coprime_adic")

EXIT_OK = 0
EXIT_FALSIFIED = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 64
EXIT_BAD_K = 65
EXIT_BAD_WEIGHT = 66

SWEEP_COLUMNS = ("m", "n", "t_mn", "L", "gamma", "psi", "congruence_ok", "stability_ok")
CLASS_CHOICES = ("ar", "rhr", "a1", "rhinf", "bmo")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse's default exit 2 would collide with "inconclusive"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def default_cache_path():
    env = os.environ.get("ADIC_CACHE")
    if env:
        return Path(env)
    root = os.environ.get("XDG_CACHE_HOME") or Path.home() / ".cache"
    return Path(root) / "coprime-adic" / "psi.jsonl"


def _dump(obj):
    return json.dumps(obj, indent=2, sort_keys=True)


def _rational(text):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _pair(m, n, command):
    try:
        return stability.CoprimePair(m, n)
    except InvalidPairError as exc:
        msg = f"invalid pair ({m}, {n}): {exc.reason}"
        if exc.hint is not None:
            msg += f"; did you mean `{command} {n} {m}`?"
        raise UsageError(msg) from None


# --- cache -------------------------------------------------------------------


def load_cache(path):
    """Read cache lines into ``{(m, n): PsiCertificate}``; bad lines are skipped."""
    out = {}
    if path is None or not path.exists():
        return out
    try:
        text = path.read_text()
    except OSError as exc:
        log.warning("cannot read cache %s: %s", path, exc)
        return out
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            cert = stability.PsiCertificate.from_record(json.loads(line))
        except (ValueError, KeyError, TypeError, PreconditionError) as exc:
            log.warning("skipping corrupt cache line %d in %s: %s", lineno, path, exc)
            continue
        out[(cert.pair.m, cert.pair.n)] = cert
    return out


def append_cache(path, certs):
    if path is None or not certs:
        return
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("a") as fh:
            for cert in certs:
                fh.write(cert.to_json() + "\n")
    except OSError as exc:
        log.warning("cache %s is not writable (%s); continuing without it", path, exc)


# --- psi ---------------------------------------------------------------------


def cmd_psi(args):
    pair = _pair(args.m, args.n, "psi")
    try:
        cert = stability.compute_psi(pair, probe_window=args.probe_window, t_window=args.t_window)
    except InconclusiveError as exc:
        print(_dump({"m": pair.m, "n": pair.n, "status": "inconclusive", "detail": str(exc)}))
        return EXIT_INCONCLUSIVE
    except InternalConsistencyError as exc:
        print(_dump({"m": pair.m, "n": pair.n, "status": "falsified", "detail": str(exc)}))
        return EXIT_FALSIFIED
    congruence = stability.verify_psi_congruence(cert)
    record = cert.to_record()
    record["gamma_seq"] = [str(g) for g in cert.gamma_seq]
    record["congruence_ok"] = congruence
    record["stability_ok"] = True
    record["status"] = "verified" if congruence else "falsified"
    print(_dump(record))
    if args.cache is not None:
        append_cache(Path(args.cache), [cert])
    return EXIT_OK if congruence else EXIT_FALSIFIED


# --- witness -----------------------------------------------------------------


def cmd_witness(args):
    pair = _pair(args.m, args.n, "witness")
    try:
        cert = stability.psi_certificate(pair)
    except InconclusiveError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_INCONCLUSIVE
    lo = progressions.admissible_t1(pair, cert)
    if args.t1 < 1 or (args.t1 < lo and not args.allow_below_threshold):
        raise UsageError(f"t1 = {args.t1} is below the admissible threshold {lo} for {pair}")
    M = progressions.m_modulus(pair, args.t1)
    if not 1 <= args.k <= M or (args.k - 1) % cert.psi:
        nearest = progressions.nearest_valid_k(pair, args.t1, args.k)
        print(
            f"error: k = {args.k} is not in G_{args.t1}{pair} (needs 1 <= k <= {M} and "
            f"k = 1 mod {cert.psi}); nearest valid k is {nearest}",
            file=sys.stderr,
        )
        return EXIT_BAD_K
    try:
        found = progressions.generate_witnesses(
            pair, args.t1, args.k, args.count, allow_below_threshold=args.allow_below_threshold
        )
    except InternalConsistencyError as exc:
        print(f"falsified: {exc}", file=sys.stderr)
        return EXIT_FALSIFIED
    print(_dump([w.to_record() for w in found]))
    return EXIT_OK if all(progressions.verify_witness(w) for w in found) else EXIT_FALSIFIED


# --- sweep -------------------------------------------------------------------


def _sweep_one(job):
    m, n, probe_window, t_window = job
    pair = stability.CoprimePair(m, n)
    try:
        cert = stability.compute_psi(pair, probe_window=probe_window, t_window=t_window)
    except InconclusiveError:
        return m, n, "inconclusive", None
    except InternalConsistencyError as exc:
        return m, n, "falsified", str(exc)
    return m, n, "ok", cert.to_record()


def _sweep_pairs(m_max, n_max):
    for m in range(3, m_max + 1):
        for n in range(2, min(m - 1, n_max) + 1):
            if gcd(m, n) == 1:
                yield m, n


def cmd_sweep(args):
    n_max = args.n_max if args.n_max is not None else args.m_max - 1
    if args.m_max < 3 or not 2 <= n_max < args.m_max:
        raise UsageError("need 2 <= n_max < m_max")
    if args.t_window < 3:
        raise UsageError("--t-window must be >= 3")
    cache_path = None if args.no_cache else Path(args.cache) if args.cache else default_cache_path()
    cached = load_cache(cache_path)

    pairs = list(_sweep_pairs(args.m_max, n_max))
    results = {}
    todo = []
    for m, n in pairs:
        cert = cached.get((m, n))
        if cert is not None and cert.verified_t_lo >= cert.threshold and (
            cert.verified_t_hi - cert.verified_t_lo + 1 >= args.t_window
        ):
            results[(m, n)] = ("ok", cert)
        else:
            todo.append((m, n, args.probe_window, args.t_window))

    if args.parallel and len(todo) > 1:
        with ProcessPoolExecutor() as pool:
            computed = list(pool.map(_sweep_one, todo, chunksize=4))
    else:
        computed = [_sweep_one(job) for job in todo]

    fresh = []
    for m, n, status, payload in computed:
        if status == "ok":
            cert = stability.PsiCertificate.from_record(payload)
            fresh.append(cert)
            results[(m, n)] = ("ok", cert)
        else:
            results[(m, n)] = (status, payload)
    append_cache(cache_path, fresh)

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    exit_code = EXIT_OK
    for m, n in pairs:
        status, cert = results[(m, n)]
        if status != "ok":
            writer.writerow([m, n, "", "", "", "", "", status])
            exit_code = max(exit_code, EXIT_INCONCLUSIVE if status == "inconclusive" else EXIT_FALSIFIED)
            continue
        congruence = stability.verify_psi_congruence(cert)
        if not congruence:
            exit_code = max(exit_code, EXIT_FALSIFIED)
        writer.writerow(
            [m, n, cert.t_mn, cert.L, str(cert.gamma), cert.psi, str(congruence).lower(), "true"]
        )
    sys.stdout.write(buf.getvalue())
    return exit_code


# --- analyze -----------------------------------------------------------------


def _report(w, cls, base, g_max, r, precision, root=None):
    if cls == "ar":
        return weights.characteristic_Ar(w, base, g_max, r, precision, root)
    if cls == "rhr":
        return weights.characteristic_RHr(w, base, g_max, r, precision, root)
    if cls == "a1":
        return weights.characteristic_extremal(w, base, g_max, "A1", precision, root)
    if cls == "rhinf":
        return weights.characteristic_extremal(w, base, g_max, "RHinf", precision, root)
    return weights.bmo_norm_adic(w, base, g_max, log_domain=True, precision=precision, root=root)


def _relative_delta(measured, exact):
    if exact == 0:
        return abs(measured)
    return abs(measured - exact) / abs(exact)


def cmd_analyze(args):
    classes = args.classes or list(CLASS_CHOICES)
    module = None
    if args.module is not None:
        a, b, q, alpha = args.module
        if q.denominator != 1 or alpha.denominator != 1:
            raise UsageError("--module q and alpha must be integers")
        host = None
        if args.host is not None:
            host = weights.AdicInterval(int(q), args.host[0], args.host[1])
        try:
            module = weights.ModuleFamilyParams(a, b, int(q), int(alpha), host)
        except PreconditionError as exc:
            raise UsageError(str(exc)) from None
        w = weights.module_pair_weight(module)
    elif args.weight_file is not None:
        try:
            text = Path(args.weight_file).read_text()
        except OSError as exc:
            print(f"error: cannot read {args.weight_file}: {exc}", file=sys.stderr)
            return EXIT_BAD_WEIGHT
        try:
            w = weights.load_weight(text)
        except WeightFormatError as exc:
            print(f"error: {args.weight_file}: {exc}", file=sys.stderr)
            return EXIT_BAD_WEIGHT
    else:
        raise UsageError("analyze needs a weight file or --module")
    base = args.base if args.base is not None else (module.q if module else 2)
    if base < 2:
        raise UsageError("--base must be >= 2")
    try:
        r = Fraction(args.r)
        reports = [_report(w, c, base, args.g_max, r, args.precision).to_record() for c in classes]
    except PreconditionError as exc:
        raise UsageError(str(exc)) from None
    out = {"reports": reports}
    if module is not None:
        import mpmath

        forms = weights.module_closed_forms(module)
        host = module.host
        with mpmath.workdps(args.precision):
            avg = weights.log_average(w, host, args.precision)
            osc = weights.mean_oscillation(w, host, log_domain=True, precision=args.precision)
            osc = weights._mp(osc)
            exact_avg = forms.avg_f.evaluate(args.precision)
            exact_osc = forms.osc_full.evaluate(args.precision)
            out["module"] = {
                "params": {
                    "a": str(module.a),
                    "b": str(module.b),
                    "q": module.q,
                    "alpha": module.alpha,
                    "host": host.to_record(),
                },
                "closed_forms": forms.to_record(args.precision),
                "measured": {
                    "avg_f": mpmath.nstr(avg, args.precision),
                    "osc_full": mpmath.nstr(osc, args.precision),
                },
                "relative_delta": {
                    "avg_f": mpmath.nstr(_relative_delta(avg, exact_avg), 5),
                    "osc_full": mpmath.nstr(_relative_delta(osc, exact_osc), 5),
                },
            }
    print(_dump(out))
    return EXIT_OK


# --- entry point ---------------------------------------------------------------


def build_parser():
    parser = _Parser(prog="coprime-adic", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("psi", help="certify psi(m, n) for one pair")
    p.add_argument("m", type=int)
    p.add_argument("n", type=int)
    p.add_argument("--t-window", type=int, default=stability.DEFAULT_T_WINDOW)
    p.add_argument("--probe-window", type=int, default=stability.DEFAULT_PROBE_WINDOW)
    p.add_argument("--cache", default=None, help="append the certificate to this JSON-lines file")
    p.set_defaults(func=cmd_psi)

    p = sub.add_parser("witness", help="progression witnesses (t2, j) for k in G_t1")
    p.add_argument("m", type=int)
    p.add_argument("n", type=int)
    p.add_argument("t1", type=int)
    p.add_argument("k", type=int)
    p.add_argument("count", type=int, nargs="?", default=progressions.DEFAULT_WITNESS_COUNT)
    p.add_argument("--allow-below-threshold", action="store_true")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("sweep", help="tabulate psi over a grid of coprime pairs as CSV")
    p.add_argument("m_max", type=int)
    p.add_argument("--n-max", type=int, default=None)
    p.add_argument("--t-window", type=int, default=stability.DEFAULT_T_WINDOW)
    p.add_argument("--probe-window", type=int, default=stability.DEFAULT_PROBE_WINDOW)
    p.add_argument("--parallel", action="store_true")
    p.add_argument("--cache", default=None, help="cache path (default: $ADIC_CACHE or ~/.cache)")
    p.add_argument("--no-cache", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("analyze", help="adic characteristics of a step weight")
    p.add_argument("weight_file", nargs="?")
    p.add_argument("--base", type=int, default=None)
    p.add_argument("--g-max", type=int, default=6)
    p.add_argument("--class", dest="classes", action="append", choices=CLASS_CHOICES)
    p.add_argument("--r", type=_rational, default=Fraction(2))
    p.add_argument("--precision", type=int, default=weights.DEFAULT_PRECISION)
    p.add_argument("--module", nargs=4, type=_rational, metavar=("A", "B", "Q", "ALPHA"))
    p.add_argument("--host", nargs=2, type=int, metavar=("GEN", "INDEX"))
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
