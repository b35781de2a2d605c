"""Command-line front end.

Exit codes: 0 on success or an "exists" verdict, 2 when ``check`` finds that
the process does not exist, 1 on any error.
"""

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import existence, kernels, simulate, spectra
from .errors import BfbmError
from .existence import ScanConfig, Status
from .kernels import KernelId, Params

EXIT_OK, EXIT_ERROR, EXIT_NOT_EXISTS = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which is reserved for "not exists"
    def error(self, message):
        raise UsageError(message)


def fmt(x):
    """17 significant digits, enough to round-trip any double."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return "" if x is None else str(x)


def _positive(text):
    v = float(text)
    if not (math.isfinite(v) and v > 0):
        raise argparse.ArgumentTypeError(f"expected a finite positive number, got {text!r}")
    return v


def _finite(text):
    v = float(text)
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"expected a finite number, got {text!r}")
    return v


def _count(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


def _seed(text):
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _log_grid(text):
    try:
        n, lo, hi = text.split(",")
        n, lo, hi = int(n), float(lo), float(hi)
    except ValueError:
        raise argparse.ArgumentTypeError("--log-grid expects N,LO,HI") from None
    if n < 1 or not (0 < lo < hi) or not math.isfinite(hi):
        raise argparse.ArgumentTypeError("--log-grid needs N >= 1 and 0 < LO < HI")
    return n, lo, hi


def thread_cap():
    """Worker count: the BFBM_THREADS value if set, else the CPU count."""
    env = os.environ.get("BFBM_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise UsageError(f"BFBM_THREADS must be an integer, got {env!r}") from None
        return max(n, 1)
    return os.cpu_count() or 1


def _scan_flags(p, u=True, k_tol=True):
    if u:
        p.add_argument("--u-max", type=_positive, default=50.0)
        p.add_argument("--u-step", type=_positive, default=0.01)
    if k_tol:
        p.add_argument("--k-tol", type=_positive, default=1e-3)


def build_parser():
    ap = _Parser(prog="bfbm", description="Bifractional Brownian motion toolkit")
    ap.add_argument("--json", action="store_true", help="emit JSON lines instead of CSV")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("cov", help="evaluate a covariance kernel")
    p.add_argument("--kind", choices=[k.value for k in KernelId], required=True)
    p.add_argument("--h", type=_positive, default=0.5)
    p.add_argument("--k", type=_positive, default=1.0)
    p.add_argument("--s", type=_finite)
    p.add_argument("--t", type=_finite)
    p.add_argument("--stationary", action="store_true")
    p.add_argument("--tau", type=_finite)

    p = sub.add_parser("spectrum", help="tabulate a spectral density")
    p.add_argument("--kind", choices=[k.value for k in spectra.SpectrumId], required=True)
    p.add_argument("--h", type=_positive, default=0.5)
    p.add_argument("--k", type=_positive, default=0.5)
    p.add_argument("--u-min", type=_finite, default=0.0)
    p.add_argument("--u-max", type=_finite, default=50.0)
    p.add_argument("--u-step", type=_positive, default=0.01)

    p = sub.add_parser("check", help="existence verdict for (H, K)")
    p.add_argument("--h", type=_positive, required=True)
    p.add_argument("--k", type=_positive, required=True)
    p.add_argument("--refine", action="store_true")
    _scan_flags(p, k_tol=False)

    p = sub.add_parser("khat", help="covariance bound K-hat(H)")
    p.add_argument("--h", type=_positive, required=True)
    _scan_flags(p, u=False)

    p = sub.add_parser("kbar", help="spectral boundary K-bar(H)")
    p.add_argument("--h", type=_positive, required=True)
    _scan_flags(p)

    p = sub.add_parser("table", help="rows h, K-bar(h), K-hat(h)")
    p.add_argument("--h", type=_positive, action="append", required=True)
    _scan_flags(p)

    p = sub.add_parser("simulate", help="sample paths")
    p.add_argument("--method", choices=["cholesky", "decomp", "h1series"], required=True)
    p.add_argument("--h", type=_positive, default=0.5)
    p.add_argument("--k", type=_positive, default=1.0)
    p.add_argument("--t-max", type=_positive, default=1.0)
    p.add_argument("--n-points", type=_count, default=100)
    p.add_argument("--paths", type=_count, default=1)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--n-terms", type=int, default=40)
    p.add_argument("--tail", choices=["exact", "error", "ignore"], default="exact")

    p = sub.add_parser("psd-probe", help="smallest Gram-matrix eigenvalue")
    p.add_argument("--kind", choices=[k.value for k in KernelId if k is not KernelId.BERNSTEIN],
                   required=True)
    p.add_argument("--h", type=_positive, default=0.5)
    p.add_argument("--k", type=_positive, default=1.0)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--points-file")
    g.add_argument("--log-grid", type=_log_grid)
    p.add_argument("--jitter-tol", type=_positive, default=1e-10)

    p = sub.add_parser("fourier-check", help="numerical Fourier transform of a spectral density")
    p.add_argument("--kind", choices=["bfbm", "fbm", "ln", "lnr"], required=True)
    p.add_argument("--h", type=_positive, default=0.5)
    p.add_argument("--k", type=_positive, default=0.5)
    p.add_argument("--tau", type=_finite, required=True)
    return ap


# ---------------------------------------------------------------------------


class _Writer:
    def __init__(self, out, as_json):
        self.out, self.as_json = out, as_json
        self.fields = None
        self._csv = csv.writer(out, lineterminator="\n")

    def header(self, fields):
        self.fields = fields
        if not self.as_json:
            self._csv.writerow(fields)

    def row(self, *values):
        if self.as_json:
            rec = {f: _json_value(v) for f, v in zip(self.fields, values)}
            self.out.write(json.dumps(rec) + "\n")
        else:
            self._csv.writerow([fmt(v) for v in values])


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    return v


def _cfg(a):
    return existence.with_overrides(
        ScanConfig(),
        u_max=getattr(a, "u_max", None),
        u_step=getattr(a, "u_step", None),
        k_tol=getattr(a, "k_tol", None),
        refine=getattr(a, "refine", None),
    )


def _cmd_cov(a, w):
    p = Params(a.h, a.k)
    if a.stationary:
        if a.tau is None:
            raise UsageError("--stationary needs --tau")
        val = kernels.stat_cov(a.kind, a.h, a.k, a.tau)
        w.header(["kind", "h", "k", "tau", "value"])
        w.row(a.kind, a.h, a.k, a.tau, val)
        return EXIT_OK
    if a.s is None or a.t is None:
        raise UsageError("cov needs --s and --t (or --stationary --tau)")
    bern = None
    if a.kind == KernelId.BERNSTEIN.value:
        bern = kernels.power_bernstein(a.k, kernels.fbm_variance(a.h))
    val = kernels.covariance(a.kind, p, a.s, a.t, bern)
    w.header(["kind", "h", "k", "s", "t", "value"])
    w.row(a.kind, a.h, a.k, a.s, a.t, val)
    return EXIT_OK


def _cmd_spectrum(a, w):
    if a.u_max < a.u_min:
        raise UsageError("--u-max must not be below --u-min")
    n = int(math.floor((a.u_max - a.u_min) / a.u_step + 1e-9))
    u = a.u_min + a.u_step * np.arange(n + 1)
    f = np.atleast_1d(spectra.spectral_density(a.kind, a.h, a.k, u))
    w.header(["u", "f"])
    for x, y in zip(u, f):
        w.row(x, y)
    return EXIT_OK


def _cmd_check(a, w):
    v = existence.check(Params(a.h, a.k), _cfg(a))
    line = v.status.value
    if v.detail:
        line += f" ({v.detail})"
    d = v.to_dict()
    if w.as_json:
        w.out.write(json.dumps(d) + "\n")
    else:
        w.out.write(line + "\n")
        w.out.write(json.dumps({k: d[k] for k in ("status", "reason", "witness_u", "gap")}) + "\n")
    return EXIT_NOT_EXISTS if v.status is Status.NOT_EXISTS else EXIT_OK


def _cmd_khat(a, w):
    val = existence.khat(a.h, _cfg(a))
    w.header(["h", "k_hat"])
    w.row(a.h, val)
    return EXIT_OK


def _cmd_kbar(a, w):
    val = existence.kbar(a.h, _cfg(a))
    w.header(["h", "k_bar"])
    w.row(a.h, val)
    return EXIT_OK


def _cmd_table(a, w):
    cfg = _cfg(a)
    for h in a.h:
        if not h > 1.0:
            raise UsageError(f"table needs every --h > 1, got {h:g}")
    rows = existence.boundary_table(a.h, cfg, workers=min(thread_cap(), len(a.h)))
    w.header(["h", "k_bar", "k_hat"])
    for r in rows:
        w.row(r.h, r.k_bar, r.k_hat)
    return EXIT_OK


def _cmd_simulate(a, w):
    times = a.t_max * np.arange(1, a.n_points + 1) / a.n_points
    rng = simulate.RngSpec(a.seed)
    workers = thread_cap()
    if a.method == "cholesky":
        paths = simulate.sample_cholesky_many("bfbm", Params(a.h, a.k), times, rng, a.paths,
                                              workers=workers)
    elif a.method == "decomp":
        paths = simulate.sample_decomposition_many(Params(a.h, a.k), times, rng, a.paths,
                                                   workers=workers)
    else:
        if a.h != 1.0:
            raise UsageError("h1series simulates H = 1 only")
        paths = simulate.sample_h1_series_many(a.k, times, rng, a.paths, n_terms=a.n_terms,
                                               tail=a.tail, workers=workers)
    w.header(["path_id", "t", "value"])
    for i, path in enumerate(paths):
        for t, v in zip(path.times, path.values):
            w.row(i, t, v)
    return EXIT_OK


def _cmd_psd(a, w):
    if a.points_file:
        with open(a.points_file) as fh:
            pts = np.array([float(x) for x in fh.read().replace(",", " ").split()])
    else:
        n, lo, hi = a.log_grid
        pts = np.geomspace(lo, hi, n)
    min_eig, psd = existence.gram_psd_probe(a.kind, Params(a.h, a.k), pts, a.jitter_tol)
    w.header(["min_eigenvalue", "psd"])
    w.row(min_eig, psd)
    return EXIT_OK


def _cmd_fourier(a, w):
    quad = spectra.fourier_check(a.kind, a.h, a.k, a.tau)
    exact = kernels.stat_cov(a.kind, a.h, a.k, a.tau)
    w.header(["tau", "quadrature", "closed_form", "abs_err"])
    w.row(a.tau, quad, exact, abs(quad - exact))
    return EXIT_OK


def run(argv=None, out=None, err=None):
    """Run one command; returns the exit code."""
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    try:
        a = build_parser().parse_args(argv)
        w = _Writer(out, a.json)
        cmd = a.command
        if cmd == "check":
            return _cmd_check(a, w)
        handler = {
            "cov": _cmd_cov, "spectrum": _cmd_spectrum, "khat": _cmd_khat, "kbar": _cmd_kbar,
            "table": _cmd_table, "simulate": _cmd_simulate, "psd-probe": _cmd_psd,
            "fourier-check": _cmd_fourier,
        }[cmd]
        return handler(a, w)
    except (UsageError, BfbmError, OSError, ValueError) as exc:
        err.write(f"bfbm: error: {exc}\n")
        return EXIT_ERROR


def run_capture(argv):
    """(exit code, stdout text, stderr text) for ``argv``; handy in tests."""
    out, err = io.StringIO(), io.StringIO()
    code = run(argv, out, err)
    return code, out.getvalue(), err.getvalue()


def main():
    sys.exit(run())
