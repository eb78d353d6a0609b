"""Command-line runner: one subcommand per pipeline, CSV data plus a JSON manifest.

Exit status: 0 on success, 1 when a parameter violates a precondition,
2 when a quadrature or a path fails to converge.
"""

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .errors import ConvergenceError, PreconditionError
from .fokker_planck import flux_scaled, half_masses, stationary_density
from .special import QuadratureSpec
from .stochastic import (ComplexPhase, FrequencyProfile, NoiseSpec, default_theta_max,
                         theta_histogram, worker_count)
from .thermo import thermo_sweep
from .transitions import TRANSITION_SPEC, TWO_SIDED_SPEC, delta_grid, gamma_of_rho
from .wavefunc import deterministic_frame, s_local

SUBCOMMANDS = ("stationary-dist", "vacuum-transition", "thermo", "sde-ensemble", "smatrix",
               "selftest")


class _UsageError(PreconditionError):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; here that slot belongs to non-convergence
    def error(self, message):
        raise _UsageError(message)


def parse_grid(text):
    """``"a,b,c"`` or ``"start:stop:count"`` (inclusive, evenly spaced) to a float array."""
    text = str(text).strip()
    try:
        if ":" in text:
            a, b, n = text.split(":")
            n = int(n)
            if n < 1:
                raise ValueError
            return np.linspace(float(a), float(b), n)
        vals = np.array([float(v) for v in text.split(",") if v.strip()])
    except ValueError:
        raise PreconditionError(f"cannot parse grid {text!r}") from None
    if vals.size == 0:
        raise PreconditionError("empty grid")
    return vals


def _fmt(v):
    return "%.16e" % v


def _write_rows(path, fmt, header, rows):
    if fmt == "json":
        with open(path, "w") as fh:
            json.dump({"columns": header,
                       "rows": [[_fmt(v) if isinstance(v, float) else v for v in r]
                                for r in rows]}, fh, indent=1)
            fh.write("\n")
        return
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for r in rows:
            fh.write(",".join(_fmt(v) if isinstance(v, float) else str(v) for v in r) + "\n")


def _positive(name, arr):
    arr = np.atleast_1d(arr)
    if not np.all(np.isfinite(arr) & (arr > 0)):
        raise PreconditionError(f"{name} must be positive and finite")


# --------------------------------------------------------------------------- runners

def _run_stationary(a, workers):
    lams = parse_grid(a.lam)
    thetas = parse_grid(a.theta)
    _positive("lambda", lams)
    if not np.isfinite(a.gamma):
        raise PreconditionError("gamma must be finite")
    rows, summary = [], []
    for lam in lams:
        q = stationary_density(lam, a.gamma, thetas)
        j = float(flux_scaled(lam * a.gamma))
        pos, neg = half_masses(lam, a.gamma)
        summary.append({"lambda": _fmt(lam), "flux": _fmt(j), "mass": _fmt(pos + neg)})
        rows.extend([float(lam), float(a.gamma), float(t), float(v)] for t, v in zip(thetas, q))
    return ["lambda", "gamma", "theta_bar", "q_s"], rows, summary, QuadratureSpec()


def _run_transition(a, workers):
    lams = parse_grid(a.lam)
    rhos = parse_grid(a.rho)
    _positive("lambda", lams)
    for r in rhos:
        gamma_of_rho(r)
    try:
        lp = float(a.lambda_plus)
    except ValueError:
        raise PreconditionError("lambda_plus must be a number or inf") from None
    if not lp > 0:
        raise PreconditionError("lambda_plus must be positive")
    res = delta_grid(lams, rhos, lp, workers=workers)
    rows = [[r.rho, r.lam, r.delta] for r in res]
    spec = TRANSITION_SPEC if lp == math.inf else TWO_SIDED_SPEC
    summary = [{"rho": _fmt(r.rho), "lambda": _fmt(r.lam), "i1": _fmt(r.i1), "i2": _fmt(r.i2)}
               for r in res]
    return ["rho", "lambda", "delta"], rows, summary, spec


def _run_thermo(a, workers):
    lps = parse_grid(a.lambda_plus)
    _positive("lambda_plus", lps)
    _positive("omega_as", a.omega_as)
    _positive("k", a.k)
    pts = thermo_sweep(lps, a.omega_as, a.k, workers=workers)
    rows = [[p.lambda_plus, p.e_osc, p.level_width, p.entropy] for p in pts]
    summary = [{"lambda_plus": _fmt(p.lambda_plus), "beta_plus": _fmt(p.beta_plus)} for p in pts]
    return ["lambda_plus", "e_osc", "width", "entropy"], rows, summary, QuadratureSpec()


def _run_sde(a, workers):
    prof = FrequencyProfile(kind=a.profile, omega_in=a.omega_in,
                            omega_out=a.omega_out if a.omega_out is not None else a.omega_in,
                            t_c=a.t_c)
    noise = NoiseSpec(epsilon=a.epsilon, seed=a.seed)
    _positive("epsilon", a.epsilon)
    if a.n_traj < 1:
        raise PreconditionError("n_traj must be at least 1")
    edges = parse_grid(a.edges)
    if edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise PreconditionError("edges must be increasing with at least two entries")
    theta_max = default_theta_max(prof, noise) if a.theta_max is None else a.theta_max
    initial = None
    if a.start == "reinjected":
        initial = ComplexPhase(theta=theta_max, phi=0.0)
    h = theta_histogram(prof, noise, a.n_traj, a.t0, a.t_final, a.dt, theta_max, edges,
                        sample_from=a.sample_from, sample_every=a.sample_every,
                        initial=initial, workers=workers)
    p, under, over = h.probabilities()
    rows = [[float(lo), float(hi), int(c), float(pp)]
            for lo, hi, c, pp in zip(edges[:-1], edges[1:], h.counts, p)]
    summary = [{"underflow": h.underflow, "overflow": h.overflow,
                "reinjections": h.reinjections, "samples": h.total}]
    return ["theta_lo", "theta_hi", "count", "probability"], rows, summary, None


def _run_smatrix(a, workers):
    _positive("omega_in", a.omega_in)
    _positive("omega_out", a.omega_out)
    s = s_local(a.n_max, deterministic_frame(a.omega_in, 0.0),
                deterministic_frame(a.omega_out, 0.0))
    rows = []
    for n in range(a.n_max + 1):
        for m in range(a.n_max + 1):
            v = complex(s.entries[n, m])
            rows.append([n, m, v.real, v.imag, abs(v) ** 2])
    summary = [{"parity_defect": _fmt(s.parity_defect())}]
    return ["n", "m", "re", "im", "abs2"], rows, summary, None


def _run_selftest(a, workers):
    from .selftest import run_checks
    checks = run_checks(workers=workers)
    rows = [[c.name, float(c.value), float(c.tolerance), "pass" if c.passed else "fail"]
            for c in checks]
    summary = [{"failed": [c.name for c in checks if not c.passed]}]
    return ["check", "value", "tolerance", "status"], rows, summary, None


_RUNNERS = {
    "stationary-dist": _run_stationary,
    "vacuum-transition": _run_transition,
    "thermo": _run_thermo,
    "sde-ensemble": _run_sde,
    "smatrix": _run_smatrix,
    "selftest": _run_selftest,
}


# --------------------------------------------------------------------------- parser

def build_parser():
    p = _Parser(prog="qrho", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    def common(sp, default_out):
        sp.add_argument("--output", default=default_out, help="data file path")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--workers", type=int, default=None,
                        help="worker threads (default: QRHO_WORKERS or 1)")
        sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("stationary-dist", help="stationary phase density on a grid")
    sp.add_argument("--lambda", dest="lam", default="0.5,5,50")
    sp.add_argument("--gamma", type=float, default=1.0)
    sp.add_argument("--theta", default="-10:10:201", help="theta_bar grid")
    common(sp, "stationary_dist.csv")

    sp = sub.add_parser("vacuum-transition", help="vacuum-to-vacuum probability")
    sp.add_argument("--lambda", dest="lam", default="0.3,1,3")
    sp.add_argument("--rho", default="0:0.9:10")
    sp.add_argument("--lambda-plus", default="inf",
                    help="out-channel coupling; inf selects the noiseless out channel")
    common(sp, "vacuum_transition.csv")

    sp = sub.add_parser("thermo", help="ground-state energy, width and entropy")
    sp.add_argument("--lambda-plus", default="0.1,1,10,100,1000")
    sp.add_argument("--omega-as", type=float, default=1.0)
    sp.add_argument("--k", type=float, default=1.0, help="Boltzmann constant")
    common(sp, "thermo.csv")

    sp = sub.add_parser("sde-ensemble", help="pooled theta histogram of an SDE ensemble")
    sp.add_argument("--profile", choices=("constant", "step", "smooth-tanh"), default="constant")
    sp.add_argument("--omega-in", type=float, default=1.0)
    sp.add_argument("--omega-out", type=float, default=None)
    sp.add_argument("--t-c", type=float, default=0.0)
    sp.add_argument("--epsilon", type=float, default=1.0)
    sp.add_argument("--dt", type=float, default=1e-3)
    sp.add_argument("--t0", type=float, default=0.0)
    sp.add_argument("--t-final", type=float, default=8.0)
    sp.add_argument("--n-traj", type=int, default=1000)
    sp.add_argument("--theta-max", type=float, default=None)
    sp.add_argument("--start", choices=("fixed-point", "reinjected"), default="reinjected")
    sp.add_argument("--sample-from", type=float, default=4.0)
    sp.add_argument("--sample-every", type=int, default=100)
    sp.add_argument("--edges", default="-40:40:161")
    common(sp, "sde_ensemble.csv")

    sp = sub.add_parser("smatrix", help="local S-matrix of a sudden frequency step")
    sp.add_argument("--omega-in", type=float, default=1.0)
    sp.add_argument("--omega-out", type=float, default=4.0)
    sp.add_argument("--n-max", type=int, default=8)
    common(sp, "smatrix.csv")

    sp = sub.add_parser("selftest", help="fast invariant checks across all modules")
    common(sp, "selftest.csv")
    return p


_NOT_PARAMETERS = ("subcommand", "output", "format", "workers", "seed")


def _manifest_path(output):
    return output + ".manifest.json"


def manifest_to_argv(manifest, output=None):
    """Rebuild an argument list from a manifest, optionally redirecting the output."""
    argv = [manifest["subcommand"]]
    for key, val in manifest["parameters"].items():
        if val is None:
            continue
        flag = "--lambda" if key == "lam" else "--" + key.replace("_", "-")
        # "=" keeps values such as "-40:40:161" from reading as flags
        argv.append(f"{flag}={val}")
    argv += [f"--seed={manifest['seed']}", f"--format={manifest['format']}"]
    argv.append(f"--output={output if output is not None else manifest['outputs'][0]}")
    return argv


def run(argv=None):
    """Parse, validate, compute and write; return the exit status."""
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        if argv and argv[0] == "--from-manifest":
            if len(argv) < 2:
                raise PreconditionError("--from-manifest needs a path")
            with open(argv[1]) as fh:
                manifest = json.load(fh)
            out = argv[argv.index("--output") + 1] if "--output" in argv else None
            argv = manifest_to_argv(manifest, out)
        args = build_parser().parse_args(argv)
        workers = worker_count() if args.workers is None else max(1, args.workers)
        header, rows, summary, spec = _RUNNERS[args.subcommand](args, workers)
    except PreconditionError as exc:
        print(f"qrho: precondition violated: {exc}", file=sys.stderr)
        return 1
    except ConvergenceError as exc:
        print(f"qrho: did not converge: {exc} (residual {exc.residual!r})", file=sys.stderr)
        return 2

    _write_rows(args.output, args.format, header, rows)
    params = {k: v for k, v in vars(args).items() if k not in _NOT_PARAMETERS}
    tolerances = None
    if spec is not None:
        tolerances = {"relative_tolerance": spec.relative_tolerance,
                      "absolute_floor": spec.absolute_floor,
                      "max_refinements": spec.max_refinements}
    manifest = {"subcommand": args.subcommand, "parameters": params, "seed": args.seed,
                "format": args.format, "tolerances": tolerances, "version": __version__,
                "outputs": [args.output], "summary": summary}
    with open(_manifest_path(args.output), "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")
    print(f"{args.subcommand}: {len(rows)} rows -> {args.output}")
    for item in summary[:20]:
        print("  " + ", ".join(f"{k}={v}" for k, v in item.items()))
    if args.subcommand == "selftest" and summary[0]["failed"]:
        return 2
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
