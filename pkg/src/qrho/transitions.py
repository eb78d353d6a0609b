"""Averaged vacuum-to-vacuum transition probability for a step barrier.

With the in and out phases drawn from their stationary densities, the
averaged vacuum amplitude is (1 - rho)^{1/4} (I1 - i I2) with

    I_{1,2} = E[ sqrt((a +- 1) / (2 a^2)) ],
    a = sqrt(1 + (theta - sqrt(lam/lam_plus) theta_plus)^2 / (lam gamma)),

and the probability is Delta = sqrt(1 - rho) (I1^2 + I2^2).  When the out
channel is noiseless the double average collapses to a single one over theta
with a_bar = sqrt(1 + theta^2 / (lam gamma)) and both weights taken with the
``+`` sign, as printed for that case.

Densities are evaluated on the compact angle phi = atan(theta / L), where
Q dtheta/dphi = Q (L + theta^2 / L) is smooth and bounded (Q ~ J / theta^2),
and replaced by an adaptively sized Chebyshev interpolant so that the nested
quadrature does not re-solve the density at every node.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import csv
import math

import numba
import numpy as np
from numpy.polynomial import Chebyshev

from .errors import ConvergenceError, PreconditionError
from .fokker_planck import stationary_density
from .special import QuadratureSpec, integrate

__all__ = [
    "TRANSITION_SPEC",
    "TWO_SIDED_SPEC",
    "TransitionResult",
    "DensityInterpolant",
    "gamma_of_rho",
    "density_interpolant",
    "delta_00",
    "delta_00_simplified",
    "delta_grid",
    "write_fig2_csv",
]

TRANSITION_SPEC = QuadratureSpec(relative_tolerance=1e-9)
# the nested form only needs 1e-6 on Delta and costs ~100x the single one
TWO_SIDED_SPEC = QuadratureSpec(relative_tolerance=1e-7)
_HALF_PI = 0.5 * math.pi


@dataclass(frozen=True)
class TransitionResult:
    """Vacuum-to-vacuum probability and the two averaged amplitudes.

    ``lambda_plus`` is ``inf`` for the noiseless out channel.
    """

    lam: float
    lambda_plus: float
    rho: float
    gamma: float
    i1: float
    i2: float
    delta: float
    form: str


def gamma_of_rho(rho):
    """Squared frequency ratio ((1 + sqrt rho) / (1 - sqrt rho))^2 of a step barrier."""
    rho = float(rho)
    if not 0.0 <= rho < 1.0:
        raise PreconditionError("reflection coefficient rho must lie in [0, 1)")
    s = math.sqrt(rho)
    return ((1.0 + s) / (1.0 - s)) ** 2


def _check(lam, rho):
    if not (np.isfinite(lam) and lam > 0):
        raise PreconditionError("lambda must be positive and finite")
    return gamma_of_rho(rho)


@numba.njit(cache=True)
def _clenshaw(coef, x):
    out = np.empty(x.size)
    n = coef.size
    for i in range(x.size):
        t2 = 2.0 * x[i]
        b1 = 0.0
        b2 = 0.0
        for k in range(n - 1, 0, -1):
            b1, b2 = coef[k] + t2 * b1 - b2, b1
        out[i] = coef[0] + x[i] * b1 - b2
    return out


@dataclass(frozen=True)
class DensityInterpolant:
    """Q(theta) dtheta/dphi on phi in (-pi/2, pi/2), theta = length * tan(phi)."""

    lam: float
    gamma: float
    length: float
    poly: Chebyshev
    tail: float

    def __call__(self, phi):
        x = np.atleast_1d(np.asarray(phi, dtype=float)) / _HALF_PI
        v = _clenshaw(self.poly.coef, x)
        return v if np.ndim(phi) else float(v[0])

    def theta(self, phi):
        return self.length * np.tan(phi)


def density_interpolant(lam, gam, spec=TRANSITION_SPEC, tol=1e-13, max_degree=4096):
    """Chebyshev interpolant of the stationary density in the angle variable.

    The degree doubles from 32 until the trailing coefficients fall below
    ``tol`` relative to the largest one.
    """
    c = lam * gam
    length = max(1.0, math.sqrt(abs(c)))

    def g(phi):
        th = length * np.tan(phi)
        return stationary_density(lam, gam, th, spec) * (length + th * th / length)

    deg = 32
    while True:
        poly = Chebyshev.interpolate(g, deg, domain=[-_HALF_PI, _HALF_PI])
        coef = np.abs(poly.coef)
        tail = float(coef[-8:].max() / coef.max())
        if tail < tol:
            return DensityInterpolant(lam=float(lam), gamma=float(gam), length=length,
                                      poly=poly, tail=tail)
        if deg >= max_degree:
            raise ConvergenceError(
                f"density interpolant did not resolve at degree {deg} (tail {tail:.3g})",
                estimate=poly, residual=tail)
        deg *= 2


def _weights(u2):
    """sqrt((a + 1) / (2 a^2)) and sqrt((a - 1) / (2 a^2)) for a = sqrt(1 + u2)."""
    a = np.sqrt(1.0 + u2)
    am1 = u2 / (a + 1.0)
    return np.sqrt((a + 1.0) / (2.0 * a * a)), np.sqrt(am1 / (2.0 * a * a))


def delta_00_simplified(lam, rho, spec=TRANSITION_SPEC):
    """Noiseless-out-channel probability sqrt(1 - rho) (I1^2 + I2^2), I1 = I2."""
    gam = _check(lam, rho)
    dens = density_interpolant(lam, gam, spec)
    c = lam * gam

    def f(phi):
        th = dens.theta(phi)
        wp, _ = _weights(th * th / c)
        return dens(phi) * wp

    i1 = float(integrate(f, -_HALF_PI, _HALF_PI, spec).value)
    delta = math.sqrt(1.0 - rho) * 2.0 * i1 * i1
    return TransitionResult(lam=float(lam), lambda_plus=math.inf, rho=float(rho), gamma=gam,
                            i1=i1, i2=i1, delta=delta, form="simplified")


def delta_00(lam, lambda_plus, rho, spec=TWO_SIDED_SPEC, max_outer=1024):
    """Two-sided probability sqrt(1 - rho) (I1^2 + I2^2) by nested quadrature.

    The inner integral over theta_plus at fixed theta is written in the
    difference d = theta - s theta_plus, so the kink of the ``-`` weight sits
    at d = 0 for every outer node; it is adaptive and shared by all outer
    nodes.  The outer integral over theta uses Gauss-Legendre rules in the
    angle variable, doubled until I1 and I2 change by less than the tolerance.
    ``lambda_plus = inf`` selects the noiseless out channel.
    """
    if lambda_plus == math.inf:
        return delta_00_simplified(lam, rho, spec)
    gam = _check(lam, rho)
    if not (np.isfinite(lambda_plus) and lambda_plus > 0):
        raise PreconditionError("lambda_plus must be positive")
    din = density_interpolant(lam, gam, spec)
    dout = density_interpolant(lambda_plus, gam, spec)
    c = lam * gam
    rc = math.sqrt(c)
    s = math.sqrt(lam / lambda_plus)
    lp = dout.length

    def pair(n):
        # phi = (pi/2) sin(pi x / 2) turns the sqrt(pi/2 - |phi|) endpoint
        # behaviour of the weights into an analytic one
        x, wq = np.polynomial.legendre.leggauss(n)
        phi = _HALF_PI * np.sin(_HALF_PI * x)
        th = din.theta(phi)
        outer_w = _HALF_PI ** 2 * np.cos(_HALF_PI * x) * wq * din(phi)

        def f(x):
            # inner angle psi = (pi/2) sin(pi x / 2), d = sqrt(c) tan(psi)
            psi = _HALF_PI * math.sin(_HALF_PI * x)
            d = rc * math.tan(psi)
            jac = (c + d * d) / rc * _HALF_PI ** 2 * math.cos(_HALF_PI * x)
            tp = (th - d) / s
            q = dout(np.arctan(tp / lp)) / (lp + tp * tp / lp)
            wp, wm = _weights(d * d / c)
            v = outer_w * q * (jac / s)
            return np.concatenate([v * wp, v * wm])

        tot = integrate(f, -1.0, 0.0, spec).value + integrate(f, 0.0, 1.0, spec).value
        return tot[:n].sum(), tot[n:].sum()

    n = 32
    prev = pair(n)
    while True:
        n *= 2
        cur = pair(n)
        change = max(abs(cur[0] - prev[0]), abs(cur[1] - prev[1]))
        if change <= spec.relative_tolerance * max(abs(cur[0]), 1e-300):
            break
        if n >= max_outer:
            raise ConvergenceError(
                f"outer rule did not settle at {n} nodes (change {change:.3g})",
                estimate=cur, residual=change)
        prev = cur
    i1, i2 = cur
    delta = math.sqrt(1.0 - rho) * (i1 * i1 + i2 * i2)
    return TransitionResult(lam=float(lam), lambda_plus=float(lambda_plus), rho=float(rho),
                            gamma=gam, i1=float(i1), i2=float(i2), delta=float(delta),
                            form="two-sided")


def delta_grid(lambdas, rhos, lambda_plus=math.inf, spec=None, workers=1):
    """Evaluate on the (rho, lambda) product grid, rho-major; order never depends on workers."""
    points = [(float(r), float(lm)) for r in rhos for lm in lambdas]
    if spec is None:
        spec = TRANSITION_SPEC if lambda_plus == math.inf else TWO_SIDED_SPEC

    def one(p):
        return delta_00(p[1], lambda_plus, p[0], spec)

    if workers <= 1:
        return [one(p) for p in points]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, points))


def write_fig2_csv(path, results):
    """Write ``rho,lambda,delta`` rows in the given order."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["rho", "lambda", "delta"])
        for r in results:
            w.writerow([f"{r.rho:.16e}", f"{r.lam:.16e}", f"{r.delta:.16e}"])
