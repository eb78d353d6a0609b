"""Stationary Fokker-Planck objects for the Riccati phase process.

In scaled units (theta_bar = theta / eps^{1/3}, c = lambda * gamma) the phase
obeys d theta = -(theta^2 + c) dt + noise of unit diffusion constant.  Its
stationary density with constant probability flux J through theta = -inf is

    Q(theta) = J * int_0^inf exp(-(c + theta^2) y + theta y^2 - y^3/3) dy,
    J = 1 / (pi^2 A(-c)),   A = Ai^2 + Bi^2,

which satisfies (theta^2 + c) Q + dQ/dtheta = J exactly.  The same Airy
modulus gives the integrated density of states and the bound-state counts.
"""

from dataclasses import dataclass
import csv
import math
import os

import numpy as np
from scipy.special import erf

from .errors import PreconditionError
from .special import QuadratureSpec, integrate, log_airy_modulus_sq

__all__ = [
    "StationaryDist",
    "SpectralCounts",
    "KernelValue",
    "transition_kernel",
    "flux_scaled",
    "log_flux_scaled",
    "flux_scaled_quadrature",
    "stationary_density",
    "stationary_density_and_derivative",
    "stationary_dist",
    "half_masses",
    "flux_residual",
    "n_sigma",
    "n_sigma_asymptotic",
    "n_e",
    "n_e_asymptotic",
    "p_e",
    "spectral_counts",
    "write_fig1_csv",
]

_LOG_PI2 = 2.0 * math.log(math.pi)


@dataclass(frozen=True)
class KernelValue:
    """Short-time transition density in theta plus the deterministic phi image."""

    density: float
    phi: float
    mean: float
    variance: float


def transition_kernel(theta, theta_prev, phi_prev, dt, epsilon, u0):
    """Euler-Maruyama transition density over one step ``dt``.

    theta is Gaussian with mean ``theta' - (theta'^2 - phi'^2 + u0) dt`` and
    variance ``2 epsilon dt``; phi has no diffusion and moves to
    ``phi' (1 - 2 theta' dt)``.
    """
    if not dt > 0:
        raise PreconditionError("dt must be positive")
    if not epsilon > 0:
        raise PreconditionError("epsilon must be positive")
    mean = theta_prev - (theta_prev ** 2 - phi_prev ** 2 + u0) * dt
    var = 2.0 * epsilon * dt
    dens = np.exp(-(np.asarray(theta) - mean) ** 2 / (2.0 * var)) / math.sqrt(2.0 * math.pi * var)
    return KernelValue(density=dens, phi=phi_prev * (1.0 - 2.0 * theta_prev * dt),
                       mean=mean, variance=var)


def log_flux_scaled(x):
    """ln J(x) with J(x) = 1 / (pi^2 (Ai^2(-x) + Bi^2(-x)))."""
    return -_LOG_PI2 - log_airy_modulus_sq(-np.asarray(x, dtype=float))


def flux_scaled(x):
    """Scaled stationary flux J(x), x = lambda * gamma; underflows to 0 for x << 0."""
    return np.exp(log_flux_scaled(x))


def flux_scaled_quadrature(x, spec=QuadratureSpec()):
    """J(x) from 1/J = sqrt(pi) int_0^inf z^{-1/2} exp(-z^3/12 - x z) dz.

    Independent of the Airy evaluation; used as a consistency gate.
    """
    x = float(x)
    # peak of -x z - z^3/12 at z* = 2 sqrt(-x) when x < 0
    zs = 2.0 * math.sqrt(-x) if x < 0 else 0.0
    shift = -x * zs - zs ** 3 / 12.0

    def f(z):
        return z ** -0.5 * math.exp(-x * z - z ** 3 / 12.0 - shift) if z > 0 else 0.0

    if zs > 0:
        tot = (integrate(f, 0.0, zs, spec, sqrt_singular_start=True).value
               + integrate(f, zs, np.inf, spec, scale=1.0 / math.sqrt(max(1.0, zs / 2))).value)
    else:
        tot = integrate(f, 0.0, np.inf, spec, sqrt_singular_start=True,
                        scale=1.0 / math.sqrt(1.0 + x)).value
    return math.exp(-0.5 * math.log(math.pi) - math.log(tot) - shift)


def _fold_setup(c, theta):
    """Per-point shift of the exponent and a natural length scale in y."""
    theta = np.asarray(theta, dtype=float)
    shift = np.zeros_like(theta)
    # decay length of the linear term, or of the quadratic one where c + theta^2 ~ 0
    scale = 1.0 / np.maximum(np.maximum(1.0, np.abs(c + theta * theta) / 4.0),
                             np.sqrt(np.abs(theta)) / 2.0)
    if c < 0:
        ystar = theta + math.sqrt(-c)
        pos = ystar > 0
        ys = ystar[pos]
        th = theta[pos]
        shift[pos] = np.maximum(0.0, -(c + th * th) * ys + th * ys * ys - ys ** 3 / 3.0)
        scale[pos] = np.maximum(scale[pos], ys)
    return shift, scale


def _exponent(c, theta, y):
    return -(c + theta * theta) * y + theta * y * y - y ** 3 / 3.0


def _family(c, theta, y_of_w, jac, shift, spec, derivative, lo, hi):
    def f(w):
        y = y_of_w(w)
        e = np.exp(_exponent(c, theta, y) - shift) * jac(w)
        if derivative:
            return np.concatenate([e, (y * y - 2.0 * theta * y) * e])
        return e

    res = integrate(f, lo, hi, spec).value
    n = theta.size
    return res[:n], (res[n:] if derivative else None)


def _folded_integrals(c, theta, spec, derivative):
    """Return the y integral of exp(g - shift) (and of the derivative integrand) and the shift.

    For c < 0 and theta > sqrt(-c) the exponent has a local minimum at
    y = theta - sqrt(-c) > 0 separating the decay from y = 0 and the peak at
    theta + sqrt(-c); those points are integrated in two pieces so that
    neither region is lost to a single length scale.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    n = theta.size
    core = np.empty(n)
    dcore = np.empty(n) if derivative else None
    shift = np.zeros(n)
    split = (theta > math.sqrt(-c)) if c < 0 else np.zeros(n, dtype=bool)

    one = ~split
    if np.any(one):
        th = theta[one]
        sh, sc = _fold_setup(c, th)
        v, dv = _family(c, th, lambda w: sc * w, lambda w: sc, sh, spec, derivative,
                        0.0, np.inf)
        core[one], shift[one] = v, sh
        if derivative:
            dcore[one] = dv

    if np.any(split):
        th = theta[split]
        s = math.sqrt(-c)
        ymin, ymax = th - s, th + s
        sh = np.maximum(0.0, _exponent(c, th, ymax))
        # decay from y = 0 down to the local minimum, on a log-stretched grid whose
        # first cells resolve the initial decay length 1/(theta^2 + c)
        kap = np.log1p(ymin * (th * th + c))
        base = ymin / np.expm1(kap)
        va, dva = _family(c, th, lambda u: base * np.expm1(kap * u),
                          lambda u: base * kap * np.exp(kap * u), sh, spec, derivative, 0.0, 1.0)
        # the peak beyond the minimum
        sc = max(1.0, 2.0 * s)
        vb, dvb = _family(c, th, lambda w: ymin + sc * w, lambda w: sc, sh, spec, derivative,
                          0.0, np.inf)
        core[split], shift[split] = va + vb, sh
        if derivative:
            dcore[split] = dva + dvb
    return core, dcore, shift


def stationary_density(lam, gam, theta_bar, spec=QuadratureSpec()):
    """Scaled stationary density Q(theta_bar) at coupling c = lam * gam.

    ``theta_bar`` may be a scalar or an array; all points share one adaptive
    quadrature in a rescaled variable.
    """
    q, _ = stationary_density_and_derivative(lam, gam, theta_bar, spec, derivative=False)
    return q


def stationary_density_and_derivative(lam, gam, theta_bar, spec=QuadratureSpec(), derivative=True):
    """Q(theta_bar) and dQ/dtheta_bar, the latter by differentiating under the integral."""
    if not (np.isfinite(lam) and np.isfinite(gam)):
        raise PreconditionError("lambda and gamma must be finite")
    c = float(lam) * float(gam)
    scalar = np.ndim(theta_bar) == 0
    core, dcore, shift = _folded_integrals(c, theta_bar, spec, derivative)
    logj = float(log_flux_scaled(c))
    fac = np.exp(logj + shift)
    q = fac * core
    dq = fac * dcore if derivative else None
    if scalar:
        return float(q[0]), (float(dq[0]) if derivative else None)
    return q, dq


def flux_residual(lam, gam, theta_bar, spec=QuadratureSpec(), relative_to="flux"):
    """(theta^2 + c) Q + dQ/dtheta - J, zero for the exact density.

    ``relative_to="flux"`` divides by J.  For c << 0, J is exponentially small
    next to the two terms that cancel (J / max Q ~ exp(-(4/3)|c|^{3/2})), so
    the J-relative residual is dominated by rounding and is inf once that
    ratio leaves the double range.  ``"terms"`` divides by
    J + max(|(theta^2 + c) Q|, |dQ/dtheta|, Q) instead.  Both are formed from
    the folded integrals before the common factor J e^shift is applied, so
    subnormal densities keep full relative precision.
    """
    if not (np.isfinite(lam) and np.isfinite(gam)):
        raise PreconditionError("lambda and gamma must be finite")
    if relative_to not in ("flux", "terms"):
        raise PreconditionError("relative_to must be 'flux' or 'terms'")
    c = float(lam) * float(gam)
    scalar = np.ndim(theta_bar) == 0
    th = np.atleast_1d(np.asarray(theta_bar, dtype=float))
    core, dcore, shift = _folded_integrals(c, th, spec, True)
    # everything below is in units of J e^shift
    a = (th * th + c) * core
    j = np.exp(-shift)
    res = a + dcore - j
    with np.errstate(over="ignore", invalid="ignore"):
        if relative_to == "flux":
            out = np.where(res == 0.0, 0.0, res * np.exp(shift))
        else:
            out = res / (j + np.maximum(np.maximum(np.abs(a), np.abs(dcore)), core))
    return float(out[0]) if scalar else out


def half_masses(lam, gam, spec=QuadratureSpec()):
    """Probability of theta_bar > 0 and of theta_bar < 0 under the stationary density.

    The theta integral is Gaussian and is done in closed form, leaving
    J sqrt(pi) int_0^inf y^{-1/2} exp(-c y - y^3/12) (1 +- erf(y^{3/2}/2)) / 2 dy.
    """
    c = lam * gam
    ys = 2.0 * math.sqrt(-c) if c < 0 else 0.0
    shift = -c * ys - ys ** 3 / 12.0
    logj = float(log_flux_scaled(c))

    def f(y):
        if y <= 0:
            return np.zeros(2)
        base = y ** -0.5 * math.exp(-c * y - y ** 3 / 12.0 - shift)
        e = erf(y ** 1.5 / 2.0)
        return np.array([base * (1.0 + e), base * (1.0 - e)])

    if ys > 0:
        tot = (integrate(f, 0.0, ys, spec, sqrt_singular_start=True).value
               + integrate(f, ys, np.inf, spec, scale=1.0 / math.sqrt(max(1.0, ys / 2))).value)
    else:
        tot = integrate(f, 0.0, np.inf, spec, sqrt_singular_start=True,
                        scale=1.0 / math.sqrt(1.0 + c)).value
    pos, neg = 0.5 * math.sqrt(math.pi) * tot * math.exp(logj + shift)
    return float(pos), float(neg)


@dataclass(frozen=True)
class StationaryDist:
    """Stationary density sampled on a grid, with its flux."""

    lam: float
    gamma: float
    j0f_scaled: float
    theta_bar: np.ndarray
    q_s: np.ndarray

    def tail_ratio(self):
        """theta^2 Q / J on the grid; tends to 1 as |theta| grows."""
        return self.theta_bar ** 2 * self.q_s / self.j0f_scaled


def stationary_dist(lam, gam, grid, spec=QuadratureSpec()):
    """Evaluate the stationary density on ``grid`` and package it."""
    if not lam > 0:
        raise PreconditionError("lambda must be positive")
    grid = np.asarray(grid, dtype=float)
    q = stationary_density(lam, gam, grid, spec)
    return StationaryDist(lam=float(lam), gamma=float(gam),
                          j0f_scaled=float(flux_scaled(lam * gam)), theta_bar=grid, q_s=q)


def write_fig1_csv(directory, dist):
    """Write ``theta_bar,q_s`` rows to ``stationary_lambda<l>_gamma<g>.csv``; return the path."""
    path = os.path.join(directory, f"stationary_lambda{dist.lam:g}_gamma{dist.gamma:g}.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["theta_bar", "q_s"])
        for t, q in zip(dist.theta_bar, dist.q_s):
            w.writerow([f"{t:.16e}", f"{q:.16e}"])
    return path


def _check_e_eps(e, epsilon):
    if not (np.all(np.asarray(e) > 0) and epsilon > 0):
        raise PreconditionError("energy and epsilon must be positive")


def n_sigma(e, epsilon):
    """Integrated density of states eps^{1/3} / (pi^2 A(-E/eps^{2/3}))."""
    _check_e_eps(e, epsilon)
    ebar = np.asarray(e, dtype=float) / epsilon ** (2.0 / 3.0)
    return epsilon ** (1.0 / 3.0) * flux_scaled(ebar)


def n_sigma_asymptotic(e, epsilon):
    """Two-term large-energy form sqrt(E)/pi * (1 + 5 eps^2 / (32 E^3))."""
    e = np.asarray(e, dtype=float)
    return np.sqrt(e) / math.pi * (1.0 + 5.0 * epsilon ** 2 / (32.0 * e ** 3))


def n_e(e, epsilon):
    """Bound-state count eps^{1/3} / (pi^2 A(E/eps^{2/3}))."""
    _check_e_eps(e, epsilon)
    ebar = np.asarray(e, dtype=float) / epsilon ** (2.0 / 3.0)
    return epsilon ** (1.0 / 3.0) * flux_scaled(-ebar)


def n_e_asymptotic(e, epsilon):
    """Leading large-energy form sqrt(E)/pi * exp(-(4/3) E^{3/2} / eps)."""
    e = np.asarray(e, dtype=float)
    return np.sqrt(e) / math.pi * np.exp(-4.0 / 3.0 * e ** 1.5 / epsilon)


def p_e(e, epsilon):
    """Fraction of states at energy E that are bound: A(-E_bar) / A(E_bar)."""
    _check_e_eps(e, epsilon)
    ebar = np.asarray(e, dtype=float) / epsilon ** (2.0 / 3.0)
    return np.exp(log_airy_modulus_sq(-ebar) - log_airy_modulus_sq(ebar))


@dataclass(frozen=True)
class SpectralCounts:
    e_bar: float
    n_sigma: float
    n_e: float
    p_e: float


def spectral_counts(e, epsilon):
    """N_Sigma, N_E and P_E at one energy."""
    return SpectralCounts(e_bar=float(e / epsilon ** (2.0 / 3.0)),
                          n_sigma=float(n_sigma(e, epsilon)), n_e=float(n_e(e, epsilon)),
                          p_e=float(p_e(e, epsilon)))
