"""Vacuum thermodynamics of the oscillator in the asymptotic out channel.

Everything reduces to the Airy modulus A = Ai^2 + Bi^2 and to the integrals

    A_p(y) = int_0^inf z^p exp(-z^3/12 + y z) dz,

which are tied by A(y) = pi^{-3/2} A_{-1/2}(y) and (ln A)'(y) = A_{1/2}(y) / A_{-1/2}(y).
Energies in ``distribution``/``potentials`` are scaled by eps_plus^{2/3};
the ground-state functions take lambda_plus = (omega_as / eps_plus^{1/3})^2.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import csv
import math

import numpy as np

from .errors import PreconditionError
from .special import (QuadratureSpec, airy_modulus_ratios, log_a_p_integral,
                      log_airy_modulus_derivatives, log_airy_modulus_sq)

__all__ = [
    "DistributionFunction",
    "Potentials",
    "GroundEnergy",
    "ThermoPoint",
    "distribution",
    "log_distribution",
    "potentials",
    "entropy_direct",
    "entropy_closed_form",
    "entropy_a_p",
    "ground_energy",
    "ground_energy_quadrature",
    "beta_plus",
    "ground_entropy",
    "thermo_point",
    "thermo_sweep",
    "write_fig3_csv",
]

FD_RELATIVE_STEP = 1e-4


def _check_pos(**kw):
    for name, v in kw.items():
        if not (np.isfinite(v) and v > 0):
            raise PreconditionError(f"{name} must be positive and finite")


@dataclass(frozen=True)
class DistributionFunction:
    """Equilibrium occupation N_E / N_Sigma of a level at mean energy ``e``."""

    epsilon_plus: float
    e: float
    value: float


def log_distribution(e, epsilon_plus):
    """ln A(-E_bar) - ln A(E_bar), E_bar = e / epsilon_plus^{2/3}."""
    eb = e / epsilon_plus ** (2.0 / 3.0)
    return float(log_airy_modulus_sq(-eb) - log_airy_modulus_sq(eb))


def distribution(e, epsilon_plus):
    """A(-E_bar) / A(E_bar); equals the bound-state fraction at energy ``e``."""
    _check_pos(e=e, epsilon_plus=epsilon_plus)
    return DistributionFunction(epsilon_plus=float(epsilon_plus), e=float(e),
                                value=math.exp(log_distribution(e, epsilon_plus)))


@dataclass(frozen=True)
class Potentials:
    internal_energy: float
    helmholtz: float
    entropy: float


def potentials(e, epsilon_plus, k=1.0, rel_step=FD_RELATIVE_STEP):
    """U = -d ln(theta)/d eps_plus, F = -ln(theta)/eps_plus, S = eps_plus k (U + F).

    The derivative is a central difference with one Richardson step.
    """
    _check_pos(e=e, epsilon_plus=epsilon_plus, k=k)
    h = rel_step * epsilon_plus
    if not (h > 0 and epsilon_plus - h < epsilon_plus < epsilon_plus + h):
        raise PreconditionError(f"finite-difference step {h!r} underflows at eps_plus")

    def central(step):
        return (log_distribution(e, epsilon_plus + step)
                - log_distribution(e, epsilon_plus - step)) / (2.0 * step)

    dlog = (4.0 * central(0.5 * h) - central(h)) / 3.0
    u = -dlog
    f = -log_distribution(e, epsilon_plus) / epsilon_plus
    return Potentials(internal_energy=u, helmholtz=f, entropy=epsilon_plus * k * (u + f))


def entropy_closed_form(e_bar, k=1.0):
    """S / k = -(2/3) E_bar [(ln A)'(-E_bar) + (ln A)'(E_bar)] + ln(A(E_bar) / A(-E_bar)).

    This is what the potentials compose to once the eps_plus derivative of
    E_bar = E / eps_plus^{2/3} is taken analytically.
    """
    lp, dp, _ = log_airy_modulus_derivatives(e_bar)
    lm, dm, _ = log_airy_modulus_derivatives(-e_bar)
    return float(k * (-2.0 / 3.0 * e_bar * (dm + dp) + lp - lm))


def entropy_direct(e, epsilon_plus, k=1.0):
    """Entropy of a level at energy ``e`` from the analytic Airy derivatives."""
    _check_pos(e=e, epsilon_plus=epsilon_plus, k=k)
    return entropy_closed_form(e / epsilon_plus ** (2.0 / 3.0), k)


def _log_ap(p, y, spec):
    return log_a_p_integral(p, 1 if y >= 0 else -1, abs(y), spec=spec)


def entropy_a_p(beta, k=1.0, spec=QuadratureSpec()):
    """The same entropy written with the integrals A_{+-1/2}(+-beta)."""
    r_minus = math.exp(_log_ap(0.5, -beta, spec) - _log_ap(-0.5, -beta, spec))
    r_plus = math.exp(_log_ap(0.5, beta, spec) - _log_ap(-0.5, beta, spec))
    log_ratio = _log_ap(-0.5, beta, spec) - _log_ap(-0.5, -beta, spec)
    return k * (-2.0 / 3.0 * beta * (r_minus + r_plus) + log_ratio)


@dataclass(frozen=True)
class GroundEnergy:
    """Finite ground energy, level width and the cutoff-regularised vacuum term."""

    vacuum_term: float
    e_osc: float
    width_term: float

    @property
    def decay_time(self):
        return 1.0 / self.width_term if self.width_term != 0 else math.inf


def ground_energy(lambda_plus, omega_as, cutoff=None, spec=QuadratureSpec()):
    """e_osc = (omega/2)(1 - (A''/A)(-lambda_plus)/lambda_plus) and width (omega/(2 sqrt lambda_plus)) (ln A)'.

    A''/A = ((ln A)')^2 + (ln A)'' comes from the Airy equation, so no
    differencing is involved.  The divergent vacuum term needs an explicit
    lower ``cutoff`` on z and is None otherwise.
    """
    _check_pos(lambda_plus=lambda_plus, omega_as=omega_as)
    _, r1, r2 = airy_modulus_ratios(-float(lambda_plus))
    e_osc = 0.5 * omega_as * (1.0 - float(r2) / lambda_plus)
    width = omega_as / (2.0 * math.sqrt(lambda_plus)) * float(r1)
    vac = None
    if cutoff is not None:
        if not cutoff > 0:
            raise PreconditionError("cutoff must be positive")
        vac = 0.5 * omega_as * math.exp(
            log_a_p_integral(-1.5, -1, lambda_plus, cutoff=cutoff, spec=spec)
            - log_a_p_integral(-0.5, -1, lambda_plus, spec=spec))
    return GroundEnergy(vacuum_term=vac, e_osc=e_osc, width_term=width)


def ground_energy_quadrature(lambda_plus, omega_as, spec=QuadratureSpec()):
    """(e_osc, width) from the z-integrals directly; independent of the Airy code."""
    _check_pos(lambda_plus=lambda_plus, omega_as=omega_as)
    l0 = log_a_p_integral(-0.5, -1, lambda_plus, spec=spec)
    l32 = log_a_p_integral(1.5, -1, lambda_plus, spec=spec)
    l12 = log_a_p_integral(0.5, -1, lambda_plus, spec=spec)
    e_osc = 0.5 * omega_as * (1.0 - math.exp(l32 - l0) / lambda_plus)
    width = omega_as / (2.0 * math.sqrt(lambda_plus)) * math.exp(l12 - l0)
    return e_osc, width


def beta_plus(e_osc, lambda_plus, omega_as):
    """Scaled ground energy e_osc sqrt(lambda_plus) / omega_as (= e_osc / eps_plus^{1/3})."""
    return e_osc * math.sqrt(lambda_plus) / omega_as


def ground_entropy(lambda_plus, omega_as, k=1.0, spec=QuadratureSpec()):
    """Ground-state entropy from the A_p integrals at the scaled finite ground energy."""
    e = ground_energy(lambda_plus, omega_as).e_osc
    return entropy_a_p(beta_plus(e, lambda_plus, omega_as), k, spec)


@dataclass(frozen=True)
class ThermoPoint:
    lambda_plus: float
    omega_as: float
    beta_plus: float
    e_osc: float
    level_width: float
    entropy: float
    boltzmann_k: float = 1.0

    @property
    def decay_time(self):
        return 1.0 / self.level_width if self.level_width != 0 else math.inf


def thermo_point(lambda_plus, omega_as=1.0, k=1.0, spec=QuadratureSpec()):
    g = ground_energy(lambda_plus, omega_as)
    b = beta_plus(g.e_osc, lambda_plus, omega_as)
    return ThermoPoint(lambda_plus=float(lambda_plus), omega_as=float(omega_as), beta_plus=b,
                       e_osc=g.e_osc, level_width=g.width_term,
                       entropy=entropy_a_p(b, k, spec), boltzmann_k=float(k))


def thermo_sweep(lambda_pluses, omega_as=1.0, k=1.0, spec=QuadratureSpec(), workers=1):
    """thermo_point over a grid; results keep grid order."""
    grid = [float(x) for x in lambda_pluses]

    def one(lp):
        return thermo_point(lp, omega_as, k, spec)

    if workers <= 1:
        return [one(lp) for lp in grid]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, grid))


def write_fig3_csv(path, points):
    """Write ``lambda_plus,e_osc,width,entropy`` rows in the given order."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["lambda_plus", "e_osc", "width", "entropy"])
        for p in points:
            w.writerow([f"{p.lambda_plus:.16e}", f"{p.e_osc:.16e}",
                        f"{p.level_width:.16e}", f"{p.entropy:.16e}"])
