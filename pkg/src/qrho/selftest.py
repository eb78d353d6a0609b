"""Fast invariant checks across all modules, used by ``qrho selftest``.

Every value is deterministic, so the report is byte-identical between runs.
"""

from dataclasses import dataclass
import math

import numpy as np

from .fokker_planck import (flux_residual, flux_scaled, flux_scaled_quadrature, half_masses,
                            n_sigma, n_sigma_asymptotic)
from .special import airy, airy_modulus_sq, log_airy_modulus_derivatives
from .stochastic import FrequencyProfile, NoiseSpec, integrate_phase
from .thermo import entropy_a_p, entropy_closed_form, ground_energy, ground_energy_quadrature
from .transitions import delta_grid
from .wavefunc import FrameState, deterministic_frame, gram_matrix, s_closed_forms, s_local

__all__ = ["Check", "run_checks"]


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tolerance: float

    @property
    def passed(self):
        return bool(np.isfinite(self.value) and self.value <= self.tolerance)


def _wronskian():
    x = np.linspace(-20.0, 20.0, 401)
    v = airy(x)
    return float(np.max(np.abs(v.wronskian * math.pi - 1.0)))


def _integral_rep():
    xs = np.linspace(-10.0, 5.0, 16)
    a = airy_modulus_sq(xs)
    q = np.array([1.0 / (math.pi ** 2 * flux_scaled_quadrature(-x)) for x in xs])
    return float(np.max(np.abs(q / a - 1.0)))


def _flux_residual():
    th = np.linspace(-10.0, 10.0, 41)
    worst = 0.0
    for lam, gam in ((0.5, 1.0), (2.0, -1.0), (1.0, 0.5)):
        worst = max(worst, float(np.max(np.abs(flux_residual(lam, gam, th)))))
    return worst


def _normalisation():
    return max(abs(sum(half_masses(lam, gam)) - 1.0) for lam, gam in ((0.5, 1.0), (2.0, -1.0)))


def _two_route_flux():
    xs = np.linspace(-10.0, 10.0, 11)
    return float(max(abs(flux_scaled_quadrature(x) / flux_scaled(x) - 1.0) for x in xs))


def _n_sigma_correction():
    # the two-term form's correction, compared with the exact excess over sqrt(E)/pi
    e = 100.0
    lead = math.sqrt(e) / math.pi
    return abs((float(n_sigma(e, 1.0)) - lead) / (float(n_sigma_asymptotic(e, 1.0)) - lead) - 1.0)


def _gram():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(5):
        w = rng.uniform(0.5, 3.0)
        sig = rng.uniform(0.5, 2.0)
        frame = FrameState(sigma=sig, sigma_t=rng.uniform(-2, 2), r=rng.uniform(0, 6),
                           r_t=w / sig ** 2, tau=0.0, omega_in=w)
        worst = max(worst, float(np.max(np.abs(gram_matrix(frame, 8) - np.eye(9)))))
    return worst


def _smatrix():
    fi, fo = deterministic_frame(1.0, 0.0), deterministic_frame(4.0, 0.0)
    s = s_local(8, fi, fo)
    cf = s_closed_forms(fi, fo)
    sudden = abs(abs(s.entries[0, 0]) ** 2 - 0.8)
    return s.parity_defect(), abs(s.entries[1, 1] - cf["S00"] ** 3), sudden


def _euler_constant():
    # noiseless constant frequency: theta stays 0 and phi stays omega
    tr = integrate_phase(FrequencyProfile("constant", 1.5, 1.5), NoiseSpec(0.0), 0.0, 2.0, 1e-3)
    return float(max(np.max(np.abs(tr.theta)), np.max(np.abs(tr.phi - 1.5))))


def _sudden_transition(workers):
    rhos = np.linspace(0.0, 0.9, 10)
    res = delta_grid([1e6], rhos, workers=workers)
    return float(max(abs(r.delta - math.sqrt(1.0 - r.rho)) for r in res))


def _thermo():
    e = abs(ground_energy(1e3, 1.0).e_osc - 0.5) / 0.5
    g = ground_energy(3.0, 1.0)
    q = ground_energy_quadrature(3.0, 1.0)
    routes = max(abs(q[0] - g.e_osc), abs(q[1] - g.width_term))
    xs = np.linspace(-10.0, 2.0, 13)
    h = 1e-4
    _, d, _ = log_airy_modulus_derivatives(xs)
    fd = (log_airy_modulus_derivatives(xs + h)[0] - log_airy_modulus_derivatives(xs - h)[0]) / (2 * h)
    deriv = float(np.max(np.abs(d - fd)))
    ent = max(abs(entropy_a_p(b) - entropy_closed_form(b)) / abs(entropy_closed_form(b))
              for b in (0.5, 2.0, 5.0))
    return e, routes, deriv, ent


def run_checks(workers=1):
    """Run all checks and return them in a fixed order."""
    parity, s11, sudden = _smatrix()
    e_osc, routes, deriv, ent = _thermo()
    return [
        Check("airy_wronskian", _wronskian(), 1e-10),
        Check("airy_integral_representation", _integral_rep(), 1e-8),
        Check("stationary_flux_residual", _flux_residual(), 1e-6),
        Check("stationary_normalisation", _normalisation(), 1e-6),
        Check("flux_two_routes", _two_route_flux(), 1e-8),
        Check("n_sigma_correction_term", _n_sigma_correction(), 0.2),
        Check("gram_identity", _gram(), 1e-10),
        Check("smatrix_parity", parity, 1e-12),
        Check("smatrix_s11_cube", s11, 1e-10),
        Check("smatrix_sudden_step", sudden, 1e-12),
        Check("sde_noiseless_fixed_point", _euler_constant(), 1e-12),
        Check("vacuum_transition_sudden_limit", _sudden_transition(workers), 1e-3),
        Check("thermo_e_osc_limit", e_osc, 1e-2),
        Check("thermo_two_routes", routes, 1e-8),
        Check("thermo_log_derivative_fd", deriv, 1e-8),
        Check("thermo_entropy_two_routes", ent, 1e-6),
    ]
