"""Wave functionals in a moving oscillator frame and local S-matrix elements.

A frame is the complex solution xi = sigma e^{i r} of the classical
oscillator; its logarithmic derivative is Phi = sigma_t/sigma + i r_t with
r_t sigma^2 = omega.  The n-th state in that frame is

    psi_n(x) = (omega/pi)^{1/4} sigma^{-1/2} e^{-i(n+1/2) r} h_n(sqrt(omega) x / sigma)
               * exp(i Phi x^2 / 2),

with h_n = H_n / sqrt(2^n n!).  Overlaps between two frames follow from the
Gaussian integral of the product of their generating functions,

    sum_{n,m} S_nm z^n w^m / sqrt(n! m!) = P exp(a z^2 + b z w + c w^2),

and the S_nm are extracted with an exact two-index recurrence.  The matrix
index order is ``S[n, m] = <out_m | in_n>``.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import CapabilityError, PreconditionError
from .special import FACTORIALS, hermite_normalized

__all__ = [
    "FrameState",
    "deterministic_frame",
    "frame_from_trajectory",
    "psi_in",
    "psi_stc",
    "gram_matrix",
    "GaussianOverlap",
    "overlap_coefficients",
    "generating_overlap",
    "SMatrixLocal",
    "s_local",
    "s_closed_forms",
    "unitarity_defect",
    "PsiBr",
    "psi_br",
]

N_MAX = 32


@dataclass(frozen=True)
class FrameState:
    """Oscillator frame: scale sigma, its rate, phase r, phase rate, stochastic time.

    ``omega_in`` is the frequency attached to the frame (Omega_in for the
    in-channel, Omega_out for a deterministic out-channel frame).
    """

    sigma: float
    sigma_t: float
    r: float
    r_t: float
    tau: float
    omega_in: float

    def __post_init__(self):
        if not (self.sigma > 0 and self.r_t > 0 and self.omega_in > 0):
            raise PreconditionError("sigma, r_t and omega must be positive")
        if abs(self.r_t * self.sigma ** 2 / self.omega_in - 1.0) > 1e-8:
            raise PreconditionError("frame violates r_t sigma^2 = omega")

    @property
    def xi(self):
        return self.sigma * complex(math.cos(self.r), math.sin(self.r))

    @property
    def log_derivative(self):
        """Phi = xi'/xi = sigma_t/sigma + i r_t."""
        return complex(self.sigma_t / self.sigma, self.r_t)


def deterministic_frame(omega, t):
    """Frame of xi = e^{i omega t}: sigma = 1, r = omega t."""
    return FrameState(sigma=1.0, sigma_t=0.0, r=omega * t, r_t=omega, tau=t, omega_in=omega)


def frame_from_trajectory(traj, t):
    """Frame of a sampled trajectory at time ``t`` (linear interpolation between nodes)."""
    tg = traj.time_grid
    if not tg[0] - 1e-12 <= t <= tg[-1] + 1e-12:
        raise PreconditionError(f"t = {t} outside the trajectory range [{tg[0]}, {tg[-1]}]")
    ls = float(np.interp(t, tg, traj.log_sigma))
    th = float(np.interp(t, tg, traj.theta))
    r = float(np.interp(t, tg, traj.r))
    sig = math.exp(ls)
    w = traj.omega_in
    return FrameState(sigma=sig, sigma_t=th * sig, r=r, r_t=w / sig ** 2, tau=r / w, omega_in=w)


def _check_n(n):
    if n < 0 or int(n) != n:
        raise PreconditionError("level index must be a non-negative integer")
    if n > N_MAX:
        raise CapabilityError(f"level {n} exceeds the supported bound {N_MAX}")


def psi_in(n, x, t, omega_in):
    """Stationary in-channel eigenfunction with its time phase."""
    _check_n(n)
    x = np.asarray(x, dtype=float)
    amp = (omega_in / math.pi) ** 0.25 * hermite_normalized(n, math.sqrt(omega_in) * x)
    return amp * np.exp(-0.5 * omega_in * x * x) * np.exp(-1j * (n + 0.5) * omega_in * t)


def psi_stc(n, x, frame):
    """State ``n`` in a moving frame, evaluated at positions ``x``."""
    _check_n(n)
    x = np.asarray(x, dtype=float)
    w = frame.omega_in
    u = math.sqrt(w) * x / frame.sigma
    amp = (w / math.pi) ** 0.25 / math.sqrt(frame.sigma) * hermite_normalized(n, u)
    quad = (0.5j * frame.sigma_t / frame.sigma - 0.5 * frame.r_t) * x * x
    return amp * np.exp(quad - 1j * (n + 0.5) * w * frame.tau)


def gram_matrix(frame, n_max=8, nodes=None):
    """Matrix of int psi_m conj(psi_n) dx by Gauss-Hermite quadrature."""
    if nodes is None:
        nodes = max(n_max + 2, int(math.ceil(40 * (1 + 1 / frame.sigma))))
    u, wts = np.polynomial.hermite.hermgauss(nodes)
    # x = u / sqrt(r_t) makes |psi|^2 carry exactly the Gauss-Hermite weight
    s = 1.0 / math.sqrt(frame.r_t)
    x = s * u
    vals = np.array([psi_stc(k, x, frame) for k in range(n_max + 1)])
    vals = vals * np.sqrt(wts * np.exp(u * u) * s)
    return vals @ vals.conj().T


@dataclass(frozen=True)
class GaussianOverlap:
    """Coefficients of I(z, w) = prefactor * exp(a z^2 + b z w + c w^2)."""

    prefactor: complex
    a: complex
    b: complex
    c: complex
    big_a: complex


def _overlap_arrays(sig, sig_t, r, r_t, w, sig2, sig2_t, r2, r2_t, w2):
    """Vectorised generating-function coefficients; frames may be arrays."""
    phi1 = sig_t / sig + 1j * r_t
    phi2c = sig2_t / sig2 - 1j * r2_t
    big_a = -1j * phi1 + 1j * phi2c
    if np.any(np.real(big_a) < 0):
        raise PreconditionError("overlap not integrable: Re A < 0")
    xi = sig * np.exp(1j * r)
    eta_c = sig2 * np.exp(-1j * r2)
    # principal root: Re A > 0 keeps A off the branch cut
    pref = ((w * w2) ** 0.25 * np.sqrt(2.0 / big_a) / np.sqrt(sig * sig2)
            * np.exp(-0.5j * (r - r2)))
    a = w / (big_a * xi * xi) - 0.5 * np.exp(-2j * r)
    b = 2.0 * np.sqrt(w * w2) / (big_a * xi * eta_c)
    c = w2 / (big_a * eta_c * eta_c) - 0.5 * np.exp(2j * r2)
    return pref, a, b, c, big_a


def overlap_coefficients(frame_in, frame_out):
    """Prefactor and quadratic-form coefficients of the frame overlap."""
    f, g = frame_in, frame_out
    p, a, b, c, big_a = _overlap_arrays(f.sigma, f.sigma_t, f.r, f.r_t, f.omega_in,
                                        g.sigma, g.sigma_t, g.r, g.r_t, g.omega_in)
    return GaussianOverlap(complex(p), complex(a), complex(b), complex(c), complex(big_a))


def generating_overlap(z, w_conj, frame_in, frame_out):
    """Closed-form int conj(G_out(x, w)) G_in(x, z) dx."""
    co = overlap_coefficients(frame_in, frame_out)
    return co.prefactor * np.exp(co.a * z * z + co.b * z * w_conj + co.c * w_conj * w_conj)


def _taylor_table(a, b, c, n_max, m_max=None):
    """T[n, m] = sqrt(n! m!) [z^n w^m] exp(a z^2 + b z w + c w^2); works on arrays."""
    m_max = n_max if m_max is None else m_max
    shape = np.shape(a)
    t = np.zeros((n_max + 1, m_max + 1) + shape, dtype=complex)
    t[0, 0] = 1.0
    sq = np.sqrt(np.arange(max(n_max, m_max) + 2, dtype=float))
    for m in range(m_max + 1):
        if m > 0:
            # raise m along n = 0
            acc = 2.0 * c * sq[m - 1] * t[0, m - 2] if m >= 2 else 0.0
            t[0, m] = acc / sq[m]
        for n in range(n_max):
            acc = b * sq[m] * t[n, m - 1] if m >= 1 else 0.0
            if n >= 1:
                acc = acc + 2.0 * a * sq[n] * t[n - 1, m]
            t[n + 1, m] = acc / sq[n + 1]
    return t


@dataclass(frozen=True)
class SMatrixLocal:
    """Local transition amplitudes ``entries[n, m] = <out_m | in_n>``."""

    n_max: int
    entries: np.ndarray
    frame_in: FrameState
    frame_out: FrameState

    @property
    def omega_in(self):
        return self.frame_in.omega_in

    @property
    def omega_out(self):
        return self.frame_out.omega_in

    def parity_defect(self):
        """Largest |S_nm| with n + m odd."""
        n, m = np.indices(self.entries.shape)
        odd = (n + m) % 2 == 1
        return float(np.abs(self.entries[odd]).max()) if odd.any() else 0.0


def s_local(n_max, frame_in, frame_out):
    """All S_nm with n, m <= n_max between an in-frame and an out-frame."""
    _check_n(n_max)
    co = overlap_coefficients(frame_in, frame_out)
    t = _taylor_table(co.a, co.b, co.c, n_max)
    s = co.prefactor * t
    # parity: the quadratic form only links n, m of equal parity
    n, m = np.indices(s.shape)
    s[(n + m) % 2 == 1] = 0.0
    return SMatrixLocal(n_max=int(n_max), entries=s, frame_in=frame_in, frame_out=frame_out)


def s_closed_forms(frame_in, frame_out):
    """Closed forms of S_00, S_11, S_20 and S_02.

    S_11 = S_00^3 holds because b = P^2.  S_20 = sqrt(2) P a and
    S_02 = sqrt(2) P c.
    """
    co = overlap_coefficients(frame_in, frame_out)
    p = co.prefactor
    return {"S00": p, "S11": p ** 3, "S20": math.sqrt(2.0) * p * co.a,
            "S02": math.sqrt(2.0) * p * co.c}


def unitarity_defect(frame_in, frame_out, n, m, k_max):
    """|sum_{k<=K} S_kn conj(S_km) - delta_nm| for K = 0 .. k_max.

    Both indices n, m refer to out-levels; the sum runs over in-levels.
    """
    co = overlap_coefficients(frame_in, frame_out)
    t = co.prefactor * _taylor_table(co.a, co.b, co.c, k_max, max(n, m))
    partial = np.cumsum(t[:, n] * np.conj(t[:, m]))
    return np.abs(partial - (1.0 if n == m else 0.0))


@dataclass(frozen=True)
class PsiBr:
    """Averaged wave functional on a grid with its normalisation and error bars."""

    x: np.ndarray
    values: np.ndarray
    std_error: np.ndarray
    alpha: float
    n_traj: int


def _pair_overlaps(n, sig, sig_t, r, r_t, w, j):
    """<psi_n^k | psi_n^j> for all k, by the generating-function recurrence."""
    p, a, b, c, _ = _overlap_arrays(sig[j], sig_t[j], r[j], r_t[j], w,
                                    sig, sig_t, r, r_t, w)
    return p * _taylor_table(a, b, c, n)[n, n]


def psi_br(n, x, trajectories, t):
    """Monte Carlo average of psi_stc over trajectories at time ``t``.

    Returns the average divided by its L2 norm ``alpha``, which is computed
    exactly from pairwise frame overlaps (alpha = 1 when all paths coincide).
    Standard errors are per grid point, in the same normalisation.
    """
    _check_n(n)
    if len(trajectories) == 0:
        raise PreconditionError("ensemble is empty")
    x = np.asarray(x, dtype=float)
    frames = [frame_from_trajectory(tr, t) for tr in trajectories]
    vals = np.array([psi_stc(n, x, f) for f in frames])
    mean = vals.mean(axis=0)
    k = len(frames)
    if k > 1:
        var = vals.real.var(axis=0, ddof=1) + vals.imag.var(axis=0, ddof=1)
        se = np.sqrt(var / k)
    else:
        se = np.zeros(x.shape)
    sig = np.array([f.sigma for f in frames])
    sig_t = np.array([f.sigma_t for f in frames])
    r = np.array([f.r for f in frames])
    r_t = np.array([f.r_t for f in frames])
    w = frames[0].omega_in
    rows = np.array([np.sum(_pair_overlaps(n, sig, sig_t, r, r_t, w, j)) for j in range(k)])
    norm2 = float(np.real(np.sum(rows))) / (k * k)
    alpha = math.sqrt(max(norm2, 0.0))
    return PsiBr(x=x, values=mean / alpha, std_error=se / alpha, alpha=alpha, n_traj=k)
