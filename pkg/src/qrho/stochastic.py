"""Euler-Maruyama integration of the complex phase Phi = theta + i phi.

The oscillator xi'' + (Omega_0(t)^2 + f0 + F(t)) xi = 0 with white noise F is
tracked through its logarithmic derivative Phi = xi'/xi, which obeys

    d theta = -(theta^2 - phi^2 + U0(t)) dt - dW,    <dW^2> = 2 eps dt,
    d phi   = -2 phi theta dt.

phi is kept in log form, ln phi = ln Omega_in - 2 int theta dt, so it cannot
underflow.  theta reaches -inf in finite time whenever xi crosses zero; the
integrator caps it at -theta_max and re-enters at +theta_max, resetting phi to
the floor value 1e-300.

Noise comes from a counter-based generator: the k-th standard normal of stream
``stream_id`` is a pure function of ``(seed, stream_id, k)`` (SplitMix64 hash
and Box-Muller), so ensembles are reproducible regardless of scheduling.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import csv
import math
import os

import numba
import numpy as np

from .errors import PreconditionError, StabilityError

__all__ = [
    "FrequencyProfile",
    "NoiseSpec",
    "ComplexPhase",
    "Trajectory",
    "PHI_FLOOR",
    "default_theta_max",
    "default_t0",
    "noise_increments",
    "standard_normals",
    "integrate_phase",
    "ensemble",
    "ThetaHistogram",
    "theta_histogram",
    "worker_count",
    "write_trajectory_csv",
]

PHI_FLOOR = 1e-300
_LOG_PHI_FLOOR = math.log(PHI_FLOOR)
_KINDS = {"constant": 0, "step": 1, "smooth-tanh": 2}
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class FrequencyProfile:
    """Deterministic frequency law Omega_0(t) plus a constant shift f0 of Omega^2.

    ``step`` switches from omega_in to omega_out at t_c (Heaviside, value
    omega_out at t = t_c); ``smooth-tanh`` interpolates with width
    ``smoothing_scale``.  Noise acts for t >= t_c.
    """

    kind: str = "constant"
    omega_in: float = 1.0
    omega_out: float = 1.0
    t_c: float = 0.0
    smoothing_scale: float = 1.0
    f0: float = 0.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise PreconditionError(f"unknown profile kind {self.kind!r}")
        if not (self.omega_in > 0 and self.omega_out > 0):
            raise PreconditionError("omega_in and omega_out must be positive")
        if self.kind == "constant" and self.omega_out != self.omega_in:
            object.__setattr__(self, "omega_out", self.omega_in)
        if not self.smoothing_scale > 0:
            raise PreconditionError("smoothing_scale must be positive")
        if min(self.omega_in, self.omega_out) ** 2 + self.f0 <= 0:
            raise PreconditionError("U0 = Omega_0^2 + f0 must stay positive")

    def omega(self, t):
        t = np.asarray(t, dtype=float)
        return _omega_vec(_KINDS[self.kind], self.omega_in, self.omega_out, self.t_c,
                          self.smoothing_scale, t)

    def u0(self, t):
        return self.omega(t) ** 2 + self.f0

    def max_u0(self):
        return max(self.omega_in, self.omega_out) ** 2 + self.f0


def _omega_vec(kind, w_in, w_out, t_c, s, t):
    if kind == 0:
        return np.full_like(t, w_in)
    if kind == 1:
        return np.where(t >= t_c, w_out, w_in)
    return w_in + (w_out - w_in) * 0.5 * (1.0 + np.tanh((t - t_c) / s))


@dataclass(frozen=True)
class NoiseSpec:
    """White-noise source: diffusion constant, 64-bit seed and stream index."""

    epsilon: float = 0.0
    seed: int = 0
    stream_id: int = 0

    def __post_init__(self):
        if not self.epsilon >= 0:
            raise PreconditionError("epsilon must be non-negative")
        if self.stream_id < 0:
            raise PreconditionError("stream_id must be non-negative")


@dataclass(frozen=True)
class ComplexPhase:
    theta: float
    phi: float


def default_theta_max(profile, noise):
    return 50.0 * max(profile.omega_in, noise.epsilon ** (1.0 / 3.0))


def default_t0(profile):
    return profile.t_c - 20.0 / profile.omega_in


@dataclass(frozen=True)
class Trajectory:
    """Sampled path of the phase with the reconstructed frame series.

    ``log_sigma`` is int theta dt; ``sigma``, ``r_t`` and ``lambda_frame``
    are derived from it and may over/underflow for very long paths, while
    ``log_sigma`` itself does not.
    """

    time_grid: np.ndarray
    theta: np.ndarray
    phi: np.ndarray
    log_sigma: np.ndarray
    r: np.ndarray
    tau: np.ndarray
    omega_in: float
    stream_id: int = 0
    reinjections: list = field(default_factory=list)

    @property
    def sigma(self):
        return np.exp(self.log_sigma)

    @property
    def sigma_t(self):
        return self.theta * self.sigma

    @property
    def r_t(self):
        return self.omega_in * np.exp(-2.0 * self.log_sigma)

    @property
    def lambda_frame(self):
        return 0.5 * self.theta * np.exp(2.0 * self.log_sigma)

    @property
    def phase(self):
        return [ComplexPhase(float(a), float(b)) for a, b in zip(self.theta, self.phi)]

    def __len__(self):
        return self.time_grid.size


# ---------------------------------------------------------------------------
# counter-based normal generator

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)


@numba.njit(inline="always", cache=True)
def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@numba.njit(cache=True)
def _stream_key(seed, stream):
    return _mix(seed ^ _mix(stream + _GOLDEN))


@numba.njit(inline="always", cache=True)
def _normal_pair(key, j):
    two = np.uint64(2)
    h1 = _mix(key + (two * j + np.uint64(1)) * _GOLDEN)
    h2 = _mix(key + (two * j + two) * _GOLDEN)
    u1 = ((h1 >> np.uint64(11)) + np.uint64(1)) * (1.0 / 9007199254740992.0)
    u2 = (h2 >> np.uint64(11)) * (1.0 / 9007199254740992.0)
    rad = math.sqrt(-2.0 * math.log(u1))
    ang = 2.0 * math.pi * u2
    return rad * math.cos(ang), rad * math.sin(ang)


@numba.njit(cache=True)
def _normals(key, start, count, out):
    for i in range(count):
        k = start + i
        z0, z1 = _normal_pair(key, np.uint64(k // 2))
        out[i] = z0 if k % 2 == 0 else z1


def _key(seed, stream_id):
    # numba boxes uint64 results as Python int; re-wrap so kernels see uint64
    return np.uint64(_stream_key(np.uint64(int(seed) & _MASK64), np.uint64(int(stream_id) & _MASK64)))


def standard_normals(seed, stream_id, count, start=0):
    """Standard normals number ``start .. start+count-1`` of one stream."""
    out = np.empty(int(count))
    _normals(_key(seed, stream_id), int(start), int(count), out)
    return out


def noise_increments(spec, dt, count, start=0):
    """Gaussian increments with mean 0 and variance ``2 epsilon dt``."""
    if not dt > 0:
        raise PreconditionError("dt must be positive")
    if count < 0:
        raise PreconditionError("count must be non-negative")
    if spec.epsilon == 0:
        return np.zeros(int(count))
    return math.sqrt(2.0 * spec.epsilon * dt) * standard_normals(spec.seed, spec.stream_id, count, start)


# ---------------------------------------------------------------------------
# stepping kernels

@numba.njit(inline="always", cache=True)
def _u0(kind, w_in, w_out, t_c, s, f0, t):
    if kind == 0:
        w = w_in
    elif kind == 1:
        w = w_out if t >= t_c else w_in
    else:
        w = w_in + (w_out - w_in) * 0.5 * (1.0 + math.tanh((t - t_c) / s))
    return w * w + f0


@numba.njit(cache=True, nogil=True)
def _path(prof, eps, key, t0, dt, nst, h_last, thmax, th0, lphi0, stride,
          t_rec, th_rec, lphi_rec, ls_rec, r_rec, events):
    """Integrate one path; return 0 on success or the failing step index + 1."""
    kind = int(prof[0])
    w_in, w_out, t_c, s, f0 = prof[1], prof[2], prof[3], prof[4], prof[5]
    th = th0
    lphi = lphi0
    ls = 0.0
    r = 0.0
    rt = w_in
    z1 = 0.0
    n_rec = 0
    t_rec[0] = t0; th_rec[0] = th; lphi_rec[0] = lphi; ls_rec[0] = 0.0; r_rec[0] = 0.0
    n_rec = 1
    for k in range(nst):
        t = t0 + k * dt
        h = dt if k < nst - 1 else h_last
        if k % 2 == 0:
            z, z1 = _normal_pair(key, np.uint64(k // 2))
        else:
            z = z1
        noise = 0.0
        if eps > 0.0 and t >= t_c:
            noise = math.sqrt(2.0 * eps * h) * z
        phi = math.exp(lphi) if lphi > _LOG_PHI_FLOOR else 0.0
        u0 = _u0(kind, w_in, w_out, t_c, s, f0, t)
        t2 = th - (th * th - phi * phi + u0) * h - noise
        if not math.isfinite(t2) or abs(th) * h > 1.0:
            return k + 1
        inc = 0.5 * (th + t2) * h
        ls += inc
        lphi -= 2.0 * inc
        if lphi < _LOG_PHI_FLOOR:
            lphi = _LOG_PHI_FLOOR
        if t2 <= -thmax:
            t2 = thmax
            lphi = _LOG_PHI_FLOOR
            events[k] = 1
        rt2 = w_in * math.exp(-2.0 * ls)
        r += 0.5 * (rt + rt2) * h
        rt = rt2
        th = t2
        if (k + 1) % stride == 0 or k == nst - 1:
            t_rec[n_rec] = t0 + k * dt + h
            th_rec[n_rec] = th
            lphi_rec[n_rec] = lphi
            ls_rec[n_rec] = ls
            r_rec[n_rec] = r
            n_rec += 1
    return 0


def _profile_array(profile):
    return np.array([_KINDS[profile.kind], profile.omega_in, profile.omega_out, profile.t_c,
                     profile.smoothing_scale, profile.f0], dtype=float)


def _steps(t0, t1, dt):
    if not t0 < t1:
        raise PreconditionError("need t0 < t1")
    if not dt > 0:
        raise PreconditionError("dt must be positive")
    span = t1 - t0
    nst = max(1, int(math.ceil(span / dt - 1e-9)))
    h_last = span - (nst - 1) * dt
    return nst, h_last


def _validate(profile, dt, theta_max):
    if not dt * profile.max_u0() < 0.1:
        raise PreconditionError(
            f"dt * max U0 = {dt * profile.max_u0():.3g} must be below 0.1")
    if not theta_max > 0:
        raise PreconditionError("theta_max must be positive")


def _initial_state(profile, initial):
    if initial is None:
        return 0.0, math.log(profile.omega_in)
    if initial.phi < 0:
        raise PreconditionError("initial phi must be non-negative")
    lphi = math.log(initial.phi) if initial.phi > PHI_FLOOR else _LOG_PHI_FLOOR
    return float(initial.theta), lphi


def integrate_phase(profile, noise, t0=None, t1=None, dt=1e-3, theta_max=None, *,
                    initial=None, record_every=1):
    """Integrate one path of the phase SDE from ``t0`` to ``t1``.

    Starts at the in-channel fixed point Phi = i Omega_in unless ``initial``
    is given.  Nodes are recorded every ``record_every`` steps and at ``t1``.
    ``t0`` defaults to ``t_c - 20/Omega_in``; ``theta_max`` defaults to
    ``50 max(Omega_in, eps^{1/3})``.

    Raises StabilityError when a step lands on a non-finite value or when
    ``|theta| dt`` exceeds 1 (the Euler map then overshoots through zero).
    """
    t0 = default_t0(profile) if t0 is None else float(t0)
    if t1 is None:
        raise PreconditionError("t1 is required")
    theta_max = default_theta_max(profile, noise) if theta_max is None else float(theta_max)
    _validate(profile, dt, theta_max)
    if record_every < 1:
        raise PreconditionError("record_every must be at least 1")
    nst, h_last = _steps(t0, float(t1), dt)
    n_rec = 1 + nst // record_every + (0 if nst % record_every == 0 else 1)
    bufs = [np.empty(n_rec) for _ in range(5)]
    events = np.zeros(nst, dtype=np.int8)
    th0, lphi0 = _initial_state(profile, initial)
    status = _path(_profile_array(profile), float(noise.epsilon), _key(noise.seed, noise.stream_id),
                   t0, float(dt), nst, h_last, theta_max, th0, lphi0, int(record_every),
                   *bufs, events)
    if status:
        k = status - 1
        raise StabilityError(
            f"stream {noise.stream_id}: step {k} at t = {t0 + k * dt:.6g} became unstable; "
            f"reduce dt below {0.5 / theta_max:.3g} (or lower theta_max)",
            estimate=None, residual=k)
    t_rec, th_rec, lphi_rec, ls_rec, r_rec = bufs
    ev_steps = np.nonzero(events)[0]
    reinj = [(float(t0 + (k + 1) * dt if k < nst - 1 else t1), -1) for k in ev_steps]
    return Trajectory(time_grid=t_rec, theta=th_rec, phi=np.exp(lphi_rec), log_sigma=ls_rec,
                      r=r_rec, tau=r_rec / profile.omega_in, omega_in=profile.omega_in,
                      stream_id=noise.stream_id, reinjections=reinj)


def worker_count(default=1):
    """Worker threads from the QRHO_WORKERS environment variable."""
    try:
        n = int(os.environ.get("QRHO_WORKERS", default))
    except ValueError:
        n = default
    return max(1, n)


def ensemble(profile, noise, n_traj, t0=None, t1=None, dt=1e-3, theta_max=None, *,
             initial=None, record_every=1, workers=None):
    """Trajectories for stream ids 0 .. n_traj-1 sharing ``noise.seed``.

    The result is identical for any number of workers.  A failing path raises
    StabilityError naming its stream id.
    """
    if n_traj < 1:
        raise PreconditionError("n_traj must be at least 1")
    workers = worker_count() if workers is None else max(1, int(workers))

    def one(i):
        spec = NoiseSpec(epsilon=noise.epsilon, seed=noise.seed, stream_id=i)
        return integrate_phase(profile, spec, t0, t1, dt, theta_max,
                               initial=initial, record_every=record_every)

    if workers == 1:
        return [one(i) for i in range(n_traj)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, range(n_traj)))


# ---------------------------------------------------------------------------
# fast path: histogram of theta without storing paths

@numba.njit(cache=True, nogil=True)
def _hist_block(prof, eps, seed, i0, i1, t0, dt, nst, thmax, th0, lphi0,
                k_start, k_every, lo, width, nbins, counts, status):
    kind = int(prof[0])
    w_in, w_out, t_c, s, f0 = prof[1], prof[2], prof[3], prof[4], prof[5]
    sq = math.sqrt(2.0 * eps * dt)
    reinj = 0
    for i in range(i0, i1):
        key = _stream_key(seed, np.uint64(i))
        th = th0
        lphi = lphi0
        z1 = 0.0
        for k in range(nst):
            t = t0 + k * dt
            if k % 2 == 0:
                z, z1 = _normal_pair(key, np.uint64(k // 2))
            else:
                z = z1
            noise = sq * z if (eps > 0.0 and t >= t_c) else 0.0
            u0 = _u0(kind, w_in, w_out, t_c, s, f0, t)
            if lphi > _LOG_PHI_FLOOR:
                phi = math.exp(lphi)
                t2 = th - (th * th - phi * phi + u0) * dt - noise
                lphi -= (th + t2) * dt
                if lphi < _LOG_PHI_FLOOR:
                    lphi = _LOG_PHI_FLOOR
            else:
                t2 = th - (th * th + u0) * dt - noise
            if not math.isfinite(t2) or abs(th) * dt > 1.0:
                status[0] = i + 1
                return reinj
            if t2 <= -thmax:
                t2 = thmax
                lphi = _LOG_PHI_FLOOR
                reinj += 1
            th = t2
            kk = k + 1
            if kk >= k_start and (kk - k_start) % k_every == 0:
                b = int(math.floor((th - lo) / width))
                if b < 0:
                    counts[nbins] += 1
                elif b >= nbins:
                    counts[nbins + 1] += 1
                else:
                    counts[b] += 1
    return reinj


@dataclass(frozen=True)
class ThetaHistogram:
    """Counts of theta samples on uniform bins plus under/overflow counts."""

    edges: np.ndarray
    counts: np.ndarray
    underflow: int
    overflow: int
    reinjections: int
    n_traj: int
    elapsed: float

    @property
    def total(self):
        return int(self.counts.sum()) + self.underflow + self.overflow

    def probabilities(self):
        """Bin probabilities followed by (below, above) masses."""
        tot = self.total
        return self.counts / tot, self.underflow / tot, self.overflow / tot


def theta_histogram(profile, noise, n_traj, t0, t1, dt, theta_max, edges, *,
                    sample_from=None, sample_every=1, initial=None, workers=None):
    """Pooled histogram of theta over ``n_traj`` paths without storing them.

    Samples are taken every ``sample_every`` steps from time ``sample_from``
    (default: the final step only).  Paths follow exactly the same update
    as :func:`integrate_phase` with constant step ``dt``; the histogram is
    independent of the worker count.
    """
    if n_traj < 1:
        raise PreconditionError("n_traj must be at least 1")
    theta_max = default_theta_max(profile, noise) if theta_max is None else float(theta_max)
    _validate(profile, dt, theta_max)
    edges = np.asarray(edges, dtype=float)
    width = edges[1] - edges[0]
    if not np.allclose(np.diff(edges), width, rtol=1e-12, atol=0):
        raise PreconditionError("histogram edges must be uniform")
    nst = max(1, int(round((t1 - t0) / dt)))
    if sample_from is None:
        k_start = nst
    else:
        k_start = min(nst, max(1, int(round((sample_from - t0) / dt))))
    th0, lphi0 = _initial_state(profile, initial)
    nb = edges.size - 1
    prof = _profile_array(profile)
    seed = np.uint64(int(noise.seed) & _MASK64)
    workers = worker_count() if workers is None else max(1, int(workers))
    chunks = np.linspace(0, n_traj, workers + 1).astype(int)

    def run(c):
        counts = np.zeros(nb + 2, dtype=np.int64)
        status = np.zeros(1, dtype=np.int64)
        re = _hist_block(prof, float(noise.epsilon), seed, int(chunks[c]), int(chunks[c + 1]),
                         float(t0), float(dt), nst, theta_max, th0, lphi0, k_start,
                         int(sample_every), edges[0], width, nb, counts, status)
        return counts, re, int(status[0])

    if workers == 1:
        parts = [run(0)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(workers)))
    for _, _, st in parts:
        if st:
            raise StabilityError(f"stream {st - 1} became unstable; reduce dt", residual=st - 1)
    counts = sum(p[0] for p in parts)
    return ThetaHistogram(edges=edges, counts=counts[:nb], underflow=int(counts[nb]),
                          overflow=int(counts[nb + 1]), reinjections=int(sum(p[1] for p in parts)),
                          n_traj=int(n_traj), elapsed=float(nst * dt))


def write_trajectory_csv(traj, path):
    """Dump ``t,theta,phi,sigma,r,tau`` one row per node."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "theta", "phi", "sigma", "r", "tau"])
        for row in zip(traj.time_grid, traj.theta, traj.phi, traj.sigma, traj.r, traj.tau):
            w.writerow(["%.16e" % v for v in row])
