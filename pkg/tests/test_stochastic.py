import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import solve_ivp

from qrho.errors import PreconditionError, StabilityError
from qrho.fokker_planck import half_masses
from qrho.stochastic import (PHI_FLOOR, ComplexPhase, FrequencyProfile, NoiseSpec,
                             default_t0, default_theta_max, ensemble, integrate_phase,
                             noise_increments, standard_normals, theta_histogram,
                             write_trajectory_csv)

M64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def ref_mix(z):
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & M64
    return z ^ (z >> 31)


def ref_normals(seed, stream, count):
    """Plain-integer SplitMix64 + Box-Muller, written independently of the kernels."""
    key = ref_mix(seed ^ ref_mix((stream + GOLDEN) & M64))
    out = []
    for k in range(count):
        j = k // 2
        h1 = ref_mix((key + (2 * j + 1) * GOLDEN) & M64)
        h2 = ref_mix((key + (2 * j + 2) * GOLDEN) & M64)
        u1 = ((h1 >> 11) + 1) / 2.0 ** 53
        u2 = (h2 >> 11) / 2.0 ** 53
        rad = math.sqrt(-2.0 * math.log(u1))
        ang = 2.0 * math.pi * u2
        out.append(rad * math.cos(ang) if k % 2 == 0 else rad * math.sin(ang))
    return np.array(out)


# --------------------------------------------------------------------------- noise

def test_normals_match_plain_integer_reference():
    for seed, stream in ((0, 0), (7, 3), (2 ** 63 + 5, 12345)):
        np.testing.assert_array_equal(standard_normals(seed, stream, 11),
                                      ref_normals(seed, stream, 11))


def test_normals_offset_is_a_window_of_the_stream():
    full = standard_normals(3, 1, 40)
    np.testing.assert_array_equal(standard_normals(3, 1, 15, start=17), full[17:32])


def test_zero_epsilon_gives_exact_zeros():
    assert np.all(noise_increments(NoiseSpec(0.0, seed=1), 0.01, 100) == 0.0)


def test_increment_variance():
    x = noise_increments(NoiseSpec(0.5, seed=11, stream_id=2), 0.01, 10 ** 6)
    assert abs(x.var() / 0.01 - 1.0) < 0.01
    assert abs(x.mean()) < 5 * math.sqrt(0.01 / 1e6)


def test_same_seed_and_stream_bitwise_identical():
    a = noise_increments(NoiseSpec(1.0, seed=7, stream_id=3), 0.01, 1000)
    b = noise_increments(NoiseSpec(1.0, seed=7, stream_id=3), 0.01, 1000)
    assert a.tobytes() == b.tobytes()
    c = noise_increments(NoiseSpec(1.0, seed=7, stream_id=4), 0.01, 1000)
    assert not np.array_equal(a, c)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2 ** 64 - 1), stream=st.integers(0, 10 ** 6))
def test_normals_finite_and_deterministic(seed, stream):
    a = standard_normals(seed, stream, 64)
    assert np.all(np.isfinite(a))
    assert a.tobytes() == standard_normals(seed, stream, 64).tobytes()


def test_increment_preconditions():
    with pytest.raises(PreconditionError):
        noise_increments(NoiseSpec(1.0), 0.0, 10)
    with pytest.raises(PreconditionError):
        NoiseSpec(-1.0)


# --------------------------------------------------------------------------- profiles

def test_step_profile_values():
    p = FrequencyProfile("step", 1.0, 3.0, t_c=2.0)
    np.testing.assert_array_equal(p.omega([1.9, 2.0, 2.1]), [1.0, 3.0, 3.0])


def test_profile_rejects_nonpositive_u0():
    with pytest.raises(PreconditionError):
        FrequencyProfile("constant", 1.0, 1.0, f0=-2.0)
    with pytest.raises(PreconditionError):
        FrequencyProfile("sawtooth", 1.0, 1.0)


# --------------------------------------------------------------------------- noiseless paths

def test_fixed_point_is_preserved():
    prof = FrequencyProfile("constant", 1.7, 1.7)
    tr = integrate_phase(prof, NoiseSpec(0.0), 0.0, 5.0, 1e-3)
    assert np.max(np.abs(tr.theta)) == 0.0
    assert np.max(np.abs(tr.phi - 1.7)) < 1e-14


def test_constant_profile_frame_series():
    w = 1.3
    tr = integrate_phase(FrequencyProfile("constant", w, w), NoiseSpec(0.0), 1.0, 4.0, 1e-3)
    np.testing.assert_allclose(tr.sigma, 1.0, atol=1e-15)
    np.testing.assert_allclose(tr.r, w * (tr.time_grid - 1.0), rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(tr.tau, tr.time_grid - 1.0, rtol=1e-12, atol=1e-12)


def _exact_step(w_in, w_out, t_c, t):
    # xi = cos(w_out s) + i (w_in / w_out) sin(w_out s) after the step, xi' / xi = Phi
    s = t - t_c
    xi = np.cos(w_out * s) + 1j * (w_in / w_out) * np.sin(w_out * s)
    dxi = -w_out * np.sin(w_out * s) + 1j * w_in * np.cos(w_out * s)
    return dxi / xi


def test_step_profile_matches_exact_oscillator():
    w_in, w_out, t_c = 1.0, 2.0, 0.0
    prof = FrequencyProfile("step", w_in, w_out, t_c=t_c)
    tr = integrate_phase(prof, NoiseSpec(0.0), -0.5, 0.6, 1e-7, record_every=10000)
    after = tr.time_grid > t_c
    phi_exact = _exact_step(w_in, w_out, t_c, tr.time_grid[after])
    err = np.max(np.abs(tr.theta[after] + 1j * tr.phi[after] - phi_exact))
    assert err < 1e-6


def test_step_profile_matches_ode_solver():
    # independent route: integrate the oscillator itself with a high-order solver
    w_in, w_out = 1.0, 1.5
    prof = FrequencyProfile("smooth-tanh", w_in, w_out, t_c=0.0, smoothing_scale=0.3)
    t_end = 0.8

    def rhs(t, y):
        return [y[1], -prof.u0(t) * y[0]]

    t0 = -3.0
    sol = solve_ivp(rhs, (t0, t_end), [1.0 + 0j, 1j * w_in], method="DOP853",
                    rtol=1e-12, atol=1e-14, dense_output=True)
    tr = integrate_phase(prof, NoiseSpec(0.0), t0, t_end, 1e-5, record_every=1000)
    xi, dxi = sol.sol(tr.time_grid)
    ref = dxi / xi
    err = np.max(np.abs(tr.theta + 1j * tr.phi - ref))
    assert err < 2e-4  # first-order scheme at dt = 1e-5


# --------------------------------------------------------------------------- noisy paths

def _noisy(seed=5, stream=0, t1=3.0):
    prof = FrequencyProfile("constant", 1.0, 1.0)
    return integrate_phase(prof, NoiseSpec(1.0, seed=seed, stream_id=stream), 0.0, t1, 1e-3)


def test_frame_identities_along_noisy_path():
    tr = _noisy()
    np.testing.assert_allclose(tr.r_t * tr.sigma ** 2, tr.omega_in, rtol=1e-8)
    np.testing.assert_allclose(tr.lambda_frame, 0.5 * tr.sigma_t * tr.sigma, rtol=1e-8)
    assert np.all(np.diff(tr.tau) >= 0)


def test_phi_follows_log_sigma_between_reinjections():
    tr = _noisy(stream=1)
    stop = tr.time_grid.size
    if tr.reinjections:
        stop = int(np.searchsorted(tr.time_grid, tr.reinjections[0][0]))
    expect = tr.omega_in * np.exp(-2.0 * tr.log_sigma[:stop])
    ok = expect > 1e-290
    np.testing.assert_allclose(tr.phi[:stop][ok], expect[ok], rtol=1e-6)
    assert np.all(tr.phi > 0)


def test_reinjection_recorded_and_resets_state():
    prof = FrequencyProfile("constant", 1.0, 1.0)
    tr = integrate_phase(prof, NoiseSpec(1.0, seed=9), 0.0, 20.0, 1e-3, theta_max=30.0)
    assert len(tr.reinjections) > 0
    t_first = tr.reinjections[0][0]
    k = int(np.argmin(np.abs(tr.time_grid - t_first)))
    assert tr.theta[k] == 30.0
    assert tr.phi[k] == pytest.approx(PHI_FLOOR, rel=1e-12)


def test_reinjection_count_grows_linearly():
    prof = FrequencyProfile("constant", 1.0, 1.0)
    start = ComplexPhase(theta=50.0, phi=0.0)
    edges = np.linspace(-1.0, 1.0, 3)
    counts = [theta_histogram(prof, NoiseSpec(1.0, seed=2), 400, 0.0, t, 2e-3, 50.0, edges,
                              initial=start).reinjections for t in (10.0, 20.0)]
    assert counts[1] / counts[0] == pytest.approx(2.0, rel=0.1)


def test_long_time_asymmetry_matches_stationary_density():
    # one final sample per path keeps the samples independent
    prof = FrequencyProfile("constant", 1.0, 1.0)
    n = 4000
    h = theta_histogram(prof, NoiseSpec(1.0, seed=4), n, 0.0, 6.0, 2e-3, 100.0,
                        np.array([-1e9, 0.0, 1e9]), initial=ComplexPhase(theta=100.0, phi=0.0))
    pos_mc = h.counts[1] / n
    pos, _ = half_masses(1.0, 1.0)
    assert pos_mc > 0.5
    assert abs(pos_mc - pos) < 4 * math.sqrt(pos * (1 - pos) / n)


# --------------------------------------------------------------------------- ensembles

def test_single_member_ensemble_equals_single_path():
    prof = FrequencyProfile("constant", 1.0, 1.0)
    ens = ensemble(prof, NoiseSpec(1.0, seed=3), 1, 0.0, 2.0, 1e-3)
    one = integrate_phase(prof, NoiseSpec(1.0, seed=3, stream_id=0), 0.0, 2.0, 1e-3)
    assert ens[0].theta.tobytes() == one.theta.tobytes()
    assert ens[0].r.tobytes() == one.r.tobytes()


def test_ensemble_independent_of_workers():
    prof = FrequencyProfile("step", 1.0, 2.0, t_c=0.5)
    a = ensemble(prof, NoiseSpec(0.5, seed=21), 6, 0.0, 2.0, 1e-3, workers=1)
    b = ensemble(prof, NoiseSpec(0.5, seed=21), 6, 0.0, 2.0, 1e-3, workers=4)
    for x, y in zip(a, b):
        assert x.stream_id == y.stream_id
        assert x.theta.tobytes() == y.theta.tobytes()
        assert x.log_sigma.tobytes() == y.log_sigma.tobytes()


def test_noiseless_ensemble_members_identical():
    prof = FrequencyProfile("step", 1.0, 2.0, t_c=0.5)
    ens = ensemble(prof, NoiseSpec(0.0, seed=21), 100, 0.0, 1.0, 1e-3)
    assert all(e.theta.tobytes() == ens[0].theta.tobytes() for e in ens)


def test_histogram_independent_of_workers():
    prof = FrequencyProfile("constant", 1.0, 1.0)
    edges = np.linspace(-20.0, 20.0, 81)
    args = (prof, NoiseSpec(1.0, seed=8), 300, 0.0, 3.0, 1e-3, 50.0, edges)
    a = theta_histogram(*args, sample_from=1.0, sample_every=10, workers=1)
    b = theta_histogram(*args, sample_from=1.0, sample_every=10, workers=7)
    assert a.counts.tobytes() == b.counts.tobytes()
    assert (a.underflow, a.overflow, a.reinjections) == (b.underflow, b.overflow, b.reinjections)


def test_histogram_final_sample_agrees_with_paths():
    prof = FrequencyProfile("constant", 1.0, 1.0)
    edges = np.linspace(-30.0, 30.0, 121)
    h = theta_histogram(prof, NoiseSpec(1.0, seed=12), 20, 0.0, 2.0, 1e-3, 50.0, edges)
    ens = ensemble(prof, NoiseSpec(1.0, seed=12), 20, 0.0, 2.0, 1e-3, 50.0)
    final = np.array([e.theta[-1] for e in ens])
    ref, _ = np.histogram(final, edges)
    np.testing.assert_array_equal(h.counts, ref)


# --------------------------------------------------------------------------- errors and io

def test_coarse_step_rejected_up_front():
    prof = FrequencyProfile("constant", 2.0, 2.0)
    with pytest.raises(PreconditionError):
        integrate_phase(prof, NoiseSpec(0.0), 0.0, 1.0, 0.03)


def test_stability_monitor_trips():
    prof = FrequencyProfile("constant", 1.0, 1.0)
    with pytest.raises(StabilityError) as err:
        integrate_phase(prof, NoiseSpec(1.0, seed=1, stream_id=4), 0.0, 1.0, 0.05,
                        theta_max=1e6, initial=ComplexPhase(theta=-25.0, phi=1.0))
    assert "stream 4" in str(err.value)


def test_defaults():
    prof = FrequencyProfile("step", 2.0, 1.0, t_c=3.0)
    assert default_t0(prof) == 3.0 - 10.0
    assert default_theta_max(prof, NoiseSpec(27.0)) == 150.0


def test_trajectory_csv(tmp_path):
    tr = _noisy(t1=0.01)
    path = tmp_path / "traj.csv"
    write_trajectory_csv(tr, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,theta,phi,sigma,r,tau"
    assert len(lines) == len(tr) + 1
