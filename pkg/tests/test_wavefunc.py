import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qrho.errors import CapabilityError, PreconditionError
from qrho.stochastic import FrequencyProfile, NoiseSpec, ensemble
from qrho.wavefunc import (FrameState, deterministic_frame, generating_overlap, gram_matrix,
                           overlap_coefficients, psi_br, psi_in, psi_stc, s_closed_forms,
                           s_local, unitarity_defect)


def frame(w, sig, sig_t, r):
    return FrameState(sigma=sig, sigma_t=sig_t, r=r, r_t=w / sig ** 2, tau=r / w, omega_in=w)


frames = st.builds(frame, st.floats(0.3, 4.0), st.floats(0.3, 3.0), st.floats(-3.0, 3.0),
                   st.floats(-6.0, 6.0))


# --------------------------------------------------------------------------- states

def test_ground_state_peak():
    assert psi_in(0, 0.0, 0.0, 1.0) == pytest.approx(math.pi ** -0.25, rel=1e-15)


def test_in_states_normalised():
    u, wts = np.polynomial.hermite.hermgauss(64)
    for n in range(9):
        w = 1.7
        x = u / math.sqrt(w)
        dens = np.abs(psi_in(n, x, 0.3, w)) ** 2 * np.exp(u * u) * wts / math.sqrt(w)
        assert dens.sum() == pytest.approx(1.0, abs=1e-10)


def test_in_state_time_phase():
    x = np.array([-0.7, 0.2, 1.1])
    for n in (0, 3):
        ratio = psi_in(n, x, 2.0, 1.5) / psi_in(n, x, 0.0, 1.5)
        np.testing.assert_allclose(ratio, np.exp(-1j * (n + 0.5) * 1.5 * 2.0), atol=1e-14)


def test_deterministic_frame_reproduces_in_state():
    x = np.linspace(-3.0, 3.0, 13)
    for n in (0, 1, 5):
        np.testing.assert_allclose(psi_stc(n, x, deterministic_frame(1.2, 0.7)),
                                   psi_in(n, x, 0.7, 1.2), rtol=1e-14, atol=1e-15)


def test_second_moment_of_stretched_ground_state():
    f = frame(1.0, 2.0, 0.0, 0.0)
    u, wts = np.polynomial.hermite.hermgauss(40)
    x = u / math.sqrt(f.r_t)
    dens = np.abs(psi_stc(0, x, f)) ** 2 * np.exp(u * u) * wts / math.sqrt(f.r_t)
    assert float(np.sum(dens * x * x)) == pytest.approx(2.0, rel=1e-12)


def test_gram_identity_for_random_frames():
    rng = np.random.default_rng(2024)
    for _ in range(20):
        f = frame(rng.uniform(0.3, 4.0), rng.uniform(0.3, 3.0), rng.uniform(-3, 3),
                  rng.uniform(-6, 6))
        assert np.max(np.abs(gram_matrix(f, 8) - np.eye(9))) < 1e-10


@settings(max_examples=30, deadline=None)
@given(f=frames)
def test_gram_identity_property(f):
    assert np.max(np.abs(gram_matrix(f, 8) - np.eye(9))) < 1e-10


def test_level_bound_and_frame_invariant():
    with pytest.raises(CapabilityError):
        psi_in(33, 0.0, 0.0, 1.0)
    with pytest.raises(PreconditionError):
        FrameState(sigma=1.0, sigma_t=0.0, r=0.0, r_t=2.0, tau=0.0, omega_in=1.0)


# --------------------------------------------------------------------------- S-matrix

def test_smatrix_against_quadrature_oracle(oracles):
    for case in oracles["smatrix"]:
        wi, si, sti, ri = case["in"]
        wo, so, sto, ro = case["out"]
        s = s_local(3, frame(wi, si, sti, ri), frame(wo, so, sto, ro))
        for n, m, re, im in case["entries"]:
            assert abs(s.entries[n, m] - complex(re, im)) < 1e-12


def test_generating_function_matches_entries():
    fi, fo = frame(1.3, 1.4, 0.6, 0.8), frame(0.7, 0.8, -0.3, 2.1)
    s = s_local(24, fi, fo)
    z, w = 0.3 - 0.1j, 0.2 + 0.25j
    n = np.arange(25)
    fact = np.array([math.sqrt(math.factorial(k)) for k in n])
    series = np.sum(s.entries * np.outer(z ** n / fact, w ** n / fact))
    assert abs(series - generating_overlap(z, w, fi, fo)) < 1e-12


@settings(max_examples=30, deadline=None)
@given(fi=frames, fo=frames)
def test_parity_and_cube_law(fi, fo):
    s = s_local(8, fi, fo)
    cf = s_closed_forms(fi, fo)
    assert s.parity_defect() < 1e-12
    assert abs(s.entries[1, 1] - cf["S00"] ** 3) < 1e-10
    assert abs(s.entries[0, 0] - cf["S00"]) < 1e-14
    assert abs(s.entries[2, 0] - cf["S20"]) < 1e-12
    assert abs(s.entries[0, 2] - cf["S02"]) < 1e-12


def test_sudden_step_vacuum_probability():
    for wi, wo in ((1.0, 4.0), (2.0, 0.5), (1.0, 1.0), (3.0, 7.0)):
        s00 = s_local(0, deterministic_frame(wi, 0.0), deterministic_frame(wo, 0.0)).entries[0, 0]
        assert abs(abs(s00) ** 2 - 2 * math.sqrt(wi * wo) / (wi + wo)) < 1e-12
    s00 = s_local(0, deterministic_frame(1.0, 0.0), deterministic_frame(4.0, 0.0)).entries[0, 0]
    assert abs(abs(s00) ** 2 - 0.8) < 1e-12


def test_identical_frames_give_identity():
    f = frame(1.1, 1.3, 0.4, 0.2)
    s = s_local(10, f, f)
    assert np.max(np.abs(s.entries - np.eye(11))) < 1e-12


@pytest.mark.parametrize("wi,wo,t", [(1.0, 2.0, 0.0), (1.0, 0.5, 0.3), (2.0, 3.0, 1.0),
                                     (1.5, 1.5, 0.0)])
def test_unitarity_partial_sums(wi, wo, t):
    fi, fo = deterministic_frame(wi, t), deterministic_frame(wo, t)
    for n in range(4):
        for m in range(4):
            d = unitarity_defect(fi, fo, n, m, 32)
            assert d[-1] < 1e-6
    diag = unitarity_defect(fi, fo, 0, 0, 32)[::2]
    assert np.all(np.diff(diag) <= 1e-15)


def test_valid_frames_give_integrable_overlap():
    co = overlap_coefficients(frame(1.0, 0.5, 2.0, 0.0), frame(3.0, 2.0, -1.0, 1.0))
    assert co.big_a.real > 0


# --------------------------------------------------------------------------- averaged functional

def test_noiseless_average_equals_deterministic_state():
    w = 1.4
    prof = FrequencyProfile("constant", w, w)
    ens = ensemble(prof, NoiseSpec(0.0, seed=1), 8, 0.0, 2.0, 1e-3)
    x = np.linspace(-3.0, 3.0, 25)
    for n in (0, 2):
        br = psi_br(n, x, ens, 1.5)
        assert br.alpha == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_allclose(br.values, psi_in(n, x, 1.5, w), rtol=1e-12, atol=1e-13)
        assert np.max(br.std_error) < 1e-15


def test_noisy_average_is_contracted_and_finite():
    prof = FrequencyProfile("step", 1.0, 2.0, t_c=0.0)
    ens = ensemble(prof, NoiseSpec(0.3, seed=4), 30, -1.0, 1.0, 1e-3)
    br = psi_br(0, np.linspace(-2, 2, 9), ens, 1.0)
    assert 0.0 < br.alpha <= 1.0 + 1e-12
    assert np.all(np.isfinite(br.values)) and np.all(br.std_error > 0)


def test_average_preconditions():
    with pytest.raises(PreconditionError):
        psi_br(0, [0.0], [], 0.0)
    prof = FrequencyProfile("constant", 1.0, 1.0)
    ens = ensemble(prof, NoiseSpec(0.0), 1, 0.0, 1.0, 1e-3)
    with pytest.raises(PreconditionError):
        psi_br(0, [0.0], ens, 3.0)
