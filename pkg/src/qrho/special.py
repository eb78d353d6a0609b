"""Real-argument Airy functions, Hermite polynomials and adaptive quadrature.

Airy values are assembled from three pieces:

* the Maclaurin series on ``|x| <= 2``;
* a table of values on ``[-8, 8]`` (spacing 1/4) built once at import by
  high-order Taylor stepping of ``y'' = x y`` outward from the series, with
  Ai on the positive side stepped *backward* from its asymptotic value at 8 so
  that the recessive solution is never propagated in the unstable direction;
* the standard asymptotic expansions for ``|x| > 8``.

Between table nodes a local Taylor expansion of order 30 is used.  For x > 0
every routine works with exponentially scaled values (``Ai e^{zeta}``,
``Bi e^{-zeta}``, ``zeta = 2/3 x^{3/2}``) so that logarithms and ratios of
``A(x) = Ai^2 + Bi^2`` stay finite far beyond the overflow point of Bi.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy import integrate as _sp_integrate

from .errors import AiryRangeError, CapabilityError, ConvergenceError, PreconditionError

__all__ = [
    "AiryValues",
    "QuadratureSpec",
    "QuadResult",
    "AIRY_X_MIN",
    "AIRY_X_MAX",
    "MODULUS_X_MAX",
    "airy",
    "airy_scaled",
    "airy_modulus_sq",
    "log_airy_modulus_sq",
    "log_airy_modulus_derivatives",
    "airy_modulus_ratios",
    "hermite",
    "hermite_normalized",
    "FACTORIALS",
    "integrate",
    "a_p_integral",
    "log_a_p_integral",
]

AIRY_X_MIN = -110.0
# Bi(x) ~ exp(2/3 x^{3/2}) overflows a double just above 104.2.
AIRY_X_MAX = 104.0
# Ai^2 + Bi^2 overflows just above 65.8; use log_airy_modulus_sq beyond.
MODULUS_X_MAX = 65.0

_AI0 = 1.0 / (3.0 ** (2.0 / 3.0) * math.gamma(2.0 / 3.0))
_AIP0 = -1.0 / (3.0 ** (1.0 / 3.0) * math.gamma(1.0 / 3.0))
_SQRT3 = math.sqrt(3.0)
_SQRT_PI = math.sqrt(math.pi)

FACTORIALS = np.array([float(math.factorial(k)) for k in range(65)])


@dataclass(frozen=True)
class AiryValues:
    """Ai, Ai', Bi, Bi' and A = Ai^2 + Bi^2 at ``x`` (scalars or arrays)."""

    x: np.ndarray
    ai: np.ndarray
    ai_prime: np.ndarray
    bi: np.ndarray
    bi_prime: np.ndarray
    modulus_sq: np.ndarray

    @property
    def wronskian(self):
        return self.ai * self.bi_prime - self.ai_prime * self.bi


# ---------------------------------------------------------------------------
# building blocks

def _maclaurin(x):
    """Ai, Ai', Bi, Bi' from the power series about 0 (intended for |x| <= 2)."""
    x = np.asarray(x, dtype=float)
    x3 = x ** 3
    f = np.ones_like(x)
    g = x.copy()
    fp = 0.5 * x * x
    gp = np.ones_like(x)
    tf, tg, tfp, tgp = f.copy(), g.copy(), fp.copy(), gp.copy()
    for k in range(1, 40):
        tf = tf * x3 / ((3 * k - 1) * (3 * k))
        tg = tg * x3 / ((3 * k) * (3 * k + 1))
        tfp = tfp * x3 / ((3 * k) * (3 * k + 2))
        tgp = tgp * x3 / ((3 * k - 2) * (3 * k))
        f, g, fp, gp = f + tf, g + tg, fp + tfp, gp + tgp
    c1, c2 = _AI0, -_AIP0
    return (c1 * f - c2 * g, c1 * fp - c2 * gp,
            _SQRT3 * (c1 * f + c2 * g), _SQRT3 * (c1 * fp + c2 * gp))


def _taylor(x0, y, yp, h, order):
    """Advance a solution of y'' = x y from x0 to x0 + h by a Taylor polynomial."""
    cm1 = np.zeros_like(np.asarray(y, dtype=float))
    c0 = np.asarray(y, dtype=float)
    c1 = np.asarray(yp, dtype=float)
    val = c0 + c1 * h
    der = c1.copy()
    hp = h  # h**(k-1) for the derivative of the c_k term
    ck_prev, ck = c0, c1  # c_{k-1}, c_k with k = 1
    c_km1 = cm1  # c_{k-2}
    # c_{k+1} = (x0 c_{k-1} + c_{k-2}) / ((k+1) k)
    for k in range(1, order):
        cnext = (x0 * ck_prev + c_km1) / ((k + 1) * k)
        c_km1, ck_prev, ck = ck_prev, ck, cnext
        der = der + (k + 1) * cnext * hp
        hp = hp * h
        val = val + cnext * hp
    return val, der


# asymptotic coefficients u_k, v_k
_NASY = 26
_U = np.empty(_NASY)
_V = np.empty(_NASY)
_U[0] = _V[0] = 1.0
for _k in range(1, _NASY):
    _U[_k] = _U[_k - 1] * (6 * _k - 5) * (6 * _k - 3) * (6 * _k - 1) / ((2 * _k - 1) * 216 * _k)
    _V[_k] = -(6 * _k + 1) / (6 * _k - 1) * _U[_k]
del _k


def _asym_sums(zeta):
    """Return (sum_u+, sum_u-, sum_v+, sum_v-) with terms u_k zeta^-k, alternating for '-'."""
    zeta = np.asarray(zeta, dtype=float)
    iz = 1.0 / zeta
    su_p = np.zeros_like(zeta); su_m = np.zeros_like(zeta)
    sv_p = np.zeros_like(zeta); sv_m = np.zeros_like(zeta)
    p = np.ones_like(zeta)
    for k in range(_NASY):
        s = -1.0 if k % 2 else 1.0
        su_p += _U[k] * p; su_m += s * _U[k] * p
        sv_p += _V[k] * p; sv_m += s * _V[k] * p
        p = p * iz
    return su_p, su_m, sv_p, sv_m


def _asym_pos_scaled(x):
    """Scaled Ai e^zeta, Ai' e^zeta, Bi e^-zeta, Bi' e^-zeta for large positive x."""
    x = np.asarray(x, dtype=float)
    zeta = 2.0 / 3.0 * x ** 1.5
    q = x ** 0.25
    su_p, su_m, sv_p, sv_m = _asym_sums(zeta)
    ai = su_m / (2 * _SQRT_PI * q)
    aip = -q * sv_m / (2 * _SQRT_PI)
    bi = su_p / (_SQRT_PI * q)
    bip = q * sv_p / _SQRT_PI
    return ai, aip, bi, bip


def _asym_neg(t):
    """Ai, Ai', Bi, Bi' at x = -t for large positive t."""
    t = np.asarray(t, dtype=float)
    zeta = 2.0 / 3.0 * t ** 1.5
    q = t ** 0.25
    iz = 1.0 / zeta
    # even/odd alternating partial sums
    ue = np.zeros_like(t); uo = np.zeros_like(t)
    ve = np.zeros_like(t); vo = np.zeros_like(t)
    p = np.ones_like(t)
    for k in range(_NASY):
        s = -1.0 if (k // 2) % 2 else 1.0
        if k % 2 == 0:
            ue += s * _U[k] * p; ve += s * _V[k] * p
        else:
            uo += s * _U[k] * p; vo += s * _V[k] * p
        p = p * iz
    ph = zeta - math.pi / 4
    c, s = np.cos(ph), np.sin(ph)
    ai = (c * ue + s * uo) / (_SQRT_PI * q)
    aip = q * (s * ve - c * vo) / _SQRT_PI
    bi = (-s * ue + c * uo) / (_SQRT_PI * q)
    bip = q * (c * ve + s * vo) / _SQRT_PI
    return ai, aip, bi, bip


_H_TAB = 0.25
_X_TAB = np.arange(-32, 33) * _H_TAB  # -8 .. 8
_TAB_LIMIT = 8.0


def _build_table():
    n = _X_TAB.size
    ai = np.empty(n); aip = np.empty(n); bi = np.empty(n); bip = np.empty(n)
    inner = np.abs(_X_TAB) <= 2.0
    ai[inner], aip[inner], bi[inner], bip[inner] = _maclaurin(_X_TAB[inner])
    i_m2 = int(np.argmin(np.abs(_X_TAB + 2.0)))
    i_p2 = int(np.argmin(np.abs(_X_TAB - 2.0)))
    # negative side: both solutions are oscillatory, step outward
    for i in range(i_m2, 0, -1):
        x0 = _X_TAB[i]
        ai[i - 1], aip[i - 1] = _taylor(x0, ai[i], aip[i], -_H_TAB, 40)
        bi[i - 1], bip[i - 1] = _taylor(x0, bi[i], bip[i], -_H_TAB, 40)
    # positive side: Bi forward (dominant), Ai backward from its asymptote
    for i in range(i_p2, n - 1):
        bi[i + 1], bip[i + 1] = _taylor(_X_TAB[i], bi[i], bip[i], _H_TAB, 40)
    a_s, ap_s, _, _ = _asym_pos_scaled(_TAB_LIMIT)
    z8 = 2.0 / 3.0 * _TAB_LIMIT ** 1.5
    ai[-1], aip[-1] = a_s * math.exp(-z8), ap_s * math.exp(-z8)
    for i in range(n - 1, i_p2 + 1, -1):
        ai[i - 1], aip[i - 1] = _taylor(_X_TAB[i], ai[i], aip[i], -_H_TAB, 40)
    return ai, aip, bi, bip


_TAB = _build_table()


def _check_range(x):
    if not np.all(np.isfinite(x)):
        raise AiryRangeError("Airy argument must be finite")
    if np.any(x < AIRY_X_MIN) or np.any(x > AIRY_X_MAX):
        raise AiryRangeError(
            f"Airy argument outside [{AIRY_X_MIN}, {AIRY_X_MAX}]; "
            f"Bi overflows a double above x = {AIRY_X_MAX}")


def airy_scaled(x):
    """Exponentially scaled Airy values.

    Returns ``(ai_s, aip_s, bi_s, bip_s, zeta)`` with ``Ai = ai_s e^{-zeta}``,
    ``Bi = bi_s e^{zeta}`` (same for the derivatives), where
    ``zeta = 2/3 x^{3/2}`` for ``x > 0`` and ``zeta = 0`` otherwise.
    The scaled values are finite for any finite ``x >= AIRY_X_MIN``.
    """
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)) or np.any(x < AIRY_X_MIN):
        raise AiryRangeError(f"Airy argument must be finite and >= {AIRY_X_MIN}")
    shape = x.shape
    x = x.ravel()
    ai = np.empty_like(x); aip = np.empty_like(x)
    bi = np.empty_like(x); bip = np.empty_like(x)
    zeta = np.where(x > 0, 2.0 / 3.0 * np.abs(x) ** 1.5, 0.0)

    mid = np.abs(x) <= _TAB_LIMIT
    if np.any(mid):
        xm = x[mid]
        idx = np.rint((xm - _X_TAB[0]) / _H_TAB).astype(int)
        x0 = _X_TAB[idx]
        h = xm - x0
        a, ap = _taylor(x0, _TAB[0][idx], _TAB[1][idx], h, 30)
        b, bp = _taylor(x0, _TAB[2][idx], _TAB[3][idx], h, 30)
        ez = np.exp(zeta[mid])
        ai[mid], aip[mid] = a * ez, ap * ez
        bi[mid], bip[mid] = b / ez, bp / ez
    hi = x > _TAB_LIMIT
    if np.any(hi):
        ai[hi], aip[hi], bi[hi], bip[hi] = _asym_pos_scaled(x[hi])
    lo = x < -_TAB_LIMIT
    if np.any(lo):
        ai[lo], aip[lo], bi[lo], bip[lo] = _asym_neg(-x[lo])
    return tuple(v.reshape(shape) for v in (ai, aip, bi, bip, zeta))


def airy(x):
    """Ai, Ai', Bi, Bi' and Ai^2 + Bi^2 for real ``x`` in [AIRY_X_MIN, AIRY_X_MAX].

    ``modulus_sq`` is ``inf`` above MODULUS_X_MAX, where only its logarithm
    (see :func:`log_airy_modulus_sq`) is representable.
    """
    x = np.asarray(x, dtype=float)
    _check_range(x)
    ai_s, aip_s, bi_s, bip_s, zeta = airy_scaled(x)
    e = np.exp(-zeta)
    ai, aip = ai_s * e, aip_s * e
    bi, bip = bi_s / e, bip_s / e
    with np.errstate(over="ignore"):
        mod = np.exp(_log_mod_from_scaled(ai_s, bi_s, zeta))
    return AiryValues(x=x, ai=ai, ai_prime=aip, bi=bi, bi_prime=bip, modulus_sq=mod)


def _log_mod_from_scaled(ai_s, bi_s, zeta):
    e4 = np.exp(-4.0 * zeta)
    return 2.0 * zeta + np.log(bi_s * bi_s + ai_s * ai_s * e4)


def _neg_modulus_parts(t):
    """Phase-free combinations at x = -t for large t.

    Returns ``(m, c, d)`` with ``A = m / (pi sqrt t)``,
    ``Ai Ai' + Bi Bi' = c / pi`` and ``Ai'^2 + Bi'^2 - t A = sqrt(t) d / pi``.
    The oscillating factors cancel exactly, so any magnitude of ``t`` is allowed,
    and ``d`` is summed from differences of the series so that the near
    cancellation in A''(x) = 2(Ai'^2 + Bi'^2 + x A) costs no accuracy.
    """
    t = np.asarray(t, dtype=float)
    iz = 1.0 / (2.0 / 3.0 * t ** 1.5)
    ue = np.zeros_like(t); uo = np.zeros_like(t)
    ve = np.zeros_like(t); vo = np.zeros_like(t)
    de = np.zeros_like(t); do = np.zeros_like(t)
    p = np.ones_like(t)
    for k in range(_NASY):
        s = -1.0 if (k // 2) % 2 else 1.0
        if k % 2 == 0:
            ue += s * _U[k] * p; ve += s * _V[k] * p; de += s * (_V[k] - _U[k]) * p
        else:
            uo += s * _U[k] * p; vo += s * _V[k] * p; do += s * (_V[k] - _U[k]) * p
        p = p * iz
    m = ue * ue + uo * uo
    return m, uo * ve - ue * vo, de * (ve + ue) + do * (vo + uo)


def airy_modulus_ratios(x):
    """Return ``(ln A, A'/A, A''/A)`` with A = Ai^2 + Bi^2, for any finite x.

    Uses A' = 2(Ai Ai' + Bi Bi') and A'' = 2(Ai'^2 + Bi'^2 + x A), which
    follow from the Airy equation.  Positive x works on exponentially scaled
    values; x < -8 uses phase-free asymptotic combinations, so there is no
    lower bound on x.
    """
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise AiryRangeError("argument must be finite")
    shape = x.shape
    x = x.ravel()
    lna = np.empty_like(x); r1 = np.empty_like(x); r2 = np.empty_like(x)
    far = x < -_TAB_LIMIT
    if np.any(far):
        t = -x[far]
        m, c, d = _neg_modulus_parts(t)
        lna[far] = np.log(m / (math.pi * np.sqrt(t)))
        r1[far] = 2.0 * c * np.sqrt(t) / m
        r2[far] = 2.0 * t * d / m
    near = ~far
    if np.any(near):
        ai_s, aip_s, bi_s, bip_s, zeta = airy_scaled(x[near])
        e4 = np.exp(-4.0 * zeta)
        den = bi_s * bi_s + ai_s * ai_s * e4
        lna[near] = 2.0 * zeta + np.log(den)
        r1[near] = 2.0 * (bi_s * bip_s + ai_s * aip_s * e4) / den
        r2[near] = 2.0 * (bip_s * bip_s + aip_s * aip_s * e4) / den + 2.0 * x[near]
    return lna.reshape(shape), r1.reshape(shape), r2.reshape(shape)


def log_airy_modulus_derivatives(x):
    """Return ``(ln A, (ln A)', (ln A)'')`` with A = Ai^2 + Bi^2, for any finite x."""
    lna, r1, r2 = airy_modulus_ratios(x)
    return lna, r1, r2 - r1 * r1


def log_airy_modulus_sq(x):
    """ln(Ai^2(x) + Bi^2(x)) for any finite x (no overflow, no lower bound)."""
    return log_airy_modulus_derivatives(x)[0]


def airy_modulus_sq(x):
    """A(x) = Ai^2(x) + Bi^2(x) for ``x <= MODULUS_X_MAX``."""
    x = np.asarray(x, dtype=float)
    if np.any(x > MODULUS_X_MAX):
        raise AiryRangeError(
            f"Ai^2+Bi^2 overflows above x = {MODULUS_X_MAX}; use log_airy_modulus_sq")
    return np.exp(log_airy_modulus_sq(x))


# ---------------------------------------------------------------------------
# Hermite polynomials

HERMITE_MAX_DEGREE = 64


def _check_degree(n):
    if n < 0 or int(n) != n:
        raise PreconditionError("Hermite degree must be a non-negative integer")
    if n > HERMITE_MAX_DEGREE:
        raise CapabilityError(f"Hermite degree {n} exceeds the supported bound {HERMITE_MAX_DEGREE}")


def hermite(n, x):
    """Physicists' Hermite polynomial H_n(x) by the three-term recurrence."""
    _check_degree(n)
    x = np.asarray(x, dtype=float)
    h_prev = np.ones_like(x)
    if n == 0:
        return h_prev
    h = 2.0 * x
    for k in range(1, n):
        h_prev, h = h, 2.0 * x * h - 2.0 * k * h_prev
    return h


def hermite_normalized(n, x):
    """H_n(x) / sqrt(2^n n!) by the rescaled recurrence (no overflow for large n)."""
    _check_degree(n)
    x = np.asarray(x, dtype=float)
    h_prev = np.ones_like(x)
    if n == 0:
        return h_prev
    h = math.sqrt(2.0) * x
    for k in range(1, n):
        h_prev, h = h, math.sqrt(2.0 / (k + 1)) * x * h - math.sqrt(k / (k + 1)) * h_prev
    return h


# ---------------------------------------------------------------------------
# quadrature

@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and substitution settings for :func:`integrate`."""

    relative_tolerance: float = 1e-10
    absolute_floor: float = 1e-300
    max_refinements: int = 2000
    semi_infinite_mapping: str = "exponential-substitution"

    def __post_init__(self):
        if not self.relative_tolerance > 0:
            raise PreconditionError("relative_tolerance must be positive")
        if self.max_refinements < 1:
            raise PreconditionError("max_refinements must be at least 1")
        if self.semi_infinite_mapping not in ("exponential-substitution", "algebraic-substitution"):
            raise PreconditionError(f"unknown mapping {self.semi_infinite_mapping!r}")


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float


def integrate(f, a, b, spec=QuadratureSpec(), *, sqrt_singular_start=False, scale=1.0):
    """Adaptive Gauss-Kronrod integral of ``f`` over ``[a, b]``; ``b`` may be ``inf``.

    ``f`` maps a float to a float or to a 1-d array (a family of integrands
    sharing one subdivision).  ``sqrt_singular_start`` applies ``z = a + w^2``,
    which removes an integrable ``(z-a)^{-1/2}`` endpoint singularity.  A
    semi-infinite range is folded onto ``[0, 1]`` by the mapping in ``spec``
    with length scale ``scale``.

    Raises ConvergenceError, carrying the best estimate, if the error estimate
    does not meet ``spec.relative_tolerance`` within ``spec.max_refinements``
    subintervals.
    """
    if not (np.isfinite(a) and b > a):
        raise PreconditionError("integration domain must be [a, b] with finite a < b")
    if scale <= 0:
        raise PreconditionError("scale must be positive")

    g = f
    lo, hi = 0.0, b - a
    if sqrt_singular_start:
        def g(w, _f=f):
            return _f(a + w * w) * (2.0 * w)
        hi = math.sqrt(hi) if np.isfinite(hi) else np.inf
        base = 0.0
    else:
        def g(w, _f=f):
            return _f(a + w)
        base = 0.0

    if np.isinf(hi):
        inner = g
        if spec.semi_infinite_mapping == "exponential-substitution":
            def h(u):
                if u >= 1.0:
                    return 0.0 * inner(scale)
                return inner(-scale * math.log1p(-u)) * (scale / (1.0 - u))
        else:
            def h(u):
                if u >= 1.0:
                    return 0.0 * inner(scale)
                return inner(scale * u / (1.0 - u)) * (scale / (1.0 - u) ** 2)
        lo, hi, g = 0.0, 1.0, h

    try:
        val, err, info = _sp_integrate.quad_vec(
            g, lo + base, hi, epsabs=spec.absolute_floor, epsrel=spec.relative_tolerance,
            norm="max", limit=spec.max_refinements, full_output=True)
    except OverflowError as exc:
        # quad_vec's error heuristic overflows on badly scaled integrands
        raise ConvergenceError(f"quadrature error estimate overflowed ({exc})",
                               estimate=None, residual=math.inf) from None
    if info.status != 0 or not np.all(np.isfinite(val)):
        raise ConvergenceError(
            f"quadrature did not converge (status {info.status}, error {err:.3g})",
            estimate=val, residual=err)
    return QuadResult(value=val, error=err)


_A_P_ALLOWED = (-1.5, -0.5, 0.5, 1.5)


def log_a_p_integral(p, q, beta, cutoff=None, spec=QuadratureSpec()):
    """Natural log of A_p(q beta) = int_0^inf z^p exp(-z^3/12 + q beta z) dz.

    ``q`` is +1 or -1 and ``beta >= 0``.  ``p = -3/2`` diverges at 0 and needs
    an explicit positive ``cutoff`` (the lower limit); it is never regularised
    silently.  The integrand is shifted by its maximum so large ``beta`` does
    not overflow.
    """
    if p not in _A_P_ALLOWED:
        raise PreconditionError(f"p must be one of {_A_P_ALLOWED}")
    if q not in (1, -1):
        raise PreconditionError("q must be +1 or -1")
    if not beta >= 0:
        raise PreconditionError("beta must be non-negative")
    if p == -1.5 and (cutoff is None or not cutoff > 0):
        raise PreconditionError(
            "A_{-3/2} diverges like z^{-1/2} at z -> 0; supply a positive cutoff")
    lower = 0.0 if cutoff is None else float(cutoff)
    sb = q * beta
    # exponent m(z) = sb z - z^3/12 is maximal at z* = 2 sqrt(sb) when sb > 0
    zstar = max(lower, 2.0 * math.sqrt(sb)) if sb > 0 else lower
    shift = sb * zstar - zstar ** 3 / 12.0

    def f(z):
        return z ** p * math.exp(sb * z - z ** 3 / 12.0 - shift) if z > 0 else 0.0

    # the peak width in z is ~ (z*/2)^{-1/2} for large beta; split at z*
    width = 1.0 / math.sqrt(max(1.0, 0.5 * zstar))
    if lower == 0.0:
        if zstar > 0:
            first = integrate(f, 0.0, zstar, spec, sqrt_singular_start=True)
            second = integrate(f, zstar, np.inf, spec, scale=width)
            total = first.value + second.value
        else:
            total = integrate(f, 0.0, np.inf, spec, sqrt_singular_start=True,
                              scale=1.0 / math.sqrt(1.0 + beta) if q < 0 else 1.0).value
    else:
        if zstar > lower:
            total = (integrate(f, lower, zstar, spec).value
                     + integrate(f, zstar, np.inf, spec, scale=width).value)
        else:
            total = integrate(f, lower, np.inf, spec,
                              scale=1.0 / (1.0 + beta) if q < 0 else 1.0).value
    return math.log(total) + shift


def a_p_integral(p, q, beta, cutoff=None, spec=QuadratureSpec()):
    """A_p(q beta) = int_0^inf z^p exp(-z^3/12 + q beta z) dz (see :func:`log_a_p_integral`)."""
    return math.exp(log_a_p_integral(p, q, beta, cutoff, spec))
