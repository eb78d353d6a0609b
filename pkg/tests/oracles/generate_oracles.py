"""Regenerate the frozen reference values in ``oracles.json`` with mpmath.

Nothing here imports the package under test.  Run once; the JSON is the
frozen oracle and tests never call mpmath themselves.

    python3 tests/oracles/generate_oracles.py
"""

import json
import os

import mpmath as mp

mp.mp.dps = 40
OUT = os.path.join(os.path.dirname(__file__), "oracles.json")


def f(v):
    return float(v)


def airy_points():
    xs = [-100, -50, -20, -10.5, -8.1, -5, -2, -1, 0, 0.7, 1.9, 2.1, 5, 8.3, 10, 20, 50, 100]
    rows = []
    for x in xs:
        x = mp.mpf(x)
        rows.append([f(x), f(mp.airyai(x)), f(mp.airyai(x, 1)), f(mp.airybi(x)),
                     f(mp.airybi(x, 1))])
    return rows


def modulus_points():
    xs = [-1000, -200, -100, -30, -9, -8, -7.9, -3, -1, 0, 1, 3, 7.9, 8.1, 20, 60, 80, 200]
    rows = []
    for x in xs:
        x = mp.mpf(x)
        ai, aip, bi, bip = mp.airyai(x), mp.airyai(x, 1), mp.airybi(x), mp.airybi(x, 1)
        a = ai ** 2 + bi ** 2
        a1 = 2 * (ai * aip + bi * bip)
        a2 = 2 * (aip ** 2 + bip ** 2 + x * a)
        rows.append([f(x), f(mp.log(a)), f(a1 / a), f(a2 / a - (a1 / a) ** 2)])
    return rows


def modulus(x):
    return mp.airyai(x) ** 2 + mp.airybi(x) ** 2


def density(c, th):
    c, th = mp.mpf(c), mp.mpf(th)
    j = 1 / (mp.pi ** 2 * modulus(-c))
    g = lambda y: mp.exp(-(c + th ** 2) * y + th * y ** 2 - y ** 3 / 3)
    return j * mp.quad(g, [0, 1, 4, 10, mp.inf])


def density_points():
    rows = []
    for c in (0.5, 2.0, -1.0, 16.0):
        for th in (-8.0, -2.0, 0.0, 1.5, 8.0):
            rows.append([c, th, f(density(c, th))])
    return rows


def a_p(p, sb, lower=0):
    g = lambda z: z ** p * mp.exp(-z ** 3 / 12 + sb * z)
    return mp.quad(g, [lower, 1, 4, 10, 20, mp.inf])


def a_p_points():
    rows = []
    for p in (-0.5, 0.5, 1.5):
        for q in (1, -1):
            for beta in (0, 1, 5, 25):
                rows.append([p, q, beta, None, f(mp.log(a_p(p, q * beta)))])
    rows.append([-1.5, -1, 1, 0.01, f(mp.log(a_p(-1.5, -1, mp.mpf("0.01"))))])
    rows.append([-1.5, 1, 2, 0.1, f(mp.log(a_p(-1.5, 2, mp.mpf("0.1"))))])
    return rows


def hermite_points():
    rows = []
    for n in (0, 1, 5, 12, 30):
        for x in (-3.0, 0.4, 2.5):
            v = mp.hermite(n, x) / mp.sqrt(2 ** n * mp.factorial(n))
            rows.append([n, x, f(v)])
    return rows


def psi(n, x, w, sig, sig_t, r, r_t):
    phi = sig_t / sig + 1j * r_t
    h = mp.hermite(n, mp.sqrt(w) * x / sig) / mp.sqrt(2 ** n * mp.factorial(n))
    return ((w / mp.pi) ** 0.25 / mp.sqrt(sig) * mp.exp(-1j * (n + 0.5) * r) * h
            * mp.exp(1j * phi * x ** 2 / 2))


def smatrix_points():
    mp.mp.dps = 20
    cases = [
        # omega_in, frame_in (sig, sig_t, r), omega_out, frame_out
        (1.0, (1.0, 0.0, 0.0), 2.5, (1.0, 0.0, 0.0)),
        (1.3, (1.4, 0.6, 0.8), 0.7, (0.8, -0.3, 2.1)),
    ]
    out = []
    for wi, (si, sti, ri), wo, (so, sto, ro) in cases:
        rti, rto = wi / si ** 2, wo / so ** 2
        ent = []
        for n in range(4):
            for m in range(4):
                g = lambda x: mp.conj(psi(m, x, wo, so, sto, ro, rto)) * psi(n, x, wi, si, sti, ri, rti)
                v = mp.quad(g, [-mp.inf, -3, 0, 3, mp.inf])
                ent.append([n, m, f(v.real), f(v.imag)])
        out.append({"in": [wi, si, sti, ri], "out": [wo, so, sto, ro], "entries": ent})
    mp.mp.dps = 40
    return out


def thermo_points():
    rows = []
    for lp in (0.5, 3.0, 30.0, 300.0):
        x = -mp.mpf(lp)
        ai, aip, bi, bip = mp.airyai(x), mp.airyai(x, 1), mp.airybi(x), mp.airybi(x, 1)
        a = ai ** 2 + bi ** 2
        a1 = 2 * (ai * aip + bi * bip)
        a2 = 2 * (aip ** 2 + bip ** 2 + x * a)
        e_osc = (1 - a2 / a / lp) / 2
        width = a1 / a / (2 * mp.sqrt(lp))
        rows.append([lp, f(e_osc), f(width)])
    return rows


def entropy_points():
    # S/k = -(2/3) b [(ln A)'(-b) + (ln A)'(b)] + ln(A(b)/A(-b))
    rows = []
    for b in (0.1, 0.5, 2.0, 5.0):
        b = mp.mpf(b)
        d = lambda y: mp.diff(lambda t: mp.log(modulus(t)), y)
        s = -mp.mpf(2) / 3 * b * (d(-b) + d(b)) + mp.log(modulus(b) / modulus(-b))
        rows.append([f(b), f(s)])
    return rows


def distribution_points():
    return [[eb, f(modulus(-eb) / modulus(eb))] for eb in (0.01, 1.0, 3.0)]


def cauchy_limit():
    # theta and theta_plus both Cauchy of scale sqrt(c): difference / sqrt(c) is Cauchy(2)
    mp.mp.dps = 20
    dens = lambda u: 2 / (mp.pi * (4 + u ** 2))
    a = lambda u: mp.sqrt(1 + u ** 2)
    i1 = mp.quad(lambda u: dens(u) * mp.sqrt((a(u) + 1) / (2 * a(u) ** 2)), [-mp.inf, 0, mp.inf])
    i2 = mp.quad(lambda u: dens(u) * mp.sqrt((a(u) - 1) / (2 * a(u) ** 2)), [-mp.inf, 0, mp.inf])
    mp.mp.dps = 40
    return [f(i1), f(i2)]


def simplified_points():
    mp.mp.dps = 15
    rows = []
    for lam, rho in ((1.0, 0.0), (0.3, 0.3)):
        s = mp.sqrt(rho)
        gam = ((1 + s) / (1 - s)) ** 2
        c = lam * gam
        w = lambda th: mp.sqrt((mp.sqrt(1 + th ** 2 / c) + 1) / (2 * (1 + th ** 2 / c)))
        ib = mp.quad(lambda th: density(c, th) * w(th), [-mp.inf, -3, 0, 3, mp.inf])
        rows.append([lam, rho, f(ib), f(mp.sqrt(1 - rho) * 2 * ib ** 2)])
    mp.mp.dps = 40
    return rows


def main():
    data = {
        "airy": airy_points(),
        "modulus": modulus_points(),
        "density": density_points(),
        "a_p": a_p_points(),
        "hermite": hermite_points(),
        "smatrix": smatrix_points(),
        "thermo": thermo_points(),
        "entropy": entropy_points(),
        "distribution": distribution_points(),
        "cauchy_limit": cauchy_limit(),
        "simplified": simplified_points(),
    }
    with open(OUT, "w") as fh:
        json.dump(data, fh, indent=1)
        fh.write("\n")


if __name__ == "__main__":
    main()
