"""Recompute the frozen reference values in tests/oracle_values.json.

Independent of the package: every value is a series written out from its
definition for the reference fixture (lambda_k = k^2, z1 = -1, weights
w_k = k^2 + 1, |phi_k|^2 = w_k^{m+1} / k) and summed in 40-digit arithmetic
with mpmath, both truncated at N and in full (mpmath.nsum).
"""

import json
from pathlib import Path

import mpmath as mp

mp.mp.dps = 40
Z1 = -1


def w(k):
    return k * k + 1


def gram_term(a, b, m):
    # <h_a, h_b>_{-m} = sum |phi_k|^2 w^{-a-b-m} = sum w^{1-a-b} / k
    return lambda k: mp.mpf(w(k)) ** (1 - a - b) / k


def gram_d2_term(s, t, a, b):
    # functionals carry exp(2 pi i sigma k / 3); m = 2
    return lambda k: mp.exp(2j * mp.pi * (t - s) * k / 3) * mp.mpf(w(k)) ** (1 - a - b) / k


def q_term(z, m):
    # (z - z1) <phi, (L - z)^{-1} h_{m+1}> = (z - z1) sum |phi|^2 w^{-m-1} / (k^2 - z)
    return lambda k: 1 / (k * (k * k - z))


def truncated(term, N):
    return mp.fsum(term(k) for k in range(1, N + 1))


def full(term):
    return mp.nsum(term, [1, mp.inf])


def cplx(v):
    v = mp.mpc(v)
    return [float(v.real), float(v.imag)]


def main():
    out = {"fixture": {"eigenvalues": "k^2", "z1": Z1}}
    m = 2
    G = {}
    for N in (1000, 2000):
        G[N] = [[float(truncated(gram_term(a, b, m), N)) for b in (1, 2)] for a in (1, 2)]
    out["gram_m2_N2000"] = G[2000]
    out["gram_m2_N1000"] = G[1000]
    out["gram_m2_full"] = [[float(full(gram_term(a, b, m))) for b in (1, 2)] for a in (1, 2)]
    out["gram_m1_N2000"] = float(truncated(gram_term(1, 1, 1), 2000))

    d2 = [[None] * 4 for _ in range(4)]
    for s in (1, 2):
        for a in (1, 2):
            for t in (1, 2):
                for b in (1, 2):
                    d2[(s - 1) * 2 + a - 1][(t - 1) * 2 + b - 1] = cplx(truncated(gram_d2_term(s, t, a, b), 2000))
    out["gram_m2_d2_N2000"] = d2

    for label, z in (("i", mp.mpc(0, 1)), ("2+i", mp.mpc(2, 1))):
        fac = z - Z1
        out[f"q_m2_N2000_{label}"] = cplx(fac * truncated(q_term(z, m), 2000))
        out[f"q_m2_N1000_{label}"] = cplx(fac * truncated(q_term(z, m), 1000))
        out[f"q_m2_full_{label}"] = cplx(fac * full(q_term(z, m)))
        # scalar B-model: rhat(z) = b / (z1 + a/b - z), a = G12, b = G22
        a = truncated(gram_term(1, 2, m), 2000)
        b = truncated(gram_term(2, 2, m), 2000)
        rhat = b / (Z1 + a / b - z)
        out[f"rhat_m2_N2000_{label}"] = cplx(rhat)
        out[f"MB_m2_N2000_{label}"] = cplx(fac * truncated(q_term(z, m), 2000) + rhat)
        # A-model with G = [[0, 1], [1, 1]]: r(z) = -1/(z - z1)^2 - 1/(z - z1)
        r = -1 / fac**2 - 1 / fac
        out[f"MA_anti_m2_N2000_{label}"] = cplx(fac * truncated(q_term(z, m), 2000) + r)
    a = truncated(gram_term(1, 2, m), 2000)
    b = truncated(gram_term(2, 2, m), 2000)
    out["deltahat_m2_N2000"] = float(Z1 + a / b)

    path = Path(__file__).resolve().parents[1] / "tests" / "oracle_values.json"
    path.write_text(json.dumps(out, indent=2, sort_keys=True) + "\n")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
