"""Generate Taylor coefficients (in eta) of the uniform large-shape expansion
coefficients c_k(eta) for the regularized incomplete gamma function.

    Q(a, x) = erfc(eta*sqrt(a/2))/2 + exp(-a*eta^2/2)/sqrt(2*pi*a) * sum_k c_k(eta) a^-k

with lambda = x/a, eta^2/2 = lambda - 1 - ln(lambda), sign(eta) = sign(lambda - 1),
c_0 = 1/(lambda-1) - 1/eta and
c_k = (1/eta) d c_{k-1}/d eta + (-1)^k g_k/(lambda - 1),
where g_k are the Stirling-series coefficients of Gamma*(a).

Exact rational arithmetic; writes a Rust source file with f64 tables.
"""
from fractions import Fraction as Fr
import sys

N = 64          # working order of mu(eta)
K = 12          # number of c_k
KEEP = 26       # Taylor terms kept per c_k


def mul(a, b, n):
    out = [Fr(0)] * n
    for i, ai in enumerate(a[:n]):
        if ai == 0:
            continue
        for j, bj in enumerate(b[: n - i]):
            out[i + j] += ai * bj
    return out


def recip(a, n):
    # 1/a for a[0] != 0
    out = [Fr(0)] * n
    out[0] = 1 / a[0]
    for i in range(1, n):
        s = sum(a[j] * out[i - j] for j in range(1, min(i, len(a) - 1) + 1))
        out[i] = -s / a[0]
    return out


def sqrt_series(a, n):
    # sqrt(a) with a[0] == 1
    out = [Fr(0)] * n
    out[0] = Fr(1)
    for i in range(1, n):
        s = sum(out[j] * out[i - j] for j in range(1, i))
        out[i] = (a[i] - s) / 2
    return out


def compose(f, g, n):
    # f(g(x)) where g[0] == 0
    out = [Fr(0)] * n
    power = [Fr(1)] + [Fr(0)] * (n - 1)
    for i in range(n):
        if i > 0:
            power = mul(power, g, n)
        if f[i] != 0:
            for j in range(n):
                out[j] += f[i] * power[j]
    return out


def revert(f, n):
    # inverse series of f with f[0]=0, f[1]=1 by fixed-point iteration
    g = [Fr(0), Fr(1)] + [Fr(0)] * (n - 2)
    for _ in range(n):
        fg = compose(f, g, n)
        g = [g[i] - (fg[i] - (1 if i == 1 else 0)) for i in range(n)]
    return g


def bernoulli(m):
    # Akiyama-Tanigawa; only even indices are used below
    a = [Fr(0)] * (m + 1)
    out = []
    for i in range(m + 1):
        a[i] = Fr(1, i + 1)
        for j in range(i, 0, -1):
            a[j - 1] = j * (a[j - 1] - a[j])
        out.append(a[0])
    return out


def stirling_g(kmax):
    # ln Gamma*(a) = sum_{j>=1} B_{2j} / (2j (2j-1) a^{2j-1}); g_k from exp of it in powers of 1/a
    B = bernoulli(2 * kmax + 2)
    n = kmax + 1
    lg = [Fr(0)] * n
    for j in range(1, n):
        p = 2 * j - 1
        if p < n:
            lg[p] = B[2 * j] / (2 * j * (2 * j - 1))
    # exp of series with zero constant term
    out = [Fr(1)] + [Fr(0)] * (n - 1)
    term = [Fr(1)] + [Fr(0)] * (n - 1)
    fact = 1
    for i in range(1, n):
        term = mul(term, lg, n)
        fact *= i
        out = [out[j] + term[j] / fact for j in range(n)]
    return out


def main():
    g = stirling_g(K + 1)
    assert g[1] == Fr(1, 12) and g[2] == Fr(1, 288) and g[3] == Fr(-139, 51840), g[:4]
    # eta = mu * sqrt(2 * sum_{j>=0} (-1)^j mu^j/(j+2))
    inner = [Fr(2 * (-1) ** j, j + 2) for j in range(N)]
    eta_of_mu = [Fr(0)] + sqrt_series(inner, N - 1)
    mu_of_eta = revert(eta_of_mu, N)
    assert mu_of_eta[:5] == [0, 1, Fr(1, 3), Fr(1, 36), Fr(-1, 270)], mu_of_eta[:5]
    # 1/mu as Laurent series: (1/eta) * recip(mu/eta)
    mu_over_eta = mu_of_eta[1:]
    inv = recip(mu_over_eta, N - 1)  # coefficient i multiplies eta^{i-1}
    # represent Laurent series as dict power->coef
    inv_mu = {i - 1: c for i, c in enumerate(inv)}
    top = N - 3

    def add(a, b):
        out = dict(a)
        for p, c in b.items():
            out[p] = out.get(p, 0) + c
        return out

    c = add(inv_mu, {-1: Fr(-1)})
    cs = []
    for k in range(K):
        if k > 0:
            deriv = {p - 2: p * cf for p, cf in c.items() if p != 0}
            c = add(deriv, {p: (-1) ** k * g[k] * cf for p, cf in inv_mu.items()})
            top -= 2
        c = {p: cf for p, cf in c.items() if p <= top}
        for p, cf in c.items():
            assert p >= 0 or cf == 0, (k, p, cf)
        cs.append([c.get(p, Fr(0)) for p in range(min(KEEP, top + 1))])
    assert cs[0][:3] == [Fr(-1, 3), Fr(1, 12), Fr(-2, 135)], cs[0][:3]
    assert cs[1][:2] == [Fr(-1, 540), Fr(-1, 288)], cs[1][:2]

    out = sys.stdout
    out.write("// Generated by tools/temme_coefficients.py; do not edit by hand.\n\n")
    out.write("/// Taylor coefficients in `eta` of the uniform-expansion terms `c_k(eta)`.\n")
    out.write("pub(crate) const TEMME_C: [[f64; %d]; %d] = [\n" % (KEEP, K))
    for row in cs:
        row = row + [Fr(0)] * (KEEP - len(row))
        out.write("    [\n")
        for v in row:
            out.write("        %r,\n" % (float(v),))
        out.write("    ],\n")
    out.write("];\n")


if __name__ == "__main__":
    main()
