"""Counting balanced binary strings and the expected covering word length."""

from fractions import Fraction
from itertools import combinations
from math import comb, log

from .errors import PreconditionError


def balanced_count(r):
    """Number of length-2r binary strings with r zeros and r ones."""
    if r < 0:
        raise PreconditionError("r must be non-negative")
    return comb(2 * r, r)


# ---------------------------------------------------------------- truncated series


def _series_inverse(a, N):
    """Inverse of a univariate series with a[0] = 1, truncated at degree N (exact)."""
    if a[0] != 1:
        raise ValueError("leading coefficient must be 1")
    inv = [Fraction(0)] * (N + 1)
    inv[0] = Fraction(1)
    for n in range(1, N + 1):
        inv[n] = -sum(a[k] * inv[n - k] for k in range(1, min(n, len(a) - 1) + 1))
    return inv


def _bivariate_inverse(A, N):
    """Inverse of A(u, v) = sum A[i][j] u^i v^j with A[0][0] = 1, both degrees <= N."""
    B = [[Fraction(0)] * (N + 1) for _ in range(N + 1)]
    for i in range(N + 1):
        for j in range(N + 1):
            if i == 0 and j == 0:
                B[0][0] = Fraction(1)
                continue
            s = Fraction(0)
            for p in range(i + 1):
                for q in range(j + 1):
                    if (p or q) and A[p][q]:
                        s += A[p][q] * B[i - p][j - q]
            B[i][j] = -s
    return B


def gj_series(eta, N):
    """Coefficients [a][b] of G for strings with a zeros and b ones, a, b <= N.

    G(t, u, v) = [(tu - 1)/((tu)^eta - 1) - tv]^{-1}. Every monomial has the
    t-degree a + b, so t is set to 1; (u - 1)/(u^eta - 1) = 1/S(u) with
    S(u) = 1 + u + ... + u^{eta-1}. The series is built and inverted with
    exact rationals; a non-integral coefficient raises ArithmeticError.
    """
    if eta < 1:
        raise PreconditionError("eta must be at least 1")
    S = [Fraction(1) if j < eta else Fraction(0) for j in range(N + 1)]
    invS = _series_inverse(S, N)
    A = [[Fraction(0)] * (N + 1) for _ in range(N + 1)]
    for i in range(N + 1):
        A[i][0] = invS[i]
    A[0][1] -= 1
    G = _bivariate_inverse(A, N)
    out = []
    for row in G:
        for c in row:
            if c.denominator != 1:
                raise ArithmeticError(f"non-integral series coefficient {c}")
        out.append([int(c) for c in row])
    return out


def constrained_count(r, eta):
    """Balanced strings of length 2r with no run of eta or more consecutive zeros."""
    if r < 0:
        raise PreconditionError("r must be non-negative")
    return gj_series(eta, max(r, 1))[r][r]


def brute_force_count(r, eta):
    """Direct enumeration of the strings counted by constrained_count."""
    n = 2 * r
    total = 0
    for ones in combinations(range(n), r):
        bits = [0] * n
        for i in ones:
            bits[i] = 1
        run = best = 0
        for b in bits:
            run = run + 1 if b == 0 else 0
            best = max(best, run)
        total += best < eta
    return total


def count_table(r_max=10, eta_max=6):
    """Rows (r, eta, series count, brute-force count)."""
    rows = []
    for eta in range(1, eta_max + 1):
        G = gj_series(eta, r_max)
        for r in range(r_max + 1):
            rows.append((r, eta, G[r][r], brute_force_count(r, eta)))
    return rows


# ---------------------------------------------------------------- word length


def expected_word_length(xi, eps, alphabet, c0=1.0, c1=1.0, poly=lambda e: e ** 2):
    """(n, leading) from c0 xi eps |A|^n > exp(c1 xi / eps) / poly(eps).

    n = [c1 xi / eps - log poly(eps) - log(c0 xi eps)] / log |A|, and the
    (xi / eps) leading term is (c1 xi / eps) / log |A|.
    """
    if xi <= 0 or not 0 < eps < 1 or alphabet < 2:
        raise PreconditionError("need xi > 0, 0 < eps < 1 and alphabet >= 2")
    la = log(alphabet)
    lead = c1 * xi / eps
    n = (lead - log(poly(eps)) - log(c0 * xi * eps)) / la
    return n, lead / la
