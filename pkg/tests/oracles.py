"""
Independent reference implementations used by the tests.

None of these share code with the package: they are brute-force or
textbook-direct routes to the same quantities.
"""

import math

import numpy as np


def factorize(n: int) -> dict:
    n = abs(n)
    out = {}
    f = 2
    while f * f <= n:
        while n % f == 0:
            out[f] = out.get(f, 0) + 1
            n //= f
        f += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def legendre_brute(a: int, p: int) -> int:
    """(a|p) for an odd prime p by listing squares."""
    a %= p
    if a == 0:
        return 0
    return 1 if a in {(x * x) % p for x in range(1, p)} else -1


def kronecker_brute(a: int, n: int) -> int:
    """Kronecker symbol from its definition via the factorisation of n."""
    if n == 0:
        return 1 if abs(a) == 1 else 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -1
    for p, e in factorize(n).items():
        if p == 2:
            if a % 2 == 0:
                val = 0
            else:
                val = 1 if a % 8 in (1, 7) else -1
        else:
            val = legendre_brute(a, p)
        result *= val ** e
    return result


def squarefree_brute(m: int) -> bool:
    return m != 0 and all(e == 1 for e in factorize(m).values())


def fundamental_discriminants_brute(X: int) -> list:
    out = []
    for d in range(2, X + 1):
        if d % 4 == 1 and squarefree_brute(d):
            out.append(d)
        elif d % 4 == 0 and (d // 4) % 4 in (2, 3) and squarefree_brute(d // 4):
            out.append(d)
    return out


def fundamental_discriminant_count_sieve(X: int) -> int:
    """Count by a Moebius-free route: mark multiples of odd-prime squares and 4 separately."""
    is_sf = np.ones(X + 1, dtype=bool)
    is_sf[0] = False
    k = 2
    while k * k <= X:
        is_sf[k * k::k * k] = False
        k += 1
    d = np.arange(X + 1)
    odd = np.count_nonzero(is_sf & (d % 4 == 1)) - 1  # drop d = 1
    m = np.arange(X // 4 + 1)
    even = np.count_nonzero(is_sf[: m.size] & ((m % 4 == 2) | (m % 4 == 3)))
    return int(odd + even)


def von_mangoldt_logderiv_zeta(s: float, terms: int = 2_000_000) -> float:
    """zeta'/zeta(s) = -sum Lambda(n) n^-s, summed directly with a tail correction."""
    lam = np.zeros(terms + 1)
    sieve = np.ones(terms + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, int(terms ** 0.5) + 1):
        if sieve[p]:
            sieve[p * p::p] = False
    for p in np.flatnonzero(sieve):
        lp = math.log(p)
        q = p
        while q <= terms:
            lam[q] = lp
            q *= p
    n = np.arange(terms + 1, dtype=float)
    n[0] = 1.0
    val = -np.sum(lam[1:] * n[1:] ** (-s))
    # Lambda averages to 1, so the tail is about T^(1-s)/(s-1)
    tail = terms ** (1 - s) / (s - 1)
    return float(val - tail)


def kernel_cos_sum(kind: str, n: int, theta: np.ndarray) -> np.ndarray:
    """Scaled one-level densities written as finite cosine sums."""
    t = np.asarray(theta, dtype=float)
    if kind == "SO_even":
        k = np.arange(1, n)
        return 1 + np.cos(2 * np.pi * np.outer(t, k) / n).sum(axis=1) / n
    if kind == "USp":
        k = np.arange(1, n + 1)
        return 1 - np.cos(2 * np.pi * np.outer(t, k) / n).sum(axis=1) / n
    if kind == "SO_odd":
        L = 2 * n + 1
        u = 2 * np.pi * t / L
        k = np.arange(1, n + 1)
        # sin(2N u)/sin(u) = 2 sum_{k=1}^{N} cos((2k-1) u)
        ratio = 2 * np.cos(np.outer(u, 2 * k - 1)).sum(axis=1)
        return 1 - 1 / L - ratio / L
    if kind == "U":
        return np.ones_like(t)
    raise ValueError(kind)


def mgf_so_even_product(N: int, s: float) -> float:
    """Direct product of gamma ratios, no logs."""
    val = 2.0 ** (2 * N * s)
    for j in range(1, N + 1):
        val *= (math.gamma(N + j - 1) * math.gamma(s + j - 0.5)
                / (math.gamma(j - 0.5) * math.gamma(s + j + N - 1)))
    return val


def golden_section_min(f, a: float, b: float, tol: float = 1e-12) -> float:
    g = (math.sqrt(5) - 1) / 2
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    while abs(b - a) > tol * max(1.0, abs(a) + abs(b)):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    return (a + b) / 2


def pair_objective_quadrature(N: float, R: float, e1: float, e2: float, m: int = 4001) -> float:
    y = np.linspace(0.0, 1.0, m)
    s2 = np.sin(np.pi * y) ** 2
    g = (e1 - e2 * s2) / R ** 2 + s2 / (3 * N * N)
    w = np.full(m, 1.0)
    w[1:-1:2], w[2:-1:2] = 4.0, 2.0  # Simpson weights
    return float(np.sum(w * g * g) * (y[1] - y[0]) / 3)


def ks_brute(a, b) -> float:
    a = sorted(a)
    b = sorted(b)
    best = 0.0
    for x in set(a) | set(b):
        fa = sum(1 for v in a if v <= x) / len(a)
        fb = sum(1 for v in b if v <= x) / len(b)
        best = max(best, abs(fa - fb))
    return best
