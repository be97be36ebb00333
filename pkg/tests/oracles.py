"""Independent reference implementations used by the tests.

Nothing here imports the linear algebra of the package under test.
"""
from __future__ import annotations

import math
from itertools import combinations

from sympy import ZZ, Matrix
from sympy.matrices.normalforms import invariant_factors, smith_normal_decomp


def bareiss_det(rows: list[list[int]]) -> int:
    n = len(rows)
    if n == 0:
        return 1
    A = [list(r) for r in rows]
    sign, prev = 1, 1
    for k in range(n - 1):
        if A[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if A[i][k]), None)
            if swap is None:
                return 0
            A[k], A[swap] = A[swap], A[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


def determinantal_factors(rows: list[list[int]], ncols: int) -> list[int]:
    """Nonzero invariant factors as ratios of gcds of k x k minors."""
    m = len(rows)
    divisors = [1]
    for k in range(1, min(m, ncols) + 1):
        g = 0
        for ri in combinations(range(m), k):
            for ci in combinations(range(ncols), k):
                g = math.gcd(g, bareiss_det([[rows[i][j] for j in ci] for i in ri]))
                if g == 1:
                    break
            if g == 1:
                break
        if g == 0:
            break
        divisors.append(g)
    return [divisors[k] // divisors[k - 1] for k in range(1, len(divisors))]


def strip_primes(d: int, primes) -> int:
    for p in primes:
        while d % p == 0:
            d //= p
    return d


def dense_cohomology(d_in: list[list[int]], d_out: list[list[int]], dim: int) -> tuple[int, list[int]]:
    """(free rank, torsion) of ker(d_out)/im(d_in) on Z^dim, via sympy's Smith form.

    A saturated kernel basis comes from the column transform of d_out; the
    image of d_in is rewritten in that basis and its invariant factors taken
    from sympy.
    """
    if d_out and d_out[0]:
        A = Matrix(d_out)
        S, U, V = smith_normal_decomp(A, domain=ZZ)
        r = sum(1 for i in range(min(S.shape)) if S[i, i] != 0)
        Vinv = V.inv()
        kernel_dim = dim - r
    else:
        r, Vinv, kernel_dim = 0, Matrix.eye(dim), dim
    if not d_in or not d_in[0]:
        return kernel_dim, []
    coords = Vinv * Matrix(d_in)
    assert all(coords[i, j] == 0 for i in range(r) for j in range(coords.shape[1]))
    sub = coords[r:, :]
    factors = [int(d) for d in invariant_factors(sub, domain=ZZ) if d != 0] if sub.shape[0] else []
    return kernel_dim - len(factors), [d for d in factors if abs(d) != 1]


def sigma1_by_divisors(n: int) -> int:
    return sum(d for d in range(1, n + 1) if n % d == 0)


def count_weighted_monomials(weights: list[int], n: int) -> int:
    """Coefficient of x^n in prod 1/(1 - x^w), by direct series multiplication."""
    series = [1] + [0] * n
    for w in weights:
        for k in range(w, n + 1):
            series[k] += series[k - w]
    return series[n]
