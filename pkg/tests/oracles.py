"""Independent exact-arithmetic reference implementations used as test oracles.

Everything here is written against the textbook definitions with Fractions,
deliberately sharing no code with the package internals it checks.
"""

from __future__ import annotations

import math
from fractions import Fraction


def frac_gso(rows):
    """Exact Gram-Schmidt: returns (mu, norms2) as Fractions, mu lower-triangular."""
    d = len(rows)
    basis = [[Fraction(int(x)) for x in row] for row in rows]
    ortho = []
    norms2 = []
    mu = [[Fraction(0)] * d for _ in range(d)]
    for i in range(d):
        v = list(basis[i])
        for j in range(i):
            if norms2[j] == 0:
                continue
            mu[i][j] = sum(a * b for a, b in zip(basis[i], ortho[j])) / norms2[j]
            v = [a - mu[i][j] * b for a, b in zip(v, ortho[j])]
        ortho.append(v)
        norms2.append(sum(a * a for a in v))
    return mu, norms2


def is_size_reduced(rows) -> bool:
    mu, _ = frac_gso(rows)
    d = len(rows)
    half = Fraction(1, 2)
    return all(abs(mu[i][j]) <= half for i in range(d) for j in range(i))


def lovasz_holds(rows, delta=Fraction(99, 100)) -> bool:
    mu, norms2 = frac_gso(rows)
    d = len(rows)
    delta = Fraction(delta).limit_denominator(10**6)
    for k in range(1, d):
        lhs = delta * norms2[k - 1]
        rhs = norms2[k] + mu[k][k - 1] ** 2 * norms2[k - 1]
        if lhs > rhs:
            return False
    return True


def det_via_fractions(rows) -> Fraction:
    """Plain Gaussian-elimination determinant (different algorithm from Bareiss)."""
    a = [[Fraction(int(x)) for x in row] for row in rows]
    n = len(a)
    det = Fraction(1)
    for k in range(n):
        pivot = next((i for i in range(k, n) if a[i][k] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != k:
            a[k], a[pivot] = a[pivot], a[k]
            det = -det
        det *= a[k][k]
        inv = a[k][k]
        for i in range(k + 1, n):
            if a[i][k] != 0:
                f = a[i][k] / inv
                a[i] = [v - f * w for v, w in zip(a[i], a[k])]
    return det


def same_lattice(rows_a, rows_b) -> bool:
    """True iff the integer row spans coincide (via exact mutual solvability)."""
    return _integral_combination(rows_a, rows_b) and _integral_combination(rows_b, rows_a)


def _integral_combination(base, targets) -> bool:
    """Every target row is an integer combination of the base rows."""
    a = [[Fraction(int(x)) for x in row] for row in base]
    n = len(a)
    for target in targets:
        t = [Fraction(int(x)) for x in target]
        # solve x @ a = t by elimination on the transpose system
        m = [[a[i][c] for i in range(n)] for c in range(len(t))]
        rhs = list(t)
        coeffs = _solve_exact(m, rhs, n)
        if coeffs is None:
            return False
        if any(c.denominator != 1 for c in coeffs):
            return False
    return True


def _solve_exact(m, rhs, nvars):
    rows = len(m)
    aug = [m[i] + [rhs[i]] for i in range(rows)]
    pivots = []
    r = 0
    for c in range(nvars):
        pivot = next((i for i in range(r, rows) if aug[i][c] != 0), None)
        if pivot is None:
            continue
        aug[r], aug[pivot] = aug[pivot], aug[r]
        pv = aug[r][c]
        aug[r] = [v / pv for v in aug[r]]
        for i in range(rows):
            if i != r and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [v - f * w for v, w in zip(aug[i], aug[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    # consistency: zero rows must have zero rhs
    for i in range(r, rows):
        if aug[i][nvars] != 0:
            return None
    sol = [Fraction(0)] * nvars
    for row_idx, c in enumerate(pivots):
        sol[c] = aug[row_idx][nvars]
    return sol


def shortest_norm2_2d(v1, v2, coeff_bound) -> int:
    """Exhaustive shortest squared norm over c1, c2 in [-bound, bound]^2 \\ {0}."""
    best = None
    for c1 in range(-coeff_bound, coeff_bound + 1):
        for c2 in range(-coeff_bound, coeff_bound + 1):
            if c1 == 0 and c2 == 0:
                continue
            w = [c1 * a + c2 * b for a, b in zip(v1, v2)]
            n2 = sum(x * x for x in w)
            if best is None or n2 < best:
                best = n2
    return best


def shortest_norm2_enum(rows) -> int:
    """Exact shortest nonzero squared norm by depth-first enumeration.

    Sound for small dimensions: float bounds are widened by a safety margin
    and every candidate is re-checked with exact integer arithmetic.
    """
    mu, norms2 = frac_gso(rows)
    d = len(rows)
    best = [sum(int(x) * int(x) for x in rows[0])]

    def exact_norm2(coeffs):
        v = [0] * len(rows[0])
        for c, row in zip(coeffs, rows):
            if c:
                v = [a + c * int(b) for a, b in zip(v, row)]
        return sum(a * a for a in v)

    x = [0] * d

    def walk(level, partial):
        if partial >= best[0]:
            return
        if level < 0:
            if any(x):
                n2 = exact_norm2(x)
                if n2 < best[0]:
                    best[0] = n2
            return
        center = -sum(x[j] * mu[j][level] for j in range(level + 1, d))
        budget = Fraction(best[0]) - partial
        if norms2[level] == 0:
            span = 0
        else:
            span = int(math.isqrt(int(budget / norms2[level])) + 2)
        base = int(center)
        for cand in range(base - span - 1, base + span + 2):
            x[level] = cand
            contrib = norms2[level] * (Fraction(cand) - center) ** 2
            walk(level - 1, partial + contrib)
        x[level] = 0

    walk(d - 1, Fraction(0))
    return best[0]
