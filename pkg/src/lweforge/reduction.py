"""Exact-arithmetic lattice basis reduction: LLL, enumeration BKZ, polish.

Bases are lists of integer rows (Python ints, so nothing ever overflows).
The LLL here is the all-integer variant: instead of rational Gram-Schmidt
coefficients mu[i][j] it tracks lam[i][j] = d[j+1] * mu[i][j] and the Gram
determinants d[k] = det(Gram(rows[:k])), all of which stay integral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from lweforge.errors import DependentBasisError

IntMatrix = list[list[int]]

POLISH_MAX_SWEEPS = 100
BKZ_MAX_TOURS = 20


def _as_rows(rows: Sequence[Sequence[int]]) -> IntMatrix:
    return [[int(x) for x in row] for row in rows]


def _dot(u: list[int], v: list[int]) -> int:
    return sum(a * b for a, b in zip(u, v))


def _round_div(a: int, b: int) -> int:
    """Nearest integer to a/b for b > 0 (ties toward +inf)."""
    return (2 * a + b) // (2 * b)


# ---------------------------------------------------------------------------
# LLL


def lll(rows: Sequence[Sequence[int]], delta: float = 0.99) -> IntMatrix:
    """LLL-reduce a full-rank integer basis with exact integer arithmetic.

    Output is size-reduced (|mu| <= 1/2) and satisfies the Lovasz condition
    with parameter delta. Raises DependentBasisError on dependent input.
    """
    if not 0.25 < delta < 1.0:
        raise ValueError(f"delta must lie in (1/4, 1), got {delta}")
    frac = Fraction(delta).limit_denominator(10**6)
    num, den = frac.numerator, frac.denominator

    b = _as_rows(rows)
    d = len(b)
    if d == 0:
        return b
    if d == 1:
        if all(x == 0 for x in b[0]):
            raise DependentBasisError("zero row is not a basis")
        return b

    # lam[i][j] valid for j < i; dv[k] = det Gram(b[:k]), dv[0] = 1
    lam = [[0] * d for _ in range(d)]
    dv = [0] * (d + 1)
    dv[0] = 1
    dv[1] = _dot(b[0], b[0])
    if dv[1] == 0:
        raise DependentBasisError("zero row is not a basis")
    kmax = 0

    def init_row(k: int) -> None:
        for j in range(k + 1):
            u = _dot(b[k], b[j])
            for i in range(j):
                u = (dv[i + 1] * u - lam[k][i] * lam[j][i]) // dv[i]
            if j < k:
                lam[k][j] = u
            else:
                if u <= 0:
                    raise DependentBasisError("input rows are linearly dependent")
                dv[k + 1] = u

    def red(k: int, l: int) -> None:
        if 2 * abs(lam[k][l]) > dv[l + 1]:
            r = _round_div(lam[k][l], dv[l + 1])
            bl = b[l]
            b[k] = [x - r * y for x, y in zip(b[k], bl)]
            lam[k][l] -= r * dv[l + 1]
            laml = lam[l]
            lamk = lam[k]
            for i in range(l):
                lamk[i] -= r * laml[i]

    def swap(k: int) -> None:
        b[k], b[k - 1] = b[k - 1], b[k]
        for j in range(k - 1):
            lam[k][j], lam[k - 1][j] = lam[k - 1][j], lam[k][j]
        lamk = lam[k][k - 1]
        new_d = (dv[k - 1] * dv[k + 1] + lamk * lamk) // dv[k]
        for i in range(k + 1, kmax + 1):
            t = lam[i][k]
            lam[i][k] = (dv[k + 1] * lam[i][k - 1] - lamk * t) // dv[k]
            lam[i][k - 1] = (new_d * t + lamk * lam[i][k]) // dv[k + 1]
        dv[k] = new_d

    k = 1
    while k < d:
        if k > kmax:
            kmax = k
            init_row(k)
        red(k, k - 1)
        lamk = lam[k][k - 1]
        if den * (dv[k + 1] * dv[k - 1] + lamk * lamk) < num * dv[k] * dv[k]:
            swap(k)
            k = max(k - 1, 1)
        else:
            for l in range(k - 2, -1, -1):
                red(k, l)
            k += 1
    return b


# ---------------------------------------------------------------------------
# Gram-Schmidt (float64, for enumeration only; basis updates stay exact)


def gso_float(rows: IntMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Return (mu, norms2) of the float64 Gram-Schmidt orthogonalization."""
    B = np.array(rows, dtype=np.float64)
    d = len(rows)
    mu = np.eye(d)
    ortho = np.zeros_like(B)
    norms2 = np.zeros(d)
    for i in range(d):
        v = B[i].copy()
        for j in range(i):
            if norms2[j] > 0:
                mu[i, j] = np.dot(B[i], ortho[j]) / norms2[j]
                v -= mu[i, j] * ortho[j]
        ortho[i] = v
        norms2[i] = np.dot(v, v)
    return mu, norms2


def _ints_by_distance(c: float):
    """Yield all integers ordered by distance to the real center c."""
    mid = math.floor(c + 0.5)
    yield mid
    lo, hi = mid - 1, mid + 1
    while True:
        if hi - c <= c - lo:
            yield hi
            hi += 1
        else:
            yield lo
            lo -= 1


def _enum_shortest(
    mu: np.ndarray, norms2: np.ndarray, start: int, end: int, radius2: float
) -> Optional[list[int]]:
    """Schnorr-Euchner enumeration over the projected block [start, end).

    Returns coefficients x (length end - start, not all zero) minimizing the
    projected squared norm if one beats radius2, else None.
    """
    L = end - start
    best: Optional[list[int]] = None
    best_norm = radius2
    x = [0] * L

    def descend(i: int, partial: float) -> None:
        nonlocal best, best_norm
        center = -sum(x[j] * mu[start + j, start + i] for j in range(i + 1, L))
        weight = norms2[start + i]
        for cand in _ints_by_distance(center):
            diff = cand - center
            cost = partial + weight * diff * diff
            if cost >= best_norm:
                break  # candidates only get farther from the center
            x[i] = cand
            if i == 0:
                if any(x):
                    best = x.copy()
                    best_norm = cost
            else:
                descend(i - 1, cost)
        x[i] = 0

    descend(L - 1, 0.0)
    if best is None:
        return None
    g = 0
    for v in best:
        g = math.gcd(g, v)
    if g > 1:
        best = [v // g for v in best]
    return best


def unimodular_completion(x: Sequence[int]) -> IntMatrix:
    """A square integer matrix with first row x and determinant +-1.

    Requires gcd(x) == 1. Built by reducing x to a unit vector with
    elementary column operations while accumulating their inverses as
    row operations on an identity matrix.
    """
    y = [int(v) for v in x]
    L = len(y)
    M = [[1 if i == j else 0 for j in range(L)] for i in range(L)]

    def nonzero_positions():
        return [i for i in range(L) if y[i] != 0]

    pos = nonzero_positions()
    if not pos:
        raise ValueError("cannot complete the zero vector")
    while len(pos) > 1:
        p = min(pos, key=lambda i: abs(y[i]))
        for j in pos:
            if j == p:
                continue
            c = y[j] // y[p]
            if c != 0:
                y[j] -= c * y[p]
                # inverse of "col_j -= c * col_p" is the row op "row_p += c * row_j"
                M[p] = [a + c * b for a, b in zip(M[p], M[j])]
        pos = nonzero_positions()
    p = pos[0]
    if abs(y[p]) != 1:
        raise ValueError(f"vector is not primitive, gcd = {abs(y[p])}")
    if y[p] == -1:
        y[p] = 1
        M[p] = [-a for a in M[p]]
    if p != 0:
        y[0], y[p] = y[p], y[0]
        M[0], M[p] = M[p], M[0]
    return M


def bkz(
    rows: Sequence[Sequence[int]],
    beta: int,
    delta: float = 0.99,
    max_tours: int = BKZ_MAX_TOURS,
) -> IntMatrix:
    """Block-Korkine-Zolotarev reduction by plain enumeration (no pruning).

    Runs LLL, then repeats tours of shortest-vector insertions on projected
    blocks of size beta until a tour makes no change or max_tours is hit.
    """
    b = lll(rows, delta)
    d = len(b)
    if beta < 2 or beta > d:
        raise ValueError(f"beta must lie in [2, {d}], got {beta}")
    for _ in range(max_tours):
        changed = False
        for kappa in range(d - 1):
            end = min(kappa + beta, d)
            if end - kappa < 2:
                continue
            mu, norms2 = gso_float(b)
            radius2 = norms2[kappa] * (1.0 - 1e-9)
            coeffs = _enum_shortest(mu, norms2, kappa, end, radius2)
            if coeffs is None:
                continue
            M = unimodular_completion(coeffs)
            block = b[kappa:end]
            b[kappa:end] = [
                [sum(M[i][t] * block[t][c] for t in range(len(block))) for c in range(len(block[0]))]
                for i in range(len(block))
            ]
            b = lll(b, delta)
            changed = True
        if not changed:
            break
    return b


# ---------------------------------------------------------------------------
# Polish

_INT64_GRAM_SAFE = 2**62


def _gram(rows: IntMatrix) -> list[list[int]]:
    d = len(rows)
    cols = len(rows[0]) if d else 0
    bound = max((max(abs(x) for x in row) for row in rows), default=0)
    if cols and bound * bound * cols < _INT64_GRAM_SAFE:
        B = np.array(rows, dtype=np.int64)
        G = B @ B.T
        return [[int(v) for v in row] for row in G]
    return [[_dot(rows[i], rows[j]) for j in range(d)] for i in range(d)]


def polish(rows: Sequence[Sequence[int]], max_sweeps: int = POLISH_MAX_SWEEPS) -> IntMatrix:
    """Pairwise row shortening to a fixpoint.

    Repeatedly replaces row_i with row_i - round(<r_i, r_j>/<r_j, r_j>) r_j
    whenever that strictly shortens row_i. At the fixpoint no row can be
    shortened by adding or subtracting any single other row.
    """
    b = _as_rows(rows)
    d = len(b)
    if d < 2:
        return b
    G = _gram(b)
    for _ in range(max_sweeps):
        changed = False
        for i in range(d):
            for j in range(d):
                if i == j or G[j][j] == 0:
                    continue
                r = _round_div(G[i][j], G[j][j])
                if r == 0:
                    continue
                new_norm = G[i][i] - 2 * r * G[i][j] + r * r * G[j][j]
                if new_norm < G[i][i]:
                    bj = b[j]
                    b[i] = [x - r * y for x, y in zip(b[i], bj)]
                    for t in range(d):
                        if t != i:
                            G[i][t] -= r * G[j][t]
                            G[t][i] = G[i][t]
                    G[i][i] = new_norm
                    changed = True
        if not changed:
            break
    return b


# ---------------------------------------------------------------------------
# Exact determinants and transforms


def det_exact(rows: Sequence[Sequence[int]]) -> int:
    """Fraction-free Bareiss determinant of a square integer matrix."""
    a = _as_rows(rows)
    n = len(a)
    if any(len(row) != n for row in a):
        raise ValueError("determinant requires a square matrix")
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            pivot = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if pivot is None:
                return 0
            a[k], a[pivot] = a[pivot], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def transform_matrix(original: Sequence[Sequence[int]], reduced: Sequence[Sequence[int]]) -> list[list[Fraction]]:
    """Solve reduced = U @ original for U, exactly over the rationals."""
    A = [[Fraction(int(x)) for x in row] for row in original]
    R = [[Fraction(int(x)) for x in row] for row in reduced]
    n = len(A)
    if len(R) != n or any(len(r) != len(A[0]) for r in R):
        raise ValueError("original and reduced must have identical shapes")
    # Solve U A = R  <=>  A^T U^T = R^T by Gaussian elimination on [A^T | R^T].
    At = [[A[j][i] for j in range(n)] for i in range(len(A[0]))]
    Rt = [[R[j][i] for j in range(n)] for i in range(len(R[0]))]
    rows_ = len(At)
    aug = [At[i] + Rt[i] for i in range(rows_)]
    col = 0
    for r in range(min(rows_, n)):
        pivot = next((i for i in range(r, rows_) if aug[i][col] != 0), None)
        if pivot is None:
            raise DependentBasisError("original basis is singular")
        aug[r], aug[pivot] = aug[pivot], aug[r]
        pv = aug[r][col]
        aug[r] = [v / pv for v in aug[r]]
        for i in range(rows_):
            if i != r and aug[i][col] != 0:
                f = aug[i][col]
                aug[i] = [v - f * w for v, w in zip(aug[i], aug[r])]
        col += 1
    Ut = [row[n:] for row in aug[:n]]
    return [[Ut[j][i] for j in range(n)] for i in range(n)]


def is_unimodular(U: Sequence[Sequence[Fraction]]) -> bool:
    """True iff U is integral with determinant +-1."""
    ints = []
    for row in U:
        r = []
        for v in row:
            f = Fraction(v)
            if f.denominator != 1:
                return False
            r.append(f.numerator)
        ints.append(r)
    return abs(det_exact(ints)) == 1


# ---------------------------------------------------------------------------
# Reducer registry


@dataclass(frozen=True)
class ReducerSpec:
    """Selects one reduction routine plus its knobs.

    alpha is unused by the built-in reducers; it is forwarded to registered
    plugins that implement quality-targeted reduction.
    """

    kind: str = "lll"
    delta: float = 0.99
    beta: int = 20
    alpha: float = 0.04

    def __post_init__(self):
        if not 0.25 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (1/4, 1), got {self.delta}")
        if self.beta < 2:
            raise ValueError(f"beta must be >= 2, got {self.beta}")


ReducerFn = Callable[[IntMatrix, ReducerSpec], IntMatrix]

_REDUCERS: dict[str, ReducerFn] = {}


def register_reducer(name: str, fn: ReducerFn) -> None:
    """Expose a custom reduction routine to ReducerSpec(kind=name)."""
    _REDUCERS[name] = fn


def run_reducer(rows: Sequence[Sequence[int]], spec: ReducerSpec) -> IntMatrix:
    if spec.kind == "lll":
        return lll(rows, spec.delta)
    if spec.kind == "bkz":
        return bkz(rows, min(spec.beta, len(rows)), spec.delta)
    fn = _REDUCERS.get(spec.kind)
    if fn is None:
        raise KeyError(f"unknown reducer {spec.kind!r}; registered: {sorted(_REDUCERS)}")
    return fn(_as_rows(rows), spec)
