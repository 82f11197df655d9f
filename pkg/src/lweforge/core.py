"""LWE sample-pool generation and candidate-secret verification over Z_q.

All modular algebra is exact: matrix products run in int64 only when the
worst-case intermediate provably fits, and fall back to Python bigints
otherwise. Values in [0, q) are the canonical residues; `centered` maps them
to the symmetric interval (-q/2, q/2].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
import sympy

POOL_FACTOR = 4  # pool holds POOL_FACTOR * n samples

SECRET_DISTS = ("binary", "ternary", "binomial")
ERROR_DISTS = ("gaussian", "binomial")

# int64 matmul is used only when |entries| and the contraction length keep
# every intermediate sum strictly below this bound.
_INT64_SAFE = 2**62


def uniform_std(q: int) -> float:
    """Standard deviation of a width-q uniform interval, q / sqrt(12)."""
    return q / math.sqrt(12.0)


def nextprime_pow2(logq: int) -> int:
    """Smallest prime above 2**logq, the default modulus for a given bit size."""
    return int(sympy.nextprime(2**logq))


@dataclass(frozen=True)
class LweParams:
    """Static parameters of an LWE instance family."""

    n: int
    q: int
    secret_dist: str = "binary"
    hamming_weight: Optional[int] = None
    error_dist: str = "gaussian"
    sigma: float = 3.2
    eta: int = 3

    def __post_init__(self):
        if self.n <= 0:
            raise ValueError(f"n must be positive, got {self.n}")
        if self.q <= 2 or not sympy.isprime(self.q):
            raise ValueError(f"q must be an odd prime, got {self.q}")
        if self.secret_dist not in SECRET_DISTS:
            raise ValueError(f"unknown secret_dist {self.secret_dist!r}")
        if self.error_dist not in ERROR_DISTS:
            raise ValueError(f"unknown error_dist {self.error_dist!r}")
        if self.hamming_weight is not None:
            if not 0 <= self.hamming_weight <= self.n:
                raise ValueError(
                    f"hamming_weight must lie in [0, n], got {self.hamming_weight}"
                )
        if self.error_dist == "gaussian" and self.sigma <= 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.eta < 1:
            raise ValueError(f"eta must be >= 1, got {self.eta}")

    @classmethod
    def from_logq(cls, n: int, logq: int, **kwargs) -> "LweParams":
        return cls(n=n, q=nextprime_pow2(logq), **kwargs)

    @property
    def pool_size(self) -> int:
        return POOL_FACTOR * self.n

    def secret_support(self) -> tuple[int, ...]:
        """All values a secret coordinate can take."""
        if self.secret_dist == "binary":
            return (0, 1)
        if self.secret_dist == "ternary":
            return (-1, 0, 1)
        return tuple(range(-self.eta, self.eta + 1))


@dataclass
class LweInstance:
    """A pool of 4n LWE samples b = A s + e (mod q) with the planted secret.

    Blind instances (for attack exercises against an unknown secret) carry
    s = e = None; everything except the final ground-truth comparison works
    without them.
    """

    params: LweParams
    seed: int
    A: np.ndarray  # (4n, n) int64, entries in [0, q)
    b: np.ndarray  # (4n,) int64, entries in [0, q)
    s: Optional[np.ndarray]  # (n,) int64, or None
    e: Optional[np.ndarray]  # (4n,) int64, or None

    def validate(self) -> None:
        p = self.params
        if self.A.shape != (p.pool_size, p.n):
            raise ValueError(f"A has shape {self.A.shape}, expected {(p.pool_size, p.n)}")
        if self.b.shape != (p.pool_size,):
            raise ValueError("b length does not match the pool size")
        if (self.s is None) != (self.e is None):
            raise ValueError("s and e must be present together or absent together")
        if self.s is None:
            return
        if self.s.shape != (p.n,) or self.e.shape != (p.pool_size,):
            raise ValueError("secret or error vector has the wrong length")
        lhs = matvec_mod(self.A, self.s, p.q)
        if not np.array_equal((lhs + self.e) % p.q, self.b):
            raise ValueError("b != A s + e (mod q); instance is inconsistent")


@dataclass(frozen=True)
class VerifyResult:
    accepted: bool
    residual_std: float


def centered(x: int, q: int) -> int:
    """Map a residue to its representative in (-q/2, q/2]."""
    return ((x + q // 2) % q) - q // 2


def centered_vec(x: np.ndarray, q: int) -> np.ndarray:
    """Vectorized `centered` for int64 arrays of residues."""
    return ((x + q // 2) % q) - q // 2


def matvec_mod(A: np.ndarray, x: np.ndarray, q: int) -> np.ndarray:
    """Exact A @ x mod q; int64 when safe, bigints otherwise."""
    x = np.asarray(x)
    xmax = max(1, int(np.abs(x).max())) if x.size else 1
    bound = A.shape[1] * int(q) * xmax
    if bound < _INT64_SAFE and A.dtype == np.int64:
        return (A @ x.astype(np.int64)) % q
    prod = A.astype(object) @ x.astype(object)
    return np.array([int(v) % q for v in prod], dtype=np.int64)


def matmul_mod(R: np.ndarray, A: np.ndarray, q: int) -> np.ndarray:
    """Exact R @ A mod q with the same overflow discipline as matvec_mod."""
    rmax = max(1, int(np.max(np.abs(R))))
    amax = max(1, int(np.max(np.abs(A))))
    if R.shape[1] * rmax * amax < _INT64_SAFE and R.dtype == np.int64:
        return (R.astype(np.int64) @ A.astype(np.int64)) % q
    prod = R.astype(object) @ A.astype(object)
    return np.array([[int(v) % q for v in row] for row in prod], dtype=np.int64)


def sample_secret(params: LweParams, rng: np.random.Generator) -> np.ndarray:
    """Draw a secret vector; fixed Hamming weight pins the nonzero count."""
    n, h = params.n, params.hamming_weight
    if h is None:
        if params.secret_dist == "binary":
            return rng.integers(0, 2, size=n, dtype=np.int64)
        if params.secret_dist == "ternary":
            return rng.integers(-1, 2, size=n, dtype=np.int64)
        return (rng.binomial(2 * params.eta, 0.5, size=n) - params.eta).astype(np.int64)
    s = np.zeros(n, dtype=np.int64)
    if h == 0:
        return s
    positions = rng.choice(n, size=h, replace=False)
    if params.secret_dist == "binary":
        values = np.ones(h, dtype=np.int64)
    else:
        # nonzero coordinates are uniform over the nonzero support
        support = [v for v in params.secret_support() if v != 0]
        values = rng.choice(np.array(support, dtype=np.int64), size=h)
    s[positions] = values
    return s


def sample_error(params: LweParams, count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw errors: rounded Gaussian by default, centered binomial otherwise."""
    if params.error_dist == "gaussian":
        return np.rint(rng.normal(0.0, params.sigma, size=count)).astype(np.int64)
    return (rng.binomial(2 * params.eta, 0.5, size=count) - params.eta).astype(np.int64)


def gen_instance(params: LweParams, seed: int) -> LweInstance:
    """Generate a 4n-sample pool deterministically from a 64-bit seed.

    Draw order (A, then s, then e) is part of the determinism contract.
    """
    rng = np.random.default_rng(seed)
    pool = params.pool_size
    A = rng.integers(0, params.q, size=(pool, params.n), dtype=np.int64)
    s = sample_secret(params, rng)
    e = sample_error(params, pool, rng)
    b = (matvec_mod(A, s, params.q) + e) % params.q
    return LweInstance(params=params, seed=seed, A=A, b=b, s=s, e=e)


def retarget(
    instance: LweInstance,
    seed: int,
    s: Optional[np.ndarray] = None,
    params: Optional[LweParams] = None,
) -> LweInstance:
    """New instance over the same sample pool A with a fresh secret and error.

    The reduction side only ever looks at A, so datasets built from the old
    instance stay valid for the new one. Pass `s` to plant an explicit secret.
    """
    p = params if params is not None else instance.params
    if p.n != instance.params.n or p.q != instance.params.q:
        raise ValueError("retarget cannot change n or q")
    rng = np.random.default_rng(seed)
    new_s = sample_secret(p, rng) if s is None else np.asarray(s, dtype=np.int64).copy()
    if new_s.shape != (p.n,):
        raise ValueError(f"secret has shape {new_s.shape}, expected {(p.n,)}")
    e = sample_error(p, p.pool_size, rng)
    b = (matvec_mod(instance.A, new_s, p.q) + e) % p.q
    return LweInstance(params=p, seed=instance.seed, A=instance.A, b=b, s=new_s, e=e)


def verify_secret(
    A: np.ndarray,
    b: np.ndarray,
    candidate: np.ndarray,
    params: LweParams,
    accept_threshold: Optional[float] = None,
) -> VerifyResult:
    """Accept a candidate secret iff the centered residual std is small.

    The planted secret leaves std(e) ~ sigma; a wrong candidate leaves
    residuals uniform mod q with std ~ q / sqrt(12).
    """
    candidate = np.asarray(candidate, dtype=np.int64)
    if A.ndim != 2 or A.shape[1] != candidate.shape[0]:
        raise ValueError(
            f"dimension mismatch: A is {A.shape}, candidate has length {candidate.shape[0]}"
        )
    if A.shape[0] != b.shape[0]:
        raise ValueError("A and b disagree on the number of samples")
    if accept_threshold is None:
        accept_threshold = 2.0 * params.sigma
    residual = centered_vec((b - matvec_mod(A, candidate, params.q)) % params.q, params.q)
    residual_std = float(np.std(residual.astype(np.float64)))
    return VerifyResult(accepted=residual_std <= accept_threshold, residual_std=residual_std)


def clone_with_weight(params: LweParams, hamming_weight: Optional[int]) -> LweParams:
    """Convenience copy used when planting secrets of a chosen weight."""
    return replace(params, hamming_weight=hamming_weight)
