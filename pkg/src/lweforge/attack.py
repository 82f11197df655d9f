"""Sparse-secret recovery on reduced datasets.

The cruel coordinates (columns still uniform mod q) are brute-forced over
low-weight support assignments and scored by the stddev of the residual
Rb - RA_cruel @ guess: a correct guess leaves only the cool contribution plus
amplified noise, a wrong one leaves a near-uniform residual. The surviving
guesses then get their cool coordinates from least-squares regression on a
disjoint slice of samples, and every assembled candidate must pass
verification against the original (A, b) pool before it is reported.
"""

from __future__ import annotations

import itertools
import json
import math
import time
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from lweforge.core import LweInstance, centered_vec, verify_secret
from lweforge.dataset_io import Dataset
from lweforge.errors import EnumerationCapError, InsufficientDataError
from lweforge.stats import CliffProfile

ENUM_CAP = 10_000_000


@dataclass(frozen=True)
class AttackConfig:
    max_cruel_weight: int = 4
    brute_samples: int = 100_000
    score_keep: int = 16
    accept_threshold: Optional[float] = None  # None -> 2 sigma
    enum_cap: int = ENUM_CAP

    def __post_init__(self):
        if self.max_cruel_weight < 0:
            raise ValueError("max_cruel_weight must be >= 0")
        if self.brute_samples < 1:
            raise ValueError("brute_samples must be >= 1")
        if self.score_keep < 1:
            raise ValueError("score_keep must be >= 1")


@dataclass
class ScoredGuess:
    positions: tuple  # indices into the cruel column list
    values: tuple
    score: float
    order: int  # enumeration rank, the deterministic tie-breaker


@dataclass
class AttackResult:
    recovered_s: Optional[np.ndarray]
    cruel_guess: Optional[dict]
    residual_std: float
    candidates_tried: int
    verified: int
    wall_seconds: float

    @property
    def succeeded(self) -> bool:
        return self.recovered_s is not None

    def to_dict(self) -> dict:
        return {
            "succeeded": self.succeeded,
            "recovered_s": None if self.recovered_s is None else [int(v) for v in self.recovered_s],
            "cruel_guess": self.cruel_guess,
            "residual_std": self.residual_std,
            "candidates_tried": self.candidates_tried,
            "verified": self.verified,
            "wall_seconds": round(self.wall_seconds, 3),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1) + "\n"


def _nonzero_support(secret_dist: str) -> tuple[int, ...]:
    if secret_dist == "binary":
        return (1,)
    if secret_dist == "ternary":
        return (1, -1)
    raise ValueError(f"attack supports binary and ternary secrets, not {secret_dist!r}")


def count_candidates(c: int, max_weight: int, secret_dist: str) -> int:
    """Candidates with at most max_weight nonzeros over c cruel columns."""
    v = len(_nonzero_support(secret_dist))
    return sum(math.comb(c, w) * v**w for w in range(min(max_weight, c) + 1))


def enumerate_guesses(cruel_count: int, max_weight: int, secret_dist: str):
    """Yield (positions, values) in deterministic order: weight, lex, signs."""
    support = _nonzero_support(secret_dist)
    for w in range(min(max_weight, cruel_count) + 1):
        for positions in itertools.combinations(range(cruel_count), w):
            for values in itertools.product(support, repeat=w):
                yield positions, values


def brute_force_cruel(
    RA: np.ndarray,
    Rb: np.ndarray,
    cruel_indices: np.ndarray,
    q: int,
    secret_dist: str,
    config: AttackConfig,
) -> list[ScoredGuess]:
    """Score every low-weight cruel assignment; return the best score_keep.

    Scoring runs on the first brute_samples rows only; ties break by
    enumeration order so results are deterministic.
    """
    total = count_candidates(len(cruel_indices), config.max_cruel_weight, secret_dist)
    if total > config.enum_cap:
        raise EnumerationCapError(
            f"{total} candidates exceed the cap of {config.enum_cap}; "
            f"lower max_cruel_weight or reduce the cruel region"
        )
    rows = min(config.brute_samples, RA.shape[0])
    ra_cruel = RA[:rows, cruel_indices].astype(np.int64)
    rb = Rb[:rows].astype(np.int64)
    scored: list[ScoredGuess] = []
    for order, (positions, values) in enumerate(
        enumerate_guesses(len(cruel_indices), config.max_cruel_weight, secret_dist)
    ):
        pred = np.zeros(rows, dtype=np.int64)
        for p, v in zip(positions, values):
            pred += v * ra_cruel[:, p]
        resid = centered_vec((rb - pred) % q, q).astype(np.float64)
        scored.append(ScoredGuess(positions, values, float(np.std(resid)), order))
    scored.sort(key=lambda g: (g.score, g.order))
    return scored[: config.score_keep]


def regress_cool(
    RA: np.ndarray,
    Rb: np.ndarray,
    guess: ScoredGuess,
    cruel_indices: np.ndarray,
    cool_indices: np.ndarray,
    q: int,
    support: Sequence[int],
) -> np.ndarray:
    """Least-squares estimate of the cool coordinates given a cruel guess.

    Coefficients round to the nearest support value with ties toward zero.
    Raises InsufficientDataError when the design matrix is rank deficient.
    """
    if RA.shape[0] < len(cool_indices):
        raise InsufficientDataError(
            f"{RA.shape[0]} regression rows for {len(cool_indices)} cool columns"
        )
    pred = np.zeros(RA.shape[0], dtype=np.int64)
    for p, v in zip(guess.positions, guess.values):
        pred += v * RA[:, cruel_indices[p]].astype(np.int64)
    target = centered_vec((Rb.astype(np.int64) - pred) % q, q).astype(np.float64)
    X = centered_vec(RA[:, cool_indices].astype(np.int64), q).astype(np.float64)
    coeffs, _, rank, _ = np.linalg.lstsq(X, target, rcond=None)
    if rank < len(cool_indices):
        raise InsufficientDataError(
            f"design matrix rank {rank} < {len(cool_indices)} cool columns"
        )
    return _round_to_support(coeffs, support)


def _round_to_support(coeffs: np.ndarray, support: Sequence[int]) -> np.ndarray:
    """Nearest support value per coefficient; exact ties go toward zero."""
    values = np.array(sorted(support), dtype=np.int64)
    out = np.empty(len(coeffs), dtype=np.int64)
    for i, c in enumerate(coeffs):
        dist = np.abs(values - c)
        best = dist.min()
        tied = values[dist == best]
        out[i] = tied[np.argmin(np.abs(tied))]
    return out


def attack(
    dataset: Dataset,
    instance: LweInstance,
    profile: CliffProfile,
    config: AttackConfig = AttackConfig(),
) -> AttackResult:
    """Full recovery: brute-force cruel region, regress cool, verify.

    Brute-force scoring and regression use disjoint sample slices (the first
    brute_samples rows versus the rest). The first candidate accepted by
    verification against the original pool wins.
    """
    from lweforge.pipeline import apply_secret

    t0 = time.perf_counter()
    params = instance.params
    ra_chunks, rb_chunks = [], []
    for batch in dataset.iter_batches():
        ra_chunks.append(batch.ra())
        rb_chunks.append(apply_secret(batch, instance))
    RA = np.concatenate(ra_chunks, axis=0)
    Rb = np.concatenate(rb_chunks, axis=0)
    if RA.shape[0] <= config.brute_samples:
        raise InsufficientDataError(
            f"dataset has {RA.shape[0]} samples; need more than "
            f"brute_samples={config.brute_samples} to keep the splits disjoint"
        )

    ranked = brute_force_cruel(
        RA, Rb, profile.cruel_indices, params.q, params.secret_dist, config
    )
    reg_RA = RA[config.brute_samples:]
    reg_Rb = Rb[config.brute_samples:]
    threshold = config.accept_threshold
    support = params.secret_support()

    best_residual = math.inf
    tried = count_candidates(
        len(profile.cruel_indices), config.max_cruel_weight, params.secret_dist
    )
    verified = 0
    for guess in ranked:
        cool_values = regress_cool(
            reg_RA, reg_Rb, guess, profile.cruel_indices,
            profile.cool_indices, params.q, support,
        )
        candidate = np.zeros(params.n, dtype=np.int64)
        for p, v in zip(guess.positions, guess.values):
            candidate[profile.cruel_indices[p]] = v
        candidate[profile.cool_indices] = cool_values
        verdict = verify_secret(instance.A, instance.b, candidate, params, threshold)
        verified += 1
        best_residual = min(best_residual, verdict.residual_std)
        if verdict.accepted:
            return AttackResult(
                recovered_s=candidate,
                cruel_guess={
                    "positions": [int(profile.cruel_indices[p]) for p in guess.positions],
                    "values": [int(v) for v in guess.values],
                    "score": guess.score,
                },
                residual_std=verdict.residual_std,
                candidates_tried=tried,
                verified=verified,
                wall_seconds=time.perf_counter() - t0,
            )
    return AttackResult(
        recovered_s=None,
        cruel_guess=None,
        residual_std=best_residual,
        candidates_tried=tried,
        verified=verified,
        wall_seconds=time.perf_counter() - t0,
    )
