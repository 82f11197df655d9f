"""Subsample -> q-ary embed -> interleaved reduction -> dataset production.

The controller alternates a fast reducer and a strong reducer over the same
embedded basis, switching only when the recent trend of the reduction factor
rho regresses past gamma (gamma <= 0, so a flat plateau never switches; step,
wall-clock, and fixpoint caps bound the loop instead).
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from filelock import FileLock

from lweforge.core import LweInstance, LweParams, centered_vec, matmul_mod, matvec_mod
from lweforge.dataset_io import (
    Dataset,
    ReducedBatch,
    batch_filename,
    read_manifest,
    write_batch_file,
    write_manifest,
)
from lweforge.errors import (
    DataError,
    DegenerateBasisError,
    DependentBasisError,
    FormatError,
)
from lweforge.reduction import IntMatrix, ReducerSpec, polish, run_reducer

log = logging.getLogger(__name__)

DEFAULT_MAX_STEPS = 500
DEFAULT_MAX_SECONDS = 48 * 3600.0


@dataclass(frozen=True)
class ReductionJobConfig:
    """Everything needed to turn an instance pool into a reduced dataset."""

    params: LweParams
    m: int
    tau: float
    omega: int = 10
    fast: ReducerSpec = field(default_factory=lambda: ReducerSpec(kind="lll", delta=0.99))
    strong: ReducerSpec = field(default_factory=lambda: ReducerSpec(kind="bkz", beta=20))
    gamma: float = -0.001
    stall_window: int = 3
    matrices: int = 1
    workers: int = 1
    seed: int = 0
    max_steps: int = DEFAULT_MAX_STEPS
    max_seconds: float = DEFAULT_MAX_SECONDS

    def __post_init__(self):
        if not 0 < self.m <= self.params.pool_size:
            raise ValueError(f"m must lie in (0, {self.params.pool_size}], got {self.m}")
        if self.omega < 1:
            raise ValueError(f"omega must be >= 1, got {self.omega}")
        if not 0.0 < self.tau <= 1.0:
            raise ValueError(f"tau must lie in (0, 1], got {self.tau}")
        if self.stall_window < 1:
            raise ValueError(f"stall_window must be >= 1, got {self.stall_window}")
        if self.gamma > 0:
            raise ValueError(f"gamma must be <= 0, got {self.gamma}")
        if self.matrices < 0:
            raise ValueError("matrices must be >= 0")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.max_steps < 1 or self.max_seconds <= 0:
            raise ValueError("caps must be positive")

    def echo(self) -> dict:
        """JSON-serializable form used in manifests and run logs."""
        p = self.params
        return {
            "n": p.n,
            "q": p.q,
            "secret_dist": p.secret_dist,
            "hamming_weight": p.hamming_weight,
            "error_dist": p.error_dist,
            "sigma": p.sigma,
            "eta": p.eta,
            "m": self.m,
            "omega": self.omega,
            "tau": self.tau,
            "fast": asdict(self.fast),
            "strong": asdict(self.strong),
            "gamma": self.gamma,
            "stall_window": self.stall_window,
            "matrices": self.matrices,
            "workers": self.workers,
            "seed": self.seed,
            "max_steps": self.max_steps,
            "max_seconds": self.max_seconds,
        }


@dataclass
class RhoHistory:
    """Per-step reduction factors and where reducer switches happened."""

    values: list = field(default_factory=list)
    switch_steps: list = field(default_factory=list)

    def running_min(self) -> list:
        out = []
        cur = math.inf
        for v in self.values:
            cur = min(cur, v)
            out.append(cur)
        return out


@dataclass
class ReduceOutcome:
    steps: int
    stop_reason: str  # "tau" | "max_steps" | "max_seconds" | "fixpoint"
    wall_seconds: float
    final_rho: float

    @property
    def capped(self) -> bool:
        return self.stop_reason != "tau"


def subsample(
    instance: LweInstance, m: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Pick m distinct pool rows; returns (A_sub, b_sub, sorted indices)."""
    pool = instance.params.pool_size
    if not 0 < m <= pool:
        raise ValueError(f"m must lie in (0, {pool}], got {m}")
    indices = np.sort(rng.choice(pool, size=m, replace=False)).astype(np.int64)
    return instance.A[indices].copy(), instance.b[indices].copy(), indices


def embed_qary(A_sub: np.ndarray, q: int, omega: int) -> IntMatrix:
    """(n+m) x (n+m) q-ary embedding [[0, q I_n], [omega I_m, A_sub]]."""
    m, n = A_sub.shape
    rows: IntMatrix = []
    for i in range(n):
        row = [0] * (m + n)
        row[m + i] = q
        rows.append(row)
    for i in range(m):
        row = [0] * (m + n)
        row[i] = omega
        for j in range(n):
            row[m + j] = int(A_sub[i, j])
        rows.append(row)
    return rows


def compute_reduction(rows: Sequence[Sequence[int]], A_sub: np.ndarray, q: int, omega: int) -> float:
    """Reduction factor rho: mean row std of centered RA over that of A_sub.

    Rows whose first-m block is all zero carry no sample and are excluded.
    """
    m, n = A_sub.shape
    surviving = [row for row in rows if any(row[:m])]
    if not surviving:
        raise DegenerateBasisError("no rows with nonzero R part")
    ra = np.array([[int(v) % q for v in row[m:]] for row in surviving], dtype=np.int64)
    ra_c = centered_vec(ra, q).astype(np.float64)
    a_c = centered_vec(A_sub.astype(np.int64), q).astype(np.float64)
    num = float(np.mean(np.std(ra_c, axis=1)))
    den = float(np.mean(np.std(a_c, axis=1)))
    if den == 0:
        raise DegenerateBasisError("A_sub rows have zero spread")
    return num / den


def check_for_switch(
    rho: float,
    prior_rho: Sequence[float],
    stall_window: int,
    gamma: float,
    active_fast: bool,
    active_strong: bool,
) -> tuple[bool, bool, list, bool]:
    """Stall test over the trailing window of rho decreases.

    Only a mean decrease below gamma (a sustained regression, since gamma is
    negative) flips the active reducer. The current rho is appended to the
    history after the test; the caller recomputes rho from the basis.
    Returns (active_fast, active_strong, new_history, switched).
    """
    stall = False
    history = list(prior_rho)
    if len(history) > stall_window + 1:
        decreases = [history[i - 1] - history[i] for i in range(-stall_window, 0)]
        if sum(decreases) / len(decreases) < gamma:
            stall = True
    if stall:
        active_fast, active_strong = not active_fast, not active_strong
    history.append(rho)
    return active_fast, active_strong, history, stall


def interleaved_reduce(
    rows: Sequence[Sequence[int]],
    A_sub: np.ndarray,
    config: ReductionJobConfig,
) -> tuple[IntMatrix, RhoHistory, ReduceOutcome]:
    """Alternate fast/strong reduction plus polish until rho <= tau or a cap.

    Returns the best basis seen (by rho), the rho trace, and the outcome.
    """
    q, omega = config.params.q, config.omega
    basis = [list(map(int, r)) for r in rows]
    rho = math.inf
    prior: list = []
    active_fast, active_strong = True, False
    history = RhoHistory()
    best_rows = basis
    best_rho = math.inf
    steps = 0
    unchanged = 0
    started = time.perf_counter()
    outcome: Optional[ReduceOutcome] = None

    def run_step(spec: ReducerSpec) -> None:
        nonlocal basis, rho, prior, active_fast, active_strong
        nonlocal best_rows, best_rho, steps, unchanged, outcome
        before = basis
        basis = polish(run_reducer(basis, spec))
        active_fast, active_strong, prior, switched = check_for_switch(
            rho, prior, config.stall_window, config.gamma, active_fast, active_strong
        )
        rho = compute_reduction(basis, A_sub, q, omega)
        steps += 1
        history.values.append(rho)
        if switched:
            history.switch_steps.append(steps)
        if rho < best_rho:
            best_rho = rho
            best_rows = [row.copy() for row in basis]
        unchanged = unchanged + 1 if (basis == before and not switched) else 0
        if steps >= config.max_steps:
            outcome = _done("max_steps")
        elif time.perf_counter() - started > config.max_seconds:
            outcome = _done("max_seconds")
        elif unchanged >= config.stall_window + 2:
            # deterministic reducers at a shared fixpoint, gamma <= 0: no
            # future switch can fire, so running to max_steps changes nothing
            outcome = _done("fixpoint")

    def _done(reason: str) -> ReduceOutcome:
        return ReduceOutcome(
            steps=steps,
            stop_reason=reason,
            wall_seconds=time.perf_counter() - started,
            final_rho=best_rho,
        )

    while rho >= config.tau:
        while active_fast:
            run_step(config.fast)
            if outcome is not None:
                return best_rows, history, outcome
            if rho <= config.tau:
                break
        while active_strong:
            run_step(config.strong)
            if outcome is not None:
                return best_rows, history, outcome
            if rho <= config.tau:
                break
    return best_rows, history, _doneify(steps, started, best_rho)


def _doneify(steps: int, started: float, best_rho: float) -> ReduceOutcome:
    return ReduceOutcome(
        steps=steps,
        stop_reason="tau",
        wall_seconds=time.perf_counter() - started,
        final_rho=best_rho,
    )


def extract_r(
    rows: Sequence[Sequence[int]], m: int, n: int, q: int, omega: int
) -> tuple[np.ndarray, np.ndarray]:
    """Split reduced rows into (R, RA): R from the omega block, RA mod q.

    Rows with an all-zero R part are pure q-vector relics and are dropped.
    """
    R_rows = []
    RA_rows = []
    for row in rows:
        left = row[:m]
        if any(v % omega for v in left):
            raise FormatError("left block entry not divisible by omega; layout corrupt")
        r = [v // omega for v in left]
        if not any(r):
            continue
        R_rows.append(r)
        RA_rows.append([int(v) % q for v in row[m:]])
    if not R_rows:
        raise DegenerateBasisError("every reduced row lost its R part")
    R = np.array(R_rows, dtype=np.int64)
    RA = np.array(RA_rows, dtype=np.int64)
    if R.shape[1] != m or RA.shape[1] != n:
        raise FormatError("extracted blocks have inconsistent widths")
    return R, RA


def apply_secret(batch: ReducedBatch, instance: LweInstance) -> np.ndarray:
    """Rb = R @ b[indices] mod q for the batch's recorded subsample."""
    if instance.params.q != batch.q:
        raise DataError("instance modulus does not match batch")
    b_sub = instance.b[batch.indices]
    return matvec_mod(batch.R, b_sub, batch.q)


def _batch_seed(job_seed: int, index: int, attempt: int = 0) -> int:
    """Stable 64-bit stream id for one batch worker."""
    ss = np.random.SeedSequence(entropy=[int(job_seed), int(index), int(attempt)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def reduce_one_batch(instance: LweInstance, config: ReductionJobConfig, index: int) -> ReducedBatch:
    """Subsample, embed, reduce, and extract a single batch (one worker's job)."""
    p = config.params
    attempt = 0
    while True:
        seed = _batch_seed(config.seed, index, attempt)
        rng = np.random.default_rng(seed)
        A_sub, _, indices = subsample(instance, config.m, rng)
        basis = embed_qary(A_sub, p.q, config.omega)
        t0 = time.perf_counter()
        try:
            reduced, hist, outcome = interleaved_reduce(basis, A_sub, config)
            R, _ = extract_r(reduced, config.m, p.n, p.q, config.omega)
            break
        except (DependentBasisError, DegenerateBasisError):
            attempt += 1
            if attempt > 3:
                raise
            log.warning("batch %d: degenerate subsample, redrawing (attempt %d)", index, attempt)
    wall = time.perf_counter() - t0
    return ReducedBatch(
        index=index,
        n=p.n,
        m=config.m,
        q=p.q,
        omega=config.omega,
        seed=seed,
        A_sub=A_sub,
        R=R,
        indices=indices,
        rho=outcome.final_rho,
        wall_seconds=wall,
        steps=outcome.steps,
        capped=outcome.capped,
        stop_reason=outcome.stop_reason,
        rho_trace=list(hist.values),
        switch_steps=list(hist.switch_steps),
    )


def _batch_record(batch: ReducedBatch) -> dict:
    return {
        "index": batch.index,
        "seed": batch.seed,
        "k": int(batch.k),
        "rho": batch.rho,
        "wall_seconds": batch.wall_seconds,
        "steps": batch.steps,
        "capped": batch.capped,
        "stop_reason": batch.stop_reason,
        "indices": [int(i) for i in batch.indices],
        "rho_trace": [float(v) for v in batch.rho_trace],
        "switch_steps": [int(s) for s in batch.switch_steps],
    }


_RESUME_KEYS = ("n", "q", "m", "omega", "tau", "gamma", "stall_window", "seed", "fast", "strong")


def _check_resume_compatible(existing: dict, config: ReductionJobConfig) -> None:
    old = existing.get("config", {})
    new = config.echo()
    for key in _RESUME_KEYS:
        if old.get(key) != new.get(key):
            raise DataError(
                f"dataset dir was produced with {key}={old.get(key)!r}, "
                f"requested {new.get(key)!r}; refusing to mix"
            )


def produce_dataset(
    instance: LweInstance, config: ReductionJobConfig, out_dir
) -> Dataset:
    """Reduce `config.matrices` batches in parallel into out_dir.

    Already-completed batch indices found in the manifest are skipped, so an
    interrupted job resumes where it left off. Batch contents depend only on
    (config.seed, index), never on scheduling order.
    """
    if instance.params != config.params:
        raise DataError("instance params and job params disagree")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    lock = FileLock(str(out / ".manifest.lock"))

    with lock:
        try:
            manifest = read_manifest(out)
            _check_resume_compatible(manifest, config)
            manifest["config"] = config.echo()
        except FormatError:
            manifest = {
                "format_version": 1,
                "config": config.echo(),
                "instance_seed": instance.seed,
                "batches": [],
            }
        write_manifest(out, manifest)

    done = {rec["index"] for rec in manifest["batches"]}
    todo = [i for i in range(config.matrices) if i not in done]
    failures: list[tuple[int, str]] = []

    def record(batch: ReducedBatch) -> None:
        write_batch_file(out / batch_filename(batch.index), batch)
        with lock:
            manifest["batches"].append(_batch_record(batch))
            write_manifest(out, manifest)

    if config.workers == 1 or len(todo) <= 1:
        for index in todo:
            try:
                record(reduce_one_batch(instance, config, index))
            except Exception as exc:  # noqa: BLE001 - worker isolation
                log.error("batch %d failed: %s", index, exc)
                failures.append((index, str(exc)))
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            futures = {
                pool.submit(reduce_one_batch, instance, config, index): index
                for index in todo
            }
            for fut in as_completed(futures):
                index = futures[fut]
                try:
                    record(fut.result())
                except Exception as exc:  # noqa: BLE001 - worker isolation
                    log.error("batch %d failed: %s", index, exc)
                    failures.append((index, str(exc)))

    if failures:
        log.warning("%d batch(es) failed and were skipped: %s", len(failures), failures)
    return Dataset(out)
