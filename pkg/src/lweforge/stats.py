"""Data-quality statistics for reduced datasets: the reduction factor rho and
the per-column cliff profile that splits coordinates into cruel (still
uniform mod q) and cool (reduced) regions."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from lweforge.core import centered_vec, uniform_std
from lweforge.dataset_io import Dataset
from lweforge.errors import EmptyDatasetError

log = logging.getLogger(__name__)

SAMPLE_CAP = 5000  # profile statistics use the first samples in manifest order


@dataclass
class CliffProfile:
    """Per-column stddev profile of centered RA with the uniform threshold."""

    n: int
    q: int
    sample_count: int
    col_std: np.ndarray  # (n,) float
    normalized: np.ndarray  # col_std / (q / sqrt(12))
    cruel_indices: np.ndarray  # columns with normalized > 1, strictly
    cool_indices: np.ndarray

    @property
    def cruel_count(self) -> int:
        return int(self.cruel_indices.shape[0])


@dataclass
class DatasetReport:
    n: int
    q: int
    omega: int
    m: int
    rho: float
    cruel_count: int
    batches: int
    total_samples: int
    samples_per_matrix: float
    capped_batches: int
    mean_wall_seconds: float

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "q": self.q,
            "omega": self.omega,
            "m": self.m,
            "rho": round(self.rho, 4),
            "cruel_count": self.cruel_count,
            "batches": self.batches,
            "total_samples": self.total_samples,
            "samples_per_matrix": round(self.samples_per_matrix, 1),
            "capped_batches": self.capped_batches,
            "mean_wall_seconds": round(self.mean_wall_seconds, 3),
        }

    def to_text(self) -> str:
        head = f"{'n':>6} {'q':>12} {'omega':>6} {'m':>6} {'rho':>8} {'cruel':>6} {'samp/mat':>9}"
        row = (
            f"{self.n:>6} {self.q:>12} {self.omega:>6} {self.m:>6} "
            f"{self.rho:>8.4f} {self.cruel_count:>6} {self.samples_per_matrix:>9.1f}"
        )
        extra = (
            f"batches={self.batches} total_samples={self.total_samples} "
            f"capped={self.capped_batches} mean_wall={self.mean_wall_seconds:.3f}s"
        )
        return "\n".join([head, row, extra])


def _collect(dataset: Dataset, sample_cap: Optional[int]):
    """Stack RA rows (capped) and the matching batches' A_sub rows."""
    ra_chunks = []
    a_chunks = []
    total = 0
    for batch in dataset.iter_batches():
        ra_chunks.append(batch.ra())
        a_chunks.append(batch.A_sub)
        total += ra_chunks[-1].shape[0]
        if sample_cap is not None and total >= sample_cap:
            break
    ra = np.concatenate(ra_chunks, axis=0)
    if sample_cap is not None:
        ra = ra[:sample_cap]
    return ra, np.concatenate(a_chunks, axis=0)


def cliff_profile(dataset: Dataset, sample_cap: Optional[int] = SAMPLE_CAP) -> CliffProfile:
    """Column stddev of centered RA against the uniform level q / sqrt(12)."""
    ra, _ = _collect(dataset, sample_cap)
    q = dataset.load_batch(dataset.batch_records[0]).q
    ra_c = centered_vec(ra, q).astype(np.float64)
    col_std = np.std(ra_c, axis=0)
    normalized = col_std / uniform_std(q)
    cruel = np.flatnonzero(normalized > 1.0)
    cool = np.flatnonzero(normalized <= 1.0)
    return CliffProfile(
        n=ra.shape[1],
        q=q,
        sample_count=ra.shape[0],
        col_std=col_std,
        normalized=normalized,
        cruel_indices=cruel,
        cool_indices=cool,
    )


def dataset_rho(dataset: Dataset, sample_cap: Optional[int] = SAMPLE_CAP) -> float:
    """Mean row std of centered RA over mean row std of the source A_sub rows."""
    ra, a_sub = _collect(dataset, sample_cap)
    q = dataset.load_batch(dataset.batch_records[0]).q
    ra_c = centered_vec(ra, q).astype(np.float64)
    a_c = centered_vec(a_sub, q).astype(np.float64)
    return float(np.mean(np.std(ra_c, axis=1)) / np.mean(np.std(a_c, axis=1)))


def report(dataset: Dataset, sample_cap: Optional[int] = SAMPLE_CAP) -> DatasetReport:
    records = dataset.batch_records
    if not records:
        raise EmptyDatasetError(f"{dataset.directory} has no batches")
    profile = cliff_profile(dataset, sample_cap)
    rho = dataset_rho(dataset, sample_cap)
    first = dataset.load_batch(records[0])
    total = sum(r["k"] for r in records)
    return DatasetReport(
        n=first.n,
        q=first.q,
        omega=first.omega,
        m=first.m,
        rho=rho,
        cruel_count=profile.cruel_count,
        batches=len(records),
        total_samples=total,
        samples_per_matrix=total / len(records),
        capped_batches=sum(1 for r in records if r.get("capped")),
        mean_wall_seconds=float(np.mean([r["wall_seconds"] for r in records])),
    )


def emit_figures(dataset: Dataset, out_dir) -> list[Path]:
    """Write rho_trace_<index>.csv per batch and cliff.csv for the profile.

    Floats are written with repr so parsing them back is bit-exact.
    """
    records = dataset.batch_records
    if not records:
        raise EmptyDatasetError(f"{dataset.directory} has no batches")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    missing = 0
    for rec in records:
        trace = rec.get("rho_trace", [])
        if not trace:
            missing += 1
            continue
        path = out / f"rho_trace_{rec['index']}.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["step", "rho"])
            for step, rho in enumerate(trace, start=1):
                w.writerow([step, repr(float(rho))])
        written.append(path)
    if missing:
        log.warning("%d batch(es) had no rho trace; their figures were skipped", missing)
    profile = cliff_profile(dataset)
    path = out / "cliff.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["column", "normalized_std"])
        for i, v in enumerate(profile.normalized):
            w.writerow([i, repr(float(v))])
    written.append(path)
    return written
