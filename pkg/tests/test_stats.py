"""Statistics tests: cliff profiles, dataset rho, reports, figure CSVs.

Synthetic datasets are built by hand so every column statistic is known in
advance: with A_sub = [I_n; noise] and R = [T | 0], the derived RA equals
T mod q exactly, which lets us prescribe the centered sample values.
"""

import csv
import math

import numpy as np
import pytest

from lweforge.core import LweParams, centered_vec, gen_instance, uniform_std
from lweforge.dataset_io import (
    Dataset,
    ReducedBatch,
    batch_filename,
    read_manifest,
    write_batch_file,
    write_manifest,
)
from lweforge.errors import EmptyDatasetError
from lweforge.pipeline import ReductionJobConfig, produce_dataset
from lweforge.reduction import ReducerSpec
from lweforge.stats import (
    SAMPLE_CAP,
    cliff_profile,
    dataset_rho,
    emit_figures,
    report,
)

Q = 1031


def planted_dataset(tmp_path, targets, q=Q, noise_rows=24, seed=3, traces=None):
    """Write a dataset whose RA values equal the given centered targets.

    targets: list of (k_i, n) int arrays, one per batch, entries in
    (-q/2, q/2]. Every batch shares one A_sub = [I_n; uniform noise].
    """
    tmp_path.mkdir(parents=True, exist_ok=True)
    n = targets[0].shape[1]
    rng = np.random.default_rng(seed)
    A_sub = np.vstack(
        [np.eye(n, dtype=np.int64), rng.integers(0, q, size=(noise_rows, n), dtype=np.int64)]
    )
    m = A_sub.shape[0]
    records = []
    for i, T in enumerate(targets):
        R = np.hstack([T, np.zeros((T.shape[0], m - n), dtype=np.int64)])
        batch = ReducedBatch(
            index=i,
            n=n,
            m=m,
            q=q,
            omega=10,
            seed=seed + i,
            A_sub=A_sub,
            R=R,
            indices=np.arange(m, dtype=np.int64),
            rho=0.0,
            wall_seconds=0.0,
        )
        write_batch_file(tmp_path / batch_filename(i), batch)
        records.append(
            {
                "index": i,
                "k": int(T.shape[0]),
                "rho": 0.0,
                "wall_seconds": 0.25,
                "indices": list(range(m)),
                "rho_trace": list(traces[i]) if traces else [],
            }
        )
    write_manifest(tmp_path, {"config": {}, "batches": records})
    return Dataset(tmp_path)


def wide_column(k, q=Q):
    """Alternating +-(q // 2): std is q // 2, well above q / sqrt(12)."""
    half = q // 2
    col = np.full(k, half, dtype=np.int64)
    col[1::2] = -half
    return col


class TestCliffProfile:
    def test_planted_split_is_exact(self, tmp_path):
        k, n = 40, 6
        T = np.zeros((k, n), dtype=np.int64)
        for j in (1, 4):
            T[:, j] = wide_column(k)
        T[:, 0] = np.arange(k) % 2  # std 0.5, far below the threshold
        ds = planted_dataset(tmp_path, [T])
        prof = cliff_profile(ds)
        np.testing.assert_array_equal(prof.cruel_indices, [1, 4])
        np.testing.assert_array_equal(prof.cool_indices, [0, 2, 3, 5])
        assert prof.cruel_count == 2
        assert prof.sample_count == k
        assert prof.q == Q

    def test_column_std_values(self, tmp_path):
        k = 50
        T = np.zeros((k, 3), dtype=np.int64)
        T[:, 1] = wide_column(k)
        ds = planted_dataset(tmp_path, [T])
        prof = cliff_profile(ds)
        assert prof.col_std[0] == 0.0
        assert prof.col_std[1] == pytest.approx(Q // 2)
        assert prof.normalized[1] == pytest.approx((Q // 2) / uniform_std(Q))

    def test_threshold_is_strict(self, tmp_path, monkeypatch):
        # Pin the uniform level to the planted std so normalized == 1.0
        # exactly; a column sitting right at the level must count as cool.
        k = 32
        T = np.zeros((k, 2), dtype=np.int64)
        T[:, 1] = wide_column(k)
        ds = planted_dataset(tmp_path, [T])
        monkeypatch.setattr("lweforge.stats.uniform_std", lambda q: float(Q // 2))
        prof = cliff_profile(ds)
        assert prof.normalized[1] == 1.0
        assert prof.cruel_count == 0
        np.testing.assert_array_equal(prof.cool_indices, [0, 1])

    def test_sample_cap_limits_rows(self, tmp_path):
        # Batch 0 is all-cool, batch 1 all-cruel; the cap keeps only batch 0.
        k, n = 30, 4
        cool = np.zeros((k, n), dtype=np.int64)
        cruel = np.column_stack([wide_column(k) for _ in range(n)])
        ds = planted_dataset(tmp_path, [cool, cruel])
        prof = cliff_profile(ds, sample_cap=k)
        assert prof.sample_count == k
        assert prof.cruel_count == 0
        full = cliff_profile(ds, sample_cap=None)
        assert full.sample_count == 2 * k
        assert full.cruel_count == n

    def test_uncentered_values_are_centered_first(self, tmp_path):
        # Targets near q-1 are small negatives once centered, not huge stds.
        k = 20
        T = np.zeros((k, 2), dtype=np.int64)
        T[::2, 0] = -1  # stored in R, surfaces as q-1 in RA
        ds = planted_dataset(tmp_path, [T])
        prof = cliff_profile(ds)
        assert prof.cruel_count == 0
        assert prof.col_std[0] == pytest.approx(0.5)


class TestDatasetRho:
    def test_identity_r_gives_one(self, tmp_path):
        rng = np.random.default_rng(0)
        q = Q
        A_sub = rng.integers(0, q, size=(12, 5), dtype=np.int64)
        batch = ReducedBatch(
            index=0, n=5, m=12, q=q, omega=10, seed=0,
            A_sub=A_sub, R=np.eye(12, dtype=np.int64),
            indices=np.arange(12, dtype=np.int64), rho=1.0, wall_seconds=0.0,
        )
        write_batch_file(tmp_path / batch_filename(0), batch)
        write_manifest(tmp_path, {"config": {}, "batches": [{
            "index": 0, "k": 12, "rho": 1.0, "wall_seconds": 0.0,
            "indices": list(range(12)),
        }]})
        assert dataset_rho(Dataset(tmp_path)) == pytest.approx(1.0, abs=1e-12)

    def test_monotone_in_planted_amplitude(self, tmp_path):
        """Narrower planted samples must give strictly smaller rho and a
        cruel region that only ever shrinks."""
        k, n = 60, 8
        rng = np.random.default_rng(11)
        levels = []
        for amp in (Q // 2, Q // 8, Q // 64):
            if amp == Q // 2:
                # checkerboard of +-amp: every column and every row has std amp
                phase = np.add.outer(np.arange(k), np.arange(n)) % 2
                T = np.where(phase == 0, amp, -amp).astype(np.int64)
            else:
                T = rng.integers(-amp, amp + 1, size=(k, n), dtype=np.int64)
            levels.append(T)
        rhos, cruel = [], []
        for i, T in enumerate(levels):
            d = tmp_path / f"level{i}"
            d.mkdir()
            ds = planted_dataset(d, [T], seed=5)
            rhos.append(dataset_rho(ds))
            cruel.append(cliff_profile(ds).cruel_count)
        assert rhos[0] > rhos[1] > rhos[2]
        assert cruel == [n, 0, 0]

    def test_matches_per_batch_rho_on_real_reduction(self, tmp_path):
        params = LweParams.from_logq(16, 10)
        config = ReductionJobConfig(
            params=params, m=20, tau=0.6,
            fast=ReducerSpec(kind="lll", delta=0.99),
            strong=ReducerSpec(kind="bkz", beta=8),
            matrices=2, workers=1, seed=5, max_steps=10,
        )
        ds = produce_dataset(gen_instance(params, seed=1), config, tmp_path)
        recorded = [rec["rho"] for rec in ds.batch_records]
        assert dataset_rho(ds) == pytest.approx(float(np.mean(recorded)), abs=0.02)


class TestReport:
    def test_fields_and_rounding(self, tmp_path):
        k, n = 24, 4
        T = np.zeros((k, n), dtype=np.int64)
        T[:, 0] = wide_column(k)
        ds = planted_dataset(tmp_path, [T, T], traces=[[1.0, 0.4], [1.0, 0.5]])
        rep = report(ds)
        assert rep.n == n
        assert rep.q == Q
        assert rep.batches == 2
        assert rep.total_samples == 2 * k
        assert rep.samples_per_matrix == pytest.approx(k)
        assert rep.cruel_count == 1
        assert rep.mean_wall_seconds == pytest.approx(0.25)
        d = rep.to_dict()
        assert d["rho"] == round(rep.rho, 4)
        text = rep.to_text()
        assert f"{rep.rho:.4f}" in text
        assert "cruel" in text

    def test_empty_dataset_raises(self, tmp_path):
        write_manifest(tmp_path, {"config": {}, "batches": []})
        with pytest.raises(EmptyDatasetError):
            report(Dataset(tmp_path))


class TestEmitFigures:
    def test_csv_round_trip_is_bit_exact(self, tmp_path):
        k, n = 16, 3
        T = np.zeros((k, n), dtype=np.int64)
        T[:, 2] = wide_column(k)
        traces = [[1.0, 0.7071067811865476, 0.3333333333333333], [0.9, 0.1]]
        ds = planted_dataset(tmp_path / "data", [T, T], traces=traces)
        written = emit_figures(ds, tmp_path / "figures")
        names = sorted(p.name for p in written)
        assert names == ["cliff.csv", "rho_trace_0.csv", "rho_trace_1.csv"]

        for i, trace in enumerate(traces):
            with (tmp_path / "figures" / f"rho_trace_{i}.csv").open() as fh:
                rows = list(csv.reader(fh))
            assert rows[0] == ["step", "rho"]
            got = [float(r[1]) for r in rows[1:]]
            assert got == trace
            assert [int(r[0]) for r in rows[1:]] == list(range(1, len(trace) + 1))

        prof = cliff_profile(ds)
        with (tmp_path / "figures" / "cliff.csv").open() as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["column", "normalized_std"]
        got = np.array([float(r[1]) for r in rows[1:]])
        np.testing.assert_array_equal(got, prof.normalized)

    def test_traceless_batches_are_skipped(self, tmp_path):
        k = 10
        T = np.zeros((k, 2), dtype=np.int64)
        ds = planted_dataset(tmp_path / "data", [T, T], traces=[[], [1.0, 0.5]])
        written = emit_figures(ds, tmp_path / "figures")
        names = sorted(p.name for p in written)
        assert names == ["cliff.csv", "rho_trace_1.csv"]

    def test_empty_dataset_raises(self, tmp_path):
        (tmp_path / "data").mkdir()
        write_manifest(tmp_path / "data", {"config": {}, "batches": []})
        with pytest.raises(EmptyDatasetError):
            emit_figures(Dataset(tmp_path / "data"), tmp_path / "figures")


def test_default_sample_cap_is_5000():
    assert SAMPLE_CAP == 5000
