"""Independent readers for lweforge dataset directories.

Implements the byte layouts from the primary package's
docs/dataset_format.txt from scratch: batch files (magic "TAPA", version 1),
the manifest, and instance files. Training pairs (RA, Rb) are derived here
from the stored (A_sub, R) and a b vector, which is what lets one reduced
dataset serve any secret over the same pool.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

_HEADER = struct.Struct("<4sIIIIQQQ")
_MAGIC = b"TAPA"
_VERSION = 1

# int64 matmuls stay exact while m * q**2 < 2**63; every desk and published
# q <= 2**41 dataset with m <= 2**20 / q is inside it, and the toy scales
# used here are far inside it.
_EXACT_Q_LIMIT = 1 << 24


class DataFormatError(Exception):
    pass


@dataclass
class Batch:
    index: int
    n: int
    m: int
    k: int
    q: int
    omega: int
    seed: int
    A_sub: np.ndarray  # (m, n) int64
    R: np.ndarray  # (k, m) int64
    indices: np.ndarray  # (m,) int64, rows of the pool


def read_batch_file(path) -> dict:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise DataFormatError(f"{path}: truncated header")
    magic, version, n, m, k, q, omega, seed = _HEADER.unpack_from(raw)
    if magic != _MAGIC:
        raise DataFormatError(f"{path}: bad magic {magic!r}")
    if version != _VERSION:
        raise DataFormatError(f"{path}: unsupported version {version}")
    if len(raw) != _HEADER.size + 8 * m * n + 8 * k * m:
        raise DataFormatError(f"{path}: wrong file size")
    A_sub = np.frombuffer(raw, dtype="<u8", count=m * n, offset=_HEADER.size)
    R = np.frombuffer(raw, dtype="<i8", count=k * m, offset=_HEADER.size + 8 * m * n)
    return {
        "n": n, "m": m, "k": k, "q": q, "omega": omega, "seed": seed,
        "A_sub": A_sub.reshape(m, n).astype(np.int64),
        "R": R.reshape(k, m).astype(np.int64),
    }


def read_manifest(dataset_dir) -> dict:
    path = Path(dataset_dir) / "manifest.json"
    if not path.exists():
        raise DataFormatError(f"no manifest.json in {dataset_dir}")
    return json.loads(path.read_text())


def read_instance_file(path) -> dict:
    """Instance JSON as plain numpy arrays; s and e may be None."""
    doc = json.loads(Path(path).read_text())
    if doc.get("format") != "lwe-instance" or doc.get("version") != 1:
        raise DataFormatError(f"{path}: not a version-1 lwe-instance file")
    out = {
        "params": doc["params"],
        "seed": doc["seed"],
        "A": np.array(doc["A"], dtype=np.int64),
        "b": np.array(doc["b"], dtype=np.int64),
        "s": None if doc["s"] is None else np.array(doc["s"], dtype=np.int64),
        "e": None if doc["e"] is None else np.array(doc["e"], dtype=np.int64),
    }
    return out


def load_batches(dataset_dir) -> list[Batch]:
    """Every batch in manifest order, header fields cross-checked."""
    dataset_dir = Path(dataset_dir)
    manifest = read_manifest(dataset_dir)
    batches = []
    for record in sorted(manifest.get("batches", []), key=lambda r: r["index"]):
        parsed = read_batch_file(dataset_dir / f"batch_{record['index']}.bin")
        if parsed["k"] != record["k"]:
            raise DataFormatError(f"batch {record['index']}: k mismatch with manifest")
        batches.append(Batch(
            index=record["index"],
            indices=np.array(record["indices"], dtype=np.int64),
            **{key: parsed[key] for key in ("n", "m", "k", "q", "omega", "seed",
                                            "A_sub", "R")},
        ))
    if not batches:
        raise DataFormatError(f"{dataset_dir} has no batches")
    return batches


def _matmul_mod(R: np.ndarray, right: np.ndarray, q: int) -> np.ndarray:
    if q >= _EXACT_Q_LIMIT:
        return np.asarray((R.astype(object) % q) @ (right.astype(object) % q) % q,
                          dtype=np.int64)
    return ((R % q) @ (right % q)) % q


def batch_ra(batch: Batch) -> np.ndarray:
    return _matmul_mod(batch.R, batch.A_sub, batch.q)


def batch_rb(batch: Batch, b: np.ndarray) -> np.ndarray:
    """R @ b restricted to the batch's subsampled pool rows, mod q."""
    return _matmul_mod(batch.R, np.asarray(b, dtype=np.int64)[batch.indices], batch.q)


def materialize_b(A: np.ndarray, s: np.ndarray, q: int) -> np.ndarray:
    """Noiseless pool targets b = A @ s mod q for a chosen secret."""
    return _matmul_mod(np.asarray(A, dtype=np.int64), np.asarray(s, dtype=np.int64), q)


def load_pairs(dataset_dir, b: np.ndarray) -> tuple[np.ndarray, np.ndarray, int]:
    """Stacked (RA, Rb, q) over all batches, rows in manifest order."""
    batches = load_batches(dataset_dir)
    q = batches[0].q
    RA = np.concatenate([batch_ra(batch) for batch in batches], axis=0)
    Rb = np.concatenate([batch_rb(batch, b) for batch in batches], axis=0)
    return RA, Rb, q
