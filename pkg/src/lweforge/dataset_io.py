"""Serialization for reduced-batch datasets: binary batch files plus a JSON
manifest. The byte layout is documented in docs/dataset_format.txt and is the
stable interface other tools consume.

All writes go through a temp-file-then-rename so readers never observe a
partially written artifact.
"""

from __future__ import annotations

import json
import os
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional

import numpy as np

from lweforge.errors import EmptyDatasetError, FormatError

MAGIC = b"TAPA"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIIIIQQQ")  # magic, version, n, m, k, q, omega, seed

MANIFEST_NAME = "manifest.json"


def batch_filename(index: int) -> str:
    return f"batch_{index}.bin"


@dataclass
class ReducedBatch:
    """One reduced matrix worth of samples plus its provenance.

    Only (A_sub, R) are stored on disk; RA and Rb are derived on demand so a
    dataset can be re-targeted to any secret sharing the same pool.
    """

    index: int
    n: int
    m: int
    q: int
    omega: int
    seed: int
    A_sub: np.ndarray  # (m, n) int64 in [0, q)
    R: np.ndarray  # (k, m) int64
    indices: np.ndarray  # (m,) int64 rows of the pool that were subsampled
    rho: float
    wall_seconds: float
    steps: int = 0
    capped: bool = False
    stop_reason: str = "tau"
    rho_trace: list = field(default_factory=list)
    switch_steps: list = field(default_factory=list)

    @property
    def k(self) -> int:
        return self.R.shape[0]

    def ra(self) -> np.ndarray:
        """RA = R @ A_sub mod q, exact."""
        from lweforge.core import matmul_mod

        return matmul_mod(self.R, self.A_sub, self.q)


def write_batch_file(path: Path, batch: ReducedBatch) -> None:
    """Serialize header + A_sub + R little-endian, atomically."""
    m, n = batch.A_sub.shape
    k = batch.R.shape[0]
    if batch.R.shape != (k, m):
        raise FormatError(f"R has shape {batch.R.shape}, expected ({k}, {m})")
    payload = bytearray()
    payload += _HEADER.pack(MAGIC, FORMAT_VERSION, n, m, k, batch.q, batch.omega, batch.seed)
    payload += np.ascontiguousarray(batch.A_sub, dtype="<u8").tobytes()
    payload += np.ascontiguousarray(batch.R, dtype="<i8").tobytes()
    _atomic_write_bytes(path, bytes(payload))


def read_batch_file(path: Path) -> dict:
    """Parse one batch file; returns header fields plus A_sub and R arrays."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise FormatError(f"{path}: truncated header")
    magic, version, n, m, k, q, omega, seed = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    expect = _HEADER.size + 8 * m * n + 8 * k * m
    if len(raw) != expect:
        raise FormatError(f"{path}: size {len(raw)} != expected {expect}")
    off = _HEADER.size
    A_sub = np.frombuffer(raw, dtype="<u8", count=m * n, offset=off).reshape(m, n)
    off += 8 * m * n
    R = np.frombuffer(raw, dtype="<i8", count=k * m, offset=off).reshape(k, m)
    if A_sub.size and int(A_sub.max()) >= q:
        raise FormatError(f"{path}: A_sub entry out of range [0, q)")
    return {
        "n": n,
        "m": m,
        "k": k,
        "q": q,
        "omega": omega,
        "seed": seed,
        "A_sub": A_sub.astype(np.int64),
        "R": R.astype(np.int64),
    }


def _atomic_write_bytes(path: Path, data: bytes) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def _atomic_write_text(path: Path, text: str) -> None:
    _atomic_write_bytes(path, text.encode("utf-8"))


def canonical_json(obj) -> str:
    """Sorted keys, fixed separators, trailing newline: byte-stable output."""
    return json.dumps(obj, sort_keys=True, separators=(",", ": "), indent=1) + "\n"


def dump_manifest(manifest: dict) -> str:
    return canonical_json(manifest)


def write_manifest(dataset_dir: Path, manifest: dict) -> None:
    manifest = dict(manifest)
    manifest["batches"] = sorted(manifest.get("batches", []), key=lambda b: b["index"])
    _atomic_write_text(Path(dataset_dir) / MANIFEST_NAME, dump_manifest(manifest))


def read_manifest(dataset_dir: Path) -> dict:
    path = Path(dataset_dir) / MANIFEST_NAME
    if not path.exists():
        raise FormatError(f"no {MANIFEST_NAME} in {dataset_dir}")
    with path.open() as fh:
        return json.load(fh)


INSTANCE_FORMAT = "lwe-instance"
INSTANCE_VERSION = 1


def write_instance(path, instance, include_secret: bool = True) -> None:
    """Serialize an instance pool as canonical JSON, atomically.

    With include_secret=False the planted s and e are omitted, leaving a
    blind instance suitable for attack exercises.
    """
    from dataclasses import asdict

    keep = include_secret and instance.s is not None
    doc = {
        "format": INSTANCE_FORMAT,
        "version": INSTANCE_VERSION,
        "params": asdict(instance.params),
        "seed": instance.seed,
        "A": instance.A.tolist(),
        "b": instance.b.tolist(),
        "s": instance.s.tolist() if keep else None,
        "e": instance.e.tolist() if keep else None,
    }
    _atomic_write_text(Path(path), canonical_json(doc))


def read_instance(path):
    """Parse an instance file back into a validated LweInstance."""
    from lweforge.core import LweInstance, LweParams

    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON ({exc})") from exc
    if doc.get("format") != INSTANCE_FORMAT:
        raise FormatError(f"{path}: not an instance file")
    if doc.get("version") != INSTANCE_VERSION:
        raise FormatError(f"{path}: unsupported instance version {doc.get('version')!r}")
    try:
        params = LweParams(**doc["params"])
        instance = LweInstance(
            params=params,
            seed=int(doc["seed"]),
            A=np.array(doc["A"], dtype=np.int64),
            b=np.array(doc["b"], dtype=np.int64),
            s=None if doc["s"] is None else np.array(doc["s"], dtype=np.int64),
            e=None if doc["e"] is None else np.array(doc["e"], dtype=np.int64),
        )
    except (KeyError, TypeError) as exc:
        raise FormatError(f"{path}: malformed instance file ({exc})") from exc
    try:
        instance.validate()
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    return instance


class Dataset:
    """Read-side view of a dataset directory."""

    def __init__(self, directory):
        self.directory = Path(directory)
        self.manifest = read_manifest(self.directory)

    @property
    def config(self) -> dict:
        return self.manifest.get("config", {})

    @property
    def batch_records(self) -> list:
        return sorted(self.manifest.get("batches", []), key=lambda b: b["index"])

    def __len__(self) -> int:
        return len(self.batch_records)

    def load_batch(self, record: dict) -> ReducedBatch:
        parsed = read_batch_file(self.directory / batch_filename(record["index"]))
        if parsed["k"] != record["k"]:
            raise FormatError(
                f"batch {record['index']}: k mismatch between manifest and file"
            )
        return ReducedBatch(
            index=record["index"],
            n=parsed["n"],
            m=parsed["m"],
            q=parsed["q"],
            omega=parsed["omega"],
            seed=parsed["seed"],
            A_sub=parsed["A_sub"],
            R=parsed["R"],
            indices=np.array(record["indices"], dtype=np.int64),
            rho=record["rho"],
            wall_seconds=record["wall_seconds"],
            steps=record.get("steps", 0),
            capped=record.get("capped", False),
            stop_reason=record.get("stop_reason", "tau"),
            rho_trace=record.get("rho_trace", []),
            switch_steps=record.get("switch_steps", []),
        )

    def iter_batches(self) -> Iterator[ReducedBatch]:
        records = self.batch_records
        if not records:
            raise EmptyDatasetError(f"{self.directory} has no batches")
        for record in records:
            yield self.load_batch(record)

    def stacked_ra(self, sample_cap: Optional[int] = None) -> np.ndarray:
        """RA rows concatenated in manifest order, truncated at sample_cap."""
        chunks = []
        total = 0
        for batch in self.iter_batches():
            chunks.append(batch.ra())
            total += chunks[-1].shape[0]
            if sample_cap is not None and total >= sample_cap:
                break
        out = np.concatenate(chunks, axis=0)
        return out[:sample_cap] if sample_cap is not None else out
