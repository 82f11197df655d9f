"""Shared fixtures: a noiseless toy workload produced through the primary
CLI and loaded back through this package's own format readers.

Everything imports salsa_baseline lazily so that collecting these tests in
an environment without the secondary package (or torch) skips instead of
erroring. The guards target a submodule (salsa_baseline.encoding) because
the bare source directory at the repo root satisfies a plain
`import salsa_baseline` as a namespace package even when nothing is
installed.
"""

import shutil
import subprocess
from pathlib import Path

import numpy as np
import pytest

TOY_MATRICES = 45
TOY_VAL_COUNT = 240


def _forge(*args) -> None:
    proc = subprocess.run(
        ["lwe-forge", *args], capture_output=True, text=True
    )
    if proc.returncode != 0:
        raise RuntimeError(f"lwe-forge {args[0]} failed: {proc.stderr.strip()}")


@pytest.fixture(scope="session")
def toy_chain():
    """Factory running gen + reduce for one toy seed and loading the pairs.

    The toy is the noiseless h=1 copy problem: binary secret of weight 1,
    sigma small enough that every rounded error is exactly zero, and an
    embedding weight of q so the reducer leaves RA uniform. Uniform tokens
    cover the whole circle, which the query probes later rely on.
    """
    pytest.importorskip("torch")
    pytest.importorskip("salsa_baseline.encoding")
    if shutil.which("lwe-forge") is None:
        pytest.skip("primary lwe-forge CLI is not installed")

    from salsa_baseline.data import load_pairs, read_instance_file

    def run(root: Path, seed: int, matrices: int = TOY_MATRICES) -> dict:
        root.mkdir(parents=True, exist_ok=True)
        _forge("gen", "--preset", "desk_n16", "--secret", "binary", "--h", "1",
               "--sigma", "0.01", "--seed", str(seed), "--out", str(root / "inst"))
        instance_path = root / "inst" / "instance.json"
        instance = read_instance_file(instance_path)
        q = instance["params"]["q"]
        _forge("reduce", "--instance", str(instance_path), "--m", "32",
               "--omega", str(q), "--tau", "0.9", "--max-steps", "2",
               "--beta", "8", "--matrices", str(matrices), "--workers", "4",
               "--seed", "1", "--out", str(root / "ds"))
        RA, Rb, q_read = load_pairs(root / "ds", instance["b"])
        assert q_read == q
        return {
            "instance_path": instance_path,
            "dataset_dir": root / "ds",
            "instance": instance,
            "RA": RA,
            "Rb": Rb,
            "q": q,
        }

    return run


@pytest.fixture(scope="session")
def toy_workspace(toy_chain, tmp_path_factory) -> dict:
    """One shared toy workload (seed 0) for the cheap tests."""
    return toy_chain(tmp_path_factory.mktemp("toy"), seed=0)


@pytest.fixture(scope="session")
def toy_trained(toy_workspace, tmp_path_factory) -> dict:
    """A model trained once on the shared workload, with its run directory."""
    import torch

    from salsa_baseline.model import ModelConfig
    from salsa_baseline.train import split_pairs, train

    torch.set_num_threads(4)
    out = tmp_path_factory.mktemp("toy_run")
    RA, Rb = toy_workspace["RA"], toy_workspace["Rb"]
    tr_RA, tr_Rb, va_RA, va_Rb = split_pairs(RA, Rb, TOY_VAL_COUNT, seed=0)
    result = train(
        (tr_RA, tr_Rb), (va_RA, va_Rb), toy_workspace["q"],
        ModelConfig.desk(), out, epochs=150, seed=0, target_val_loss=0.02,
    )
    return {
        "result": result,
        "out": out,
        "val": (va_RA, va_Rb),
        "train": (tr_RA, tr_Rb),
    }
