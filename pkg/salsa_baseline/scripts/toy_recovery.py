"""One full pass of the baseline on the noiseless weight-1 toy problem.

Generates the pool and the reduced dataset through the lwe-forge CLI, loads
the pairs back through this package's own readers, trains the desk-scale
model, and recovers the planted secret with basis-vector queries.

    python3 scripts/toy_recovery.py --seed 3 --out runs/toy3
"""

import argparse
import subprocess
import sys
import time
from pathlib import Path

import torch

from salsa_baseline.data import load_pairs, read_instance_file
from salsa_baseline.model import ModelConfig
from salsa_baseline.recover import attempt_recovery
from salsa_baseline.train import split_pairs, train


def forge(*args):
    subprocess.run(["lwe-forge", *args], check=True)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--matrices", type=int, default=45)
    ap.add_argument("--epochs", type=int, default=150)
    ap.add_argument("--threads", type=int, default=4)
    ap.add_argument("--out", default="runs/toy")
    args = ap.parse_args(argv)

    torch.set_num_threads(args.threads)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    forge("gen", "--preset", "desk_n16", "--secret", "binary", "--h", "1",
          "--sigma", "0.01", "--seed", str(args.seed), "--out", str(out / "inst"))
    instance_path = out / "inst" / "instance.json"
    instance = read_instance_file(instance_path)
    q = instance["params"]["q"]
    forge("reduce", "--instance", str(instance_path), "--m", "32",
          "--omega", str(q), "--tau", "0.9", "--max-steps", "2", "--beta", "8",
          "--matrices", str(args.matrices), "--workers", "4", "--seed", "1",
          "--out", str(out / "ds"))

    RA, Rb, _ = load_pairs(out / "ds", instance["b"])
    print(f"[data] {RA.shape[0]} pairs of length {RA.shape[1]}, q={q}")
    tr_RA, tr_Rb, va_RA, va_Rb = split_pairs(RA, Rb, val_count=240, seed=args.seed)

    t0 = time.perf_counter()
    result = train(
        (tr_RA, tr_Rb), (va_RA, va_Rb), q, ModelConfig.desk(),
        out / "run", epochs=args.epochs, seed=args.seed, target_val_loss=0.02,
    )
    final = result.final
    print(f"[train] {len(result.history)} epochs in {time.perf_counter()-t0:.0f}s  "
          f"val_loss={final['val_loss']:.4f} baseline={result.baseline_loss:.3f} "
          f"advantage={final['advantage']:.3f}")

    outcome = attempt_recovery(result.model, q, instance_path)
    exact = bool((outcome["candidate"] == instance["s"]).all())
    print(f"[recover] candidate={outcome['candidate'].tolist()}")
    print(f"[verify] accepted={outcome['accepted']} "
          f"residual_std={outcome['residual_std']:.4f} exact={exact}")
    return 0 if outcome["accepted"] and exact else 3


if __name__ == "__main__":
    sys.exit(main())
