"""Sweep the embedding weight omega and tabulate its tradeoff.

Small omega lets the reducer shrink RA further (lower rho) at the price of
larger R entries, which amplify the error term R@e; large omega keeps R tame
but stalls the reduction. This script reduces one fixed pool at several
omega values and reports rho, the cruel column count, and the measured
error amplification std(R@e)/std(e) for each.

    python3 scripts/omega_sweep.py --out runs/omega_sweep
"""

import argparse
import csv
import sys
import time
from pathlib import Path

import numpy as np

from lweforge.core import gen_instance
from lweforge.pipeline import produce_dataset
from lweforge.presets import get_preset
from lweforge.stats import cliff_profile, dataset_rho


def error_amplification(dataset, instance) -> float:
    """Pooled std of R@e over the std of the raw error vector."""
    chunks = [batch.R @ instance.e[batch.indices] for batch in dataset.iter_batches()]
    amplified = np.concatenate(chunks).astype(np.float64)
    return float(amplified.std() / instance.e.astype(np.float64).std())


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--preset", default="desk_n16")
    ap.add_argument("--omegas", type=int, nargs="+", default=[1, 2, 4, 10, 25, 60])
    ap.add_argument("--matrices", type=int, default=6)
    ap.add_argument("--workers", type=int, default=4)
    ap.add_argument("--seed", type=int, default=11, help="instance seed")
    ap.add_argument("--out", default="runs/omega_sweep")
    args = ap.parse_args(argv)

    preset = get_preset(args.preset)
    params = preset.params(hamming_weight=3)
    instance = gen_instance(params, args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    rows = []
    print(f"{'omega':>6} {'rho':>8} {'cruel':>6} {'amp':>8} {'secs':>7}")
    for omega in args.omegas:
        config = preset.job_config(
            matrices=args.matrices, workers=args.workers, params=params,
            omega=omega, tau=0.01,  # unreachable target: run to the step cap
        )
        t0 = time.perf_counter()
        dataset = produce_dataset(instance, config, out / f"omega_{omega}")
        secs = time.perf_counter() - t0
        rho = dataset_rho(dataset)
        cruel = len(cliff_profile(dataset).cruel_indices)
        amp = error_amplification(dataset, instance)
        rows.append({"omega": omega, "rho": rho, "cruel_count": cruel,
                     "error_amplification": amp, "wall_seconds": secs})
        print(f"{omega:>6} {rho:>8.4f} {cruel:>6} {amp:>8.2f} {secs:>7.1f}")

    with (out / "sweep.csv").open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)
    print(f"wrote {out / 'sweep.csv'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
