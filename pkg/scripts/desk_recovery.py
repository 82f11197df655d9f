"""End-to-end desk-scale recovery: pool, reduced dataset, profile, attack.

Runs the whole chain on one machine in a few minutes and prints a stage-by-
stage summary. The dataset directory is resumable, so re-running with the
same arguments reuses finished batches.

    python3 scripts/desk_recovery.py --out runs/desk32
    python3 scripts/desk_recovery.py --preset desk_n16 --secret ternary --h 3
"""

import argparse
import sys
import time
from pathlib import Path

from lweforge.attack import AttackConfig, attack
from lweforge.core import gen_instance, verify_secret
from lweforge.dataset_io import write_instance
from lweforge.pipeline import produce_dataset
from lweforge.presets import PRESETS, get_preset
from lweforge.stats import cliff_profile, report


def parse_args(argv):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--preset", default="desk_n32", choices=sorted(PRESETS))
    ap.add_argument("--secret", default="binary", choices=["binary", "ternary"])
    ap.add_argument("--h", type=int, default=4, help="secret Hamming weight")
    ap.add_argument("--matrices", type=int, default=20)
    ap.add_argument("--workers", type=int, default=4)
    ap.add_argument("--seed", type=int, default=7, help="instance seed")
    ap.add_argument("--job-seed", type=int, default=0)
    ap.add_argument("--brute-samples", type=int, default=32,
                    help="rows reserved for scoring cruel guesses")
    ap.add_argument("--out", default="runs/desk_recovery")
    return ap.parse_args(argv)


def main(argv=None):
    args = parse_args(argv)
    preset = get_preset(args.preset)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    params = preset.params(secret_dist=args.secret, hamming_weight=args.h)
    instance = gen_instance(params, args.seed)
    write_instance(out / "instance.json", instance)
    print(f"[gen] n={params.n} q={params.q} {args.secret} h={args.h} "
          f"pool={params.pool_size} seed={args.seed}")

    t0 = time.perf_counter()
    config = preset.job_config(
        matrices=args.matrices, workers=args.workers, seed=args.job_seed,
        params=params,
    )
    dataset = produce_dataset(instance, config, out / "dataset")
    print(f"[reduce] {args.matrices} matrices, m={config.m}, tau={config.tau}, "
          f"{time.perf_counter() - t0:.1f}s on {args.workers} workers")

    rep = report(dataset)
    print("[stats]")
    print(rep.to_text())

    profile = cliff_profile(dataset)
    t1 = time.perf_counter()
    result = attack(
        dataset, instance, profile,
        AttackConfig(brute_samples=args.brute_samples),
    )
    print(f"[attack] cruel={len(profile.cruel_indices)} "
          f"candidates={result.candidates_tried} verified={result.verified} "
          f"{time.perf_counter() - t1:.1f}s")

    if not result.succeeded:
        print(f"[attack] FAILED, best residual_std={result.residual_std:.2f}")
        return 3
    check = verify_secret(instance.A, instance.b, result.recovered_s, params)
    exact = bool((result.recovered_s == instance.s).all())
    print(f"[verify] accepted={check.accepted} "
          f"residual_std={check.residual_std:.3f} exact={exact}")
    (out / "recovered.json").write_text(result.to_json())
    return 0


if __name__ == "__main__":
    sys.exit(main())
