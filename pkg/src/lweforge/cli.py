"""Command-line front end: generate instance pools, reduce them into
datasets, report statistics, run the recovery attack, and verify candidates.

Every artifact-producing run writes a run.json with all effective parameters
(defaults materialized). `--from-run path/to/run.json` replays such a log:
stored values fill any flag not given explicitly, so a bare replay reproduces
the original outputs byte for byte, timing fields aside.

Exit codes: 0 success, 1 usage error, 2 data/format error, 3 negative
cryptanalytic result (attack found nothing, or verify rejected).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from lweforge.attack import AttackConfig, attack
from lweforge.core import gen_instance, nextprime_pow2, verify_secret
from lweforge.core import LweParams
from lweforge.dataset_io import (
    Dataset,
    canonical_json,
    read_instance,
    write_instance,
)
from lweforge.errors import ForgeError, FormatError
from lweforge.pipeline import (
    DEFAULT_MAX_SECONDS,
    DEFAULT_MAX_STEPS,
    ReductionJobConfig,
    produce_dataset,
)
from lweforge.presets import PRESETS, get_preset
from lweforge.reduction import ReducerSpec
from lweforge.stats import SAMPLE_CAP, cliff_profile, emit_figures, report

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NEGATIVE = 3

RUN_LOG_NAME = "run.json"
INSTANCE_NAME = "instance.json"
WORKERS_ENV = "LWE_FORGE_WORKERS"

log = logging.getLogger(__name__)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as exceptions, not sys.exit(2)."""

    def error(self, message):
        raise _UsageError(message)


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _write_run_log(out_dir: Path, command: str, parameters: dict) -> None:
    doc = {"command": command, "parameters": parameters, "created": _utc_now()}
    (out_dir / RUN_LOG_NAME).write_text(canonical_json(doc))


def _apply_from_run(args) -> None:
    """Fill every unset flag from a previous run.json; given flags win."""
    if getattr(args, "from_run", None) is None:
        return
    path = Path(args.from_run)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON ({exc})") from exc
    if doc.get("command") != args.command:
        raise _UsageError(
            f"{path} records a {doc.get('command')!r} run, not {args.command!r}"
        )
    for key, value in doc.get("parameters", {}).items():
        if getattr(args, key, None) is None:
            setattr(args, key, value)


def _require_out(args) -> Path:
    if args.out is None:
        raise _UsageError("--out is required")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _preset_or_usage(name):
    try:
        return get_preset(name)
    except KeyError as exc:
        raise _UsageError(exc.args[0]) from exc


def _resolve_q(args, preset) -> int:
    if args.q is not None and args.logq is not None:
        raise _UsageError("--q and --logq are mutually exclusive")
    if args.q is not None:
        return args.q
    if args.logq is not None:
        return nextprime_pow2(args.logq)
    if preset is not None:
        return nextprime_pow2(preset.logq)
    raise _UsageError("one of --q, --logq, or --preset is required")


def _effective_params(args) -> LweParams:
    preset = _preset_or_usage(args.preset) if args.preset is not None else None
    n = args.n if args.n is not None else (preset.n if preset else None)
    if n is None:
        raise _UsageError("--n or --preset is required")
    q = _resolve_q(args, preset)
    try:
        return LweParams(
            n=n,
            q=q,
            secret_dist=args.secret if args.secret is not None else "binary",
            hamming_weight=args.h,
            error_dist=args.error_dist if args.error_dist is not None else "gaussian",
            sigma=args.sigma if args.sigma is not None else 3.2,
            eta=args.eta if args.eta is not None else 3,
        )
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc


def cmd_gen(args) -> int:
    params = _effective_params(args)
    seed = args.seed if args.seed is not None else 0
    no_secret = bool(args.no_secret)
    out = _require_out(args)
    instance = gen_instance(params, seed)
    write_instance(out / INSTANCE_NAME, instance, include_secret=not no_secret)
    _write_run_log(out, "gen", {
        "preset": args.preset,
        "n": params.n,
        "logq": None,
        "q": params.q,
        "secret": params.secret_dist,
        "h": params.hamming_weight,
        "error_dist": params.error_dist,
        "sigma": params.sigma,
        "eta": params.eta,
        "seed": seed,
        "no_secret": no_secret,
        "out": str(out),
    })
    print(out / INSTANCE_NAME)
    return EXIT_OK


def cmd_reduce(args) -> int:
    if args.instance is None:
        raise _UsageError("--instance is required")
    instance = read_instance(args.instance)
    preset = _preset_or_usage(args.preset) if args.preset is not None else None

    def pick(value, preset_value, fallback):
        if value is not None:
            return value
        if preset is not None and preset_value is not None:
            return preset_value
        return fallback

    m = pick(args.m, preset.m if preset else None, None)
    tau = pick(args.tau, preset.tau if preset else None, None)
    if m is None or tau is None:
        raise _UsageError("--m and --tau are required unless --preset supplies them")
    effective = {
        "instance": os.path.abspath(args.instance),
        "preset": args.preset,
        "m": m,
        "omega": pick(args.omega, preset.omega if preset else None, 10),
        "beta": pick(args.beta, preset.beta if preset else None, 20),
        "delta": args.delta if args.delta is not None else 0.99,
        "gamma": args.gamma if args.gamma is not None else -0.001,
        "stall_window": args.stall_window if args.stall_window is not None else 3,
        "tau": tau,
        "matrices": args.matrices if args.matrices is not None else 1,
        "workers": _effective_workers(args),
        "seed": args.seed if args.seed is not None else 0,
        "max_steps": pick(args.max_steps, preset.max_steps if preset else None,
                          DEFAULT_MAX_STEPS),
        "max_seconds": args.max_seconds if args.max_seconds is not None else DEFAULT_MAX_SECONDS,
    }
    try:
        config = ReductionJobConfig(
            params=instance.params,
            m=effective["m"],
            tau=effective["tau"],
            omega=effective["omega"],
            fast=ReducerSpec(kind="lll", delta=effective["delta"]),
            strong=ReducerSpec(kind="bkz", beta=effective["beta"], delta=effective["delta"]),
            gamma=effective["gamma"],
            stall_window=effective["stall_window"],
            matrices=effective["matrices"],
            workers=effective["workers"],
            seed=effective["seed"],
            max_steps=effective["max_steps"],
            max_seconds=effective["max_seconds"],
        )
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc
    out = _require_out(args)
    effective["out"] = str(out)
    dataset = produce_dataset(instance, config, out)
    _write_run_log(out, "reduce", effective)
    records = dataset.batch_records
    done = len(records)
    if done < config.matrices:
        print(f"{done}/{config.matrices} batches completed; see log for failures",
              file=sys.stderr)
        return EXIT_DATA
    if records:
        rho = float(np.mean([r["rho"] for r in records]))
        capped = sum(1 for r in records if r.get("capped"))
        print(f"{done} batch(es) -> {out}  mean rho {rho:.4f}  capped {capped}")
    else:
        print(f"0 batches -> {out}")
    return EXIT_OK


def _effective_workers(args) -> int:
    if args.workers is not None:
        return args.workers
    env = os.environ.get(WORKERS_ENV)
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise _UsageError(f"{WORKERS_ENV}={env!r} is not an integer") from exc
    return 1


def cmd_stats(args) -> int:
    if args.dataset is None:
        raise _UsageError("--dataset is required")
    dataset = Dataset(args.dataset)
    cap = args.sample_cap if args.sample_cap is not None else SAMPLE_CAP
    rep = report(dataset, sample_cap=cap)
    if args.json:
        sys.stdout.write(canonical_json(rep.to_dict()))
    else:
        print(rep.to_text())
    if args.out is not None:
        out = _require_out(args)
        emit_figures(dataset, out)
        (out / "report.json").write_text(canonical_json(rep.to_dict()))
        _write_run_log(out, "stats", {
            "dataset": os.path.abspath(args.dataset),
            "sample_cap": cap,
            "json": bool(args.json),
            "out": str(out),
        })
    return EXIT_OK


def cmd_attack(args) -> int:
    if args.dataset is None or args.instance is None:
        raise _UsageError("--dataset and --instance are required")
    dataset = Dataset(args.dataset)
    instance = read_instance(args.instance)
    try:
        config = AttackConfig(
            max_cruel_weight=args.max_cruel_weight if args.max_cruel_weight is not None else 4,
            brute_samples=args.brute_samples if args.brute_samples is not None else 100_000,
            score_keep=args.score_keep if args.score_keep is not None else 16,
            accept_threshold=args.accept_threshold,
        )
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc
    profile = cliff_profile(dataset)
    result = attack(dataset, instance, profile, config)
    sys.stdout.write(result.to_json())
    if args.out is not None:
        out = _require_out(args)
        (out / "result.json").write_text(result.to_json())
        _write_run_log(out, "attack", {
            "dataset": os.path.abspath(args.dataset),
            "instance": os.path.abspath(args.instance),
            "max_cruel_weight": config.max_cruel_weight,
            "brute_samples": config.brute_samples,
            "score_keep": config.score_keep,
            "accept_threshold": config.accept_threshold,
            "out": str(out),
        })
    return EXIT_OK if result.succeeded else EXIT_NEGATIVE


def _load_candidate(path: Path, n: int) -> np.ndarray:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON ({exc})") from exc
    if isinstance(doc, dict):
        for key in ("recovered_s", "s"):
            if doc.get(key) is not None:
                doc = doc[key]
                break
        else:
            raise FormatError(f"{path}: no recovered_s or s entry")
    if not isinstance(doc, list) or len(doc) != n:
        raise FormatError(f"{path}: candidate must be a list of {n} integers")
    return np.array(doc, dtype=np.int64)


def cmd_verify(args) -> int:
    if args.instance is None or args.candidate is None:
        raise _UsageError("--instance and --candidate are required")
    instance = read_instance(args.instance)
    candidate = _load_candidate(args.candidate, instance.params.n)
    verdict = verify_secret(
        instance.A, instance.b, candidate, instance.params, args.accept_threshold
    )
    payload = {"accepted": verdict.accepted, "residual_std": verdict.residual_std}
    sys.stdout.write(canonical_json(payload))
    if args.out is not None:
        out = _require_out(args)
        (out / "verdict.json").write_text(canonical_json(payload))
        _write_run_log(out, "verify", {
            "instance": os.path.abspath(args.instance),
            "candidate": os.path.abspath(args.candidate),
            "accept_threshold": args.accept_threshold,
            "out": str(out),
        })
    return EXIT_OK if verdict.accepted else EXIT_NEGATIVE


def cmd_preset(args) -> int:
    if args.action == "list":
        for preset in PRESETS.values():
            print(
                f"{preset.name:<12} n={preset.n:<5} logq={preset.logq:<3} "
                f"m={preset.m:<5} omega={preset.omega:<3} beta={preset.beta:<3} "
                f"tau={preset.tau}"
            )
        return EXIT_OK
    raise _UsageError(f"unknown preset action {args.action!r}")


def build_parser() -> _Parser:
    parser = _Parser(prog="lwe-forge", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        if name != "preset":
            p.add_argument("--from-run", metavar="RUN_JSON",
                           help="replay parameters from a previous run.json")
        return p

    g = add("gen", cmd_gen, "generate an LWE instance pool")
    g.add_argument("--preset", help="named parameter set (see `preset list`)")
    g.add_argument("--n", type=int)
    g.add_argument("--logq", type=int, help="q becomes the next prime above 2**logq")
    g.add_argument("--q", type=int, help="explicit prime modulus")
    g.add_argument("--secret", choices=["binary", "ternary", "binomial"],
                   help="secret distribution (default binary)")
    g.add_argument("--h", type=int, help="fixed secret Hamming weight")
    g.add_argument("--sigma", type=float, help="error stddev (default 3.2)")
    g.add_argument("--eta", type=int, help="binomial width parameter (default 3)")
    g.add_argument("--error-dist", choices=["gaussian", "binomial"])
    g.add_argument("--seed", type=int, help="default 0")
    g.add_argument("--no-secret", action="store_true", default=None,
                   help="omit s and e from the instance file")
    g.add_argument("--out", help="output directory")

    r = add("reduce", cmd_reduce, "reduce an instance pool into a dataset")
    r.add_argument("--instance", help="instance file from `gen`")
    r.add_argument("--preset", help="named parameter set supplying m/tau/beta defaults")
    r.add_argument("--m", type=int, help="subsample size per matrix")
    r.add_argument("--omega", type=int, help="embedding scale (default 10)")
    r.add_argument("--beta", type=int, help="strong-reducer block size (default 20)")
    r.add_argument("--delta", type=float, help="reduction quality (default 0.99)")
    r.add_argument("--gamma", type=float, help="switch threshold <= 0 (default -0.001)")
    r.add_argument("--stall-window", type=int, help="trend window (default 3)")
    r.add_argument("--tau", type=float, help="target reduction factor")
    r.add_argument("--matrices", type=int, help="batches to produce (default 1)")
    r.add_argument("--workers", type=int,
                   help=f"parallel workers (default ${WORKERS_ENV} or 1)")
    r.add_argument("--seed", type=int, help="job seed (default 0)")
    r.add_argument("--max-steps", type=int)
    r.add_argument("--max-seconds", type=float)
    r.add_argument("--out", help="dataset directory")

    s = add("stats", cmd_stats, "report rho and the cliff profile of a dataset")
    s.add_argument("--dataset", help="dataset directory from `reduce`")
    s.add_argument("--sample-cap", type=int,
                   help=f"rows used for profile statistics (default {SAMPLE_CAP})")
    s.add_argument("--json", action="store_true", default=None,
                   help="emit the report as JSON instead of text")
    s.add_argument("--out", help="directory for CSV figures and report.json")

    a = add("attack", cmd_attack, "recover a sparse secret from a reduced dataset")
    a.add_argument("--dataset", help="dataset directory from `reduce`")
    a.add_argument("--instance", help="instance file for targets and verification")
    a.add_argument("--max-cruel-weight", type=int, help="default 4")
    a.add_argument("--brute-samples", type=int, help="scoring rows (default 100000)")
    a.add_argument("--score-keep", type=int, help="survivors to regress (default 16)")
    a.add_argument("--accept-threshold", type=float,
                   help="residual acceptance bound (default 2*sigma)")
    a.add_argument("--out", help="directory for result.json")

    v = add("verify", cmd_verify, "check a candidate secret against an instance")
    v.add_argument("--instance", help="instance file")
    v.add_argument("--candidate",
                   help="JSON file: a bare list, or a dict with recovered_s or s")
    v.add_argument("--accept-threshold", type=float,
                   help="residual acceptance bound (default 2*sigma)")
    v.add_argument("--out", help="directory for verdict.json")

    p = add("preset", cmd_preset, "inspect the named parameter sets")
    p.add_argument("action", choices=["list"])

    return parser


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _apply_from_run(args)
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ForgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


def entry() -> None:
    logging.basicConfig(
        level=logging.INFO,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    sys.exit(run_cli())
