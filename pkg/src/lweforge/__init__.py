"""Toolkit for generating LWE sample pools, producing lattice-reduced
datasets from them, profiling reduction quality, and running sparse-secret
recovery attacks on the reduced data."""

from lweforge.core import (
    LweInstance,
    LweParams,
    VerifyResult,
    centered,
    gen_instance,
    retarget,
    sample_error,
    sample_secret,
    uniform_std,
    verify_secret,
)
from lweforge.pipeline import (
    ReducedBatch,
    ReductionJobConfig,
    RhoHistory,
    apply_secret,
    check_for_switch,
    compute_reduction,
    embed_qary,
    extract_r,
    interleaved_reduce,
    produce_dataset,
    subsample,
)
from lweforge.reduction import ReducerSpec, bkz, lll, polish, register_reducer

__all__ = [
    "LweInstance",
    "LweParams",
    "ReducedBatch",
    "ReducerSpec",
    "ReductionJobConfig",
    "RhoHistory",
    "VerifyResult",
    "apply_secret",
    "bkz",
    "centered",
    "check_for_switch",
    "compute_reduction",
    "embed_qary",
    "extract_r",
    "gen_instance",
    "interleaved_reduce",
    "lll",
    "polish",
    "produce_dataset",
    "register_reducer",
    "retarget",
    "sample_error",
    "sample_secret",
    "subsample",
    "uniform_std",
    "verify_secret",
]

__version__ = "0.1.0"
