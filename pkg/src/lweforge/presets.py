"""Named parameter sets: published full-scale runs plus desk-scale smoke sets.

Full-scale tau values are the published final reduction factors plus a 0.005
margin; desk tau values were calibrated once from pilot runs and frozen.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from lweforge.core import LweParams, nextprime_pow2
from lweforge.pipeline import ReductionJobConfig
from lweforge.reduction import ReducerSpec


@dataclass(frozen=True)
class Preset:
    name: str
    n: int
    logq: int
    m: int
    omega: int
    beta: int
    tau: float
    max_steps: int = 500
    published_rho: Optional[float] = None
    published_cruel: Optional[int] = None
    published_samples: Optional[float] = None

    def params(self, **overrides) -> LweParams:
        fields = {"n": self.n, "q": nextprime_pow2(self.logq)}
        fields.update(overrides)
        return LweParams(**fields)

    def job_config(
        self,
        matrices: int = 1,
        workers: int = 1,
        seed: int = 0,
        params: Optional[LweParams] = None,
        **overrides,
    ) -> ReductionJobConfig:
        fields = dict(
            params=params if params is not None else self.params(),
            m=self.m,
            omega=self.omega,
            tau=self.tau,
            fast=ReducerSpec(kind="lll", delta=0.99),
            strong=ReducerSpec(kind="bkz", beta=self.beta, delta=0.99),
            matrices=matrices,
            workers=workers,
            seed=seed,
            max_steps=self.max_steps,
        )
        fields.update(overrides)
        return ReductionJobConfig(**fields)


def _beta_for(n: int) -> int:
    return 30 if n <= 256 else 18


PRESETS: dict[str, Preset] = {
    p.name: p
    for p in [
        # published full-scale parameter sets
        Preset("n256_q20", n=256, logq=20, m=224, omega=10, beta=_beta_for(256),
               tau=0.4334, published_rho=0.4284, published_cruel=37,
               published_samples=438.0),
        Preset("n512_q12", n=512, logq=12, m=448, omega=10, beta=_beta_for(512),
               tau=0.9086, published_rho=0.9036, published_cruel=411,
               published_samples=841.0),
        Preset("n512_q28", n=512, logq=28, m=448, omega=10, beta=_beta_for(512),
               tau=0.6790, published_rho=0.6740, published_cruel=225,
               published_samples=939.0),
        Preset("n512_q41", n=512, logq=41, m=448, omega=10, beta=_beta_for(512),
               tau=0.4042, published_rho=0.3992, published_cruel=69,
               published_samples=938.0),
        Preset("n1024_q26", n=1024, logq=26, m=1624, omega=10, beta=_beta_for(1024),
               tau=0.8650, published_rho=0.8600, published_cruel=750,
               published_samples=2626.0),
        # desk-scale sets; tau frozen from pilot measurements
        Preset("desk_n16", n=16, logq=10, m=14, omega=10, beta=8, tau=0.18,
               max_steps=30),
        Preset("desk_n32", n=32, logq=10, m=28, omega=10, beta=16, tau=0.25,
               max_steps=30),
        Preset("desk_n32_q12", n=32, logq=12, m=28, omega=10, beta=16, tau=0.14,
               max_steps=30),
    ]
}


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}")
