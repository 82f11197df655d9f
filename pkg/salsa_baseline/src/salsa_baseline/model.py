"""Encoder-only sequence regressor predicting the encoded target pair.

Each of the n input residues becomes one token (its unit-circle pair
projected into the embedding), the encoder mixes them, and a pooled head
regresses the (cos, sin) pair of the target. Decoding back to a residue is
the caller's job via angular_decode.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import torch
from torch import nn


@dataclass(frozen=True)
class ModelConfig:
    layers: int = 4
    embed_dim: int = 512
    heads: int = 8
    lr: float = 1e-4
    warmup_steps: int = 8000
    weight_decay: float = 1e-3
    batch_size: int = 64
    distinguisher_samples: int = 128

    def __post_init__(self):
        for name in ("layers", "embed_dim", "heads", "lr", "warmup_steps",
                     "weight_decay", "batch_size", "distinguisher_samples"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.embed_dim % self.heads:
            raise ValueError(
                f"heads ({self.heads}) must divide embed_dim ({self.embed_dim})"
            )

    @classmethod
    def desk(cls, **overrides) -> "ModelConfig":
        """Down-scaled configuration for single-machine experiments."""
        fields = dict(layers=2, embed_dim=64, heads=4, warmup_steps=200)
        fields.update(overrides)
        return cls(**fields)

    def to_dict(self) -> dict:
        return asdict(self)


class SequenceRegressor(nn.Module):
    def __init__(self, n: int, config: ModelConfig):
        super().__init__()
        self.n = n
        self.config = config
        d = config.embed_dim
        self.input_proj = nn.Linear(2, d)
        self.positions = nn.Parameter(torch.zeros(1, n, d))
        layer = nn.TransformerEncoderLayer(
            d_model=d,
            nhead=config.heads,
            dim_feedforward=4 * d,
            batch_first=True,
        )
        self.encoder = nn.TransformerEncoder(layer, num_layers=config.layers)
        self.head = nn.Linear(d, 2)
        nn.init.normal_(self.positions, std=0.02)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        """(batch, n, 2) angular tokens -> (batch, 2) predicted pair."""
        if x.shape[1] != self.n:
            raise ValueError(f"expected sequences of length {self.n}, got {x.shape[1]}")
        h = self.input_proj(x) + self.positions
        h = self.encoder(h)
        return self.head(h.mean(dim=1))
