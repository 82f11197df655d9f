"""Training loop for the sequence regressor on (RA, Rb) pairs.

Adam with linear learning-rate warmup, squared error on the encoded target
pair, and per-epoch metrics (train_loss, val_loss, advantage) appended to
metrics.csv next to a rolling checkpoint.pt. The constant-predictor
baseline (best single pair for every row) is recorded so callers can check
the model actually learned something.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import torch

from salsa_baseline.distinguisher import advantage, uniform_counterfeit
from salsa_baseline.encoding import angular_encode
from salsa_baseline.model import ModelConfig, SequenceRegressor

METRICS_NAME = "metrics.csv"
CHECKPOINT_NAME = "checkpoint.pt"


@dataclass
class TrainResult:
    model: SequenceRegressor
    baseline_loss: float
    history: list = field(default_factory=list)  # dict rows, one per epoch

    @property
    def final(self) -> dict:
        return self.history[-1]


def split_pairs(
    RA: np.ndarray, Rb: np.ndarray, val_count: int, seed: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Deterministic shuffled split with the last val_count rows held out."""
    if not 0 < val_count < RA.shape[0]:
        raise ValueError(f"val_count must lie in (0, {RA.shape[0]})")
    order = np.random.default_rng(seed).permutation(RA.shape[0])
    cut = RA.shape[0] - val_count
    tr, va = order[:cut], order[cut:]
    return RA[tr], Rb[tr], RA[va], Rb[va]


def pair_loss(pred: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
    """Squared error summed over the (cos, sin) pair, averaged over rows.

    The same per-pair convention is used for training, validation, the
    constant baseline, and the distinguisher statistic, so the numbers are
    directly comparable.
    """
    return ((pred - target) ** 2).sum(dim=1).mean()


def constant_baseline_loss(target_pairs: torch.Tensor) -> float:
    """Loss of the best constant prediction, the mean target pair."""
    mean = target_pairs.mean(dim=0, keepdim=True)
    return float(pair_loss(mean.expand_as(target_pairs), target_pairs))


def train(
    train_pairs: tuple[np.ndarray, np.ndarray],
    val_pairs: tuple[np.ndarray, np.ndarray],
    q: int,
    config: ModelConfig,
    out_dir,
    epochs: int,
    seed: int = 0,
    target_val_loss: Optional[float] = None,
    device: str = "cpu",
) -> TrainResult:
    RA_tr, Rb_tr = train_pairs
    RA_va, Rb_va = val_pairs
    n = RA_tr.shape[1]
    if RA_va.shape[1] != n:
        raise ValueError("train and val disagree on sequence length")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    torch.manual_seed(seed)
    model = SequenceRegressor(n, config).to(device)
    x_tr = torch.as_tensor(angular_encode(RA_tr, q), dtype=torch.float32, device=device)
    y_tr = torch.as_tensor(angular_encode(Rb_tr, q), dtype=torch.float32, device=device)
    x_va = torch.as_tensor(angular_encode(RA_va, q), dtype=torch.float32, device=device)
    y_va = torch.as_tensor(angular_encode(Rb_va, q), dtype=torch.float32, device=device)
    baseline = constant_baseline_loss(y_tr)

    optimizer = torch.optim.Adam(
        model.parameters(), lr=config.lr, weight_decay=config.weight_decay
    )
    schedule = torch.optim.lr_scheduler.LambdaLR(
        optimizer, lambda step: min(1.0, (step + 1) / config.warmup_steps)
    )
    shuffler = torch.Generator().manual_seed(seed)

    metrics_path = out / METRICS_NAME
    with metrics_path.open("w", newline="") as fh:
        csv.writer(fh).writerow(["epoch", "train_loss", "val_loss", "advantage"])

    result = TrainResult(model=model, baseline_loss=baseline)
    rows = RA_tr.shape[0]
    for epoch in range(epochs):
        model.train()
        order = torch.randperm(rows, generator=shuffler)
        total, seen = 0.0, 0
        for start in range(0, rows, config.batch_size):
            idx = order[start:start + config.batch_size]
            optimizer.zero_grad()
            loss = pair_loss(model(x_tr[idx]), y_tr[idx])
            loss.backward()
            optimizer.step()
            schedule.step()
            total += float(loss.detach()) * idx.shape[0]
            seen += idx.shape[0]

        model.eval()
        with torch.no_grad():
            val_loss = float(pair_loss(model(x_va), y_va))
        adv = float("nan")
        if RA_va.shape[0] >= config.distinguisher_samples:
            rng = np.random.default_rng((seed, epoch))
            adv = advantage(
                model, (RA_va, Rb_va), uniform_counterfeit(RA_va, q, rng),
                q, config, device,
            )
        row = {
            "epoch": epoch,
            "train_loss": total / seen,
            "val_loss": val_loss,
            "advantage": adv,
        }
        result.history.append(row)
        with metrics_path.open("a", newline="") as fh:
            csv.writer(fh).writerow(
                [epoch, repr(row["train_loss"]), repr(val_loss), repr(adv)]
            )
        save_checkpoint(out / CHECKPOINT_NAME, model, q, epoch, val_loss)
        if target_val_loss is not None and val_loss <= target_val_loss:
            break
    return result


def save_checkpoint(
    path, model: SequenceRegressor, q: int, epoch: int, val_loss: float
) -> None:
    torch.save(
        {
            "model_state": model.state_dict(),
            "config": model.config.to_dict(),
            "n": model.n,
            "q": q,
            "epoch": epoch,
            "val_loss": val_loss,
        },
        path,
    )


def load_checkpoint(path, device: str = "cpu") -> tuple[SequenceRegressor, dict]:
    payload = torch.load(path, map_location=device, weights_only=True)
    config = ModelConfig(**payload["config"])
    model = SequenceRegressor(payload["n"], config).to(device)
    model.load_state_dict(payload["model_state"])
    model.eval()
    meta = {key: payload[key] for key in ("q", "epoch", "val_loss")}
    return model, meta
