"""Decision-side evaluation: can the model tell real targets from uniform?

The statistic is the squared error between the model's predicted pair and
the encoded target. Errors are computed for `samples` real rows and
`samples` counterfeit rows, the threshold is the pooled median, and

    advantage = P(err_real < t) - P(err_counterfeit < t)

which is the usual true-positive minus false-positive form: 0 for a model
with no target information (both error distributions agree), 1 when the
real errors separate completely below the counterfeit ones.
"""

from __future__ import annotations

import numpy as np
import torch

from salsa_baseline.encoding import angular_encode
from salsa_baseline.model import ModelConfig, SequenceRegressor


def prediction_errors(
    model: SequenceRegressor, RA: np.ndarray, b: np.ndarray, q: int,
    device: str = "cpu",
) -> np.ndarray:
    """Per-row squared error of the predicted pair against encode(b)."""
    model.eval()
    with torch.no_grad():
        x = torch.as_tensor(angular_encode(RA, q), dtype=torch.float32, device=device)
        pred = model(x).cpu().numpy().astype(np.float64)
    target = angular_encode(b, q)
    return ((pred - target) ** 2).sum(axis=1)


def uniform_counterfeit(
    RA: np.ndarray, q: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """The same inputs paired with uniform targets: the null hypothesis."""
    return RA, rng.integers(0, q, size=RA.shape[0], dtype=np.int64)


def advantage(
    model: SequenceRegressor,
    real: tuple[np.ndarray, np.ndarray],
    counterfeit: tuple[np.ndarray, np.ndarray],
    q: int,
    config: ModelConfig = ModelConfig(),
    device: str = "cpu",
) -> float:
    samples = config.distinguisher_samples
    for name, (RA, b) in (("real", real), ("counterfeit", counterfeit)):
        if RA.shape[0] < samples:
            raise ValueError(
                f"{name} set has {RA.shape[0]} rows, need {samples}"
            )
    err_real = prediction_errors(model, real[0][:samples], real[1][:samples], q, device)
    err_fake = prediction_errors(
        model, counterfeit[0][:samples], counterfeit[1][:samples], q, device
    )
    threshold = float(np.median(np.concatenate([err_real, err_fake])))
    tpr = float(np.mean(err_real < threshold))
    fpr = float(np.mean(err_fake < threshold))
    return tpr - fpr
