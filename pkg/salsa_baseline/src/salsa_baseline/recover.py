"""Secret recovery by probing the trained model with scaled basis vectors.

Shifting coordinate i of a query by magnitude moves the target of a
faithful model by magnitude * s_i, so s_i is read off the displacement
between the decoded predictions at u and at u + magnitude * e_i. The base
point u is drawn uniformly so that both queries stay on the distribution
the model was trained on; probing from the all-zero vector instead leaves
the model extrapolating and its answer dominated by an initialization
dependent offset. The displacement is reduced centered mod q, which strips
the wraparound u picks up, and the per-coordinate estimate is the median
over several base points so a single bad draw cannot flip a sign.

With the default magnitude q//4 the readout is unambiguous for s_i in
{-1, 0, 1}, the support the sparse-secret experiments use (|s_i| = 2 would
land on the +-q/2 boundary where the sign folds).

Candidates are never reported bare: attempt_recovery always pushes the
candidate through the primary toolkit's verify subcommand first.
"""

from __future__ import annotations

import json
import subprocess
import tempfile
from pathlib import Path
from typing import Optional

import numpy as np
import torch

from salsa_baseline.encoding import angular_decode, angular_encode, centered
from salsa_baseline.model import SequenceRegressor

FORGE_CLI = "lwe-forge"


def recover_by_queries(
    model: SequenceRegressor,
    q: int,
    magnitude: Optional[int] = None,
    bases: int = 16,
    seed: int = 0,
    device: str = "cpu",
) -> np.ndarray:
    """Candidate secret with entries in {-1, 0, 1} from basis-shift probes.

    For each coordinate the displacement magnitude * s_i is measured at
    `bases` uniform base points and the median vote is rounded.
    """
    if magnitude is None:
        magnitude = q // 4
    if bases < 1:
        raise ValueError("bases must be positive")
    n = model.n
    rng = np.random.default_rng(seed)
    base = rng.integers(0, q, size=(bases, n), dtype=np.int64)
    queries = [base]
    for i in range(n):
        shifted = base.copy()
        shifted[:, i] = (shifted[:, i] + magnitude) % q
        queries.append(shifted)
    model.eval()
    with torch.no_grad():
        x = torch.as_tensor(
            angular_encode(np.concatenate(queries, axis=0), q),
            dtype=torch.float32,
            device=device,
        )
        pred = model(x).cpu().numpy()
    decoded = angular_decode(pred, q)
    at_base = decoded[:bases]
    coeffs = np.zeros(n, dtype=np.int64)
    for i in range(n):
        at_shift = decoded[(i + 1) * bases:(i + 2) * bases]
        displacement = centered((at_shift - at_base) % q, q)
        coeffs[i] = int(np.rint(np.median(displacement) / magnitude))
    return np.clip(coeffs, -1, 1)


def verify_with_cli(
    instance_path,
    candidate: np.ndarray,
    accept_threshold: Optional[float] = None,
    forge: str = FORGE_CLI,
) -> tuple[bool, float]:
    """Run `lwe-forge verify`; returns (accepted, residual_std).

    Exit code 0 means accepted and 3 rejected; anything else is an error and
    raises with the CLI's stderr attached.
    """
    with tempfile.TemporaryDirectory() as tmp:
        cand_path = Path(tmp) / "candidate.json"
        cand_path.write_text(json.dumps([int(v) for v in candidate]))
        cmd = [
            forge, "verify",
            "--instance", str(instance_path),
            "--candidate", str(cand_path),
            "--out", tmp,
        ]
        if accept_threshold is not None:
            cmd += ["--accept-threshold", repr(accept_threshold)]
        proc = subprocess.run(cmd, capture_output=True, text=True)
        if proc.returncode not in (0, 3):
            raise RuntimeError(
                f"verify exited {proc.returncode}: {proc.stderr.strip()}"
            )
        verdict = json.loads((Path(tmp) / "verdict.json").read_text())
    return bool(verdict["accepted"]), float(verdict["residual_std"])


def attempt_recovery(
    model: SequenceRegressor,
    q: int,
    instance_path,
    accept_threshold: Optional[float] = None,
    device: str = "cpu",
) -> dict:
    """Query-based candidate plus its mandatory verification verdict."""
    candidate = recover_by_queries(model, q, device=device)
    accepted, residual_std = verify_with_cli(
        instance_path, candidate, accept_threshold
    )
    return {
        "candidate": candidate,
        "accepted": accepted,
        "residual_std": residual_std,
    }
