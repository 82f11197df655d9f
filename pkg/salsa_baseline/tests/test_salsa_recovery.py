import json

import numpy as np
import pytest

torch = pytest.importorskip("torch")
pytest.importorskip("salsa_baseline.encoding")

from salsa_baseline.encoding import angular_decode, angular_encode
from salsa_baseline.recover import attempt_recovery, recover_by_queries, verify_with_cli


class _ConstPair(torch.nn.Module):
    """A zero-secret model: every query predicts the encoding of 0."""

    def __init__(self, n: int):
        super().__init__()
        self.n = n

    def forward(self, x):
        out = torch.zeros(x.shape[0], 2)
        out[:, 0] = 1.0
        return out


class _ExactMap(torch.nn.Module):
    """Oracle answering queries with the true angular response for secret s."""

    def __init__(self, s: np.ndarray, q: int):
        super().__init__()
        self.s = np.asarray(s, dtype=np.int64)
        self.q = q
        self.n = self.s.shape[0]

    def forward(self, x):
        tokens = angular_decode(x.numpy(), self.q)  # (batch, n) residues
        rb = (tokens @ self.s) % self.q
        return torch.as_tensor(angular_encode(rb, self.q), dtype=torch.float32)


def test_zero_secret_model_yields_zero_candidate():
    model = _ConstPair(16)
    cand = recover_by_queries(model, 1031)
    assert cand.shape == (16,)
    assert (cand == 0).all()


@pytest.mark.parametrize("secret", [
    [1, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, -1, 0, 0, 0, 0],
    [1, -1, 0, 0, 0, 0, 0, 1],
    [0, 0, 0, 0, 0, 0, 0, 0],
])
def test_exact_map_recovers_ternary_secrets(secret):
    q = 1031
    model = _ExactMap(np.array(secret), q)
    assert recover_by_queries(model, q).tolist() == secret


def test_magnitude_override():
    q = 1031
    s = [0, 1, 0, 0]
    model = _ExactMap(np.array(s), q)
    assert recover_by_queries(model, q, magnitude=q // 8).tolist() == s


class TestCliVerification:
    def test_true_secret_accepted(self, toy_workspace):
        s = toy_workspace["instance"]["s"]
        accepted, residual = verify_with_cli(toy_workspace["instance_path"], s)
        assert accepted
        assert residual == 0.0

    def test_flipped_secret_rejected(self, toy_workspace):
        wrong = toy_workspace["instance"]["s"].copy()
        wrong[0] ^= 1
        accepted, residual = verify_with_cli(toy_workspace["instance_path"], wrong)
        assert not accepted
        assert residual > 100.0  # near-uniform residual at q = 1031

    def test_wrong_length_candidate_errors(self, toy_workspace):
        with pytest.raises(RuntimeError, match="verify exited 2"):
            verify_with_cli(toy_workspace["instance_path"], np.zeros(4, dtype=int))

    def test_threshold_flag_passes_through(self, toy_workspace):
        wrong = toy_workspace["instance"]["s"].copy()
        wrong[0] ^= 1
        accepted, residual = verify_with_cli(
            toy_workspace["instance_path"], wrong, accept_threshold=1e9
        )
        assert accepted  # absurd threshold turns the reject into an accept


def test_attempt_recovery_verifies_and_succeeds(toy_trained, toy_workspace):
    """Single-seed end-to-end: the trained toy model recovers its secret."""
    outcome = attempt_recovery(
        toy_trained["result"].model, toy_workspace["q"],
        toy_workspace["instance_path"],
    )
    assert set(outcome) == {"candidate", "accepted", "residual_std"}
    assert outcome["accepted"]
    assert (outcome["candidate"] == toy_workspace["instance"]["s"]).all()
    assert outcome["residual_std"] == 0.0
