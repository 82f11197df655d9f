"""Angular encoding of residues: x in [0, q) maps to a point on the unit
circle, x -> (cos(2 pi x / q), sin(2 pi x / q)).

The map is injective over [0, q) as long as adjacent angles stay resolvable
in float64, which holds comfortably for q < 2**24; beyond that the angular
gap 2 pi / q shrinks toward the rounding error of cos/sin near the crossing
points and neighbouring residues can collide.
"""

from __future__ import annotations

import numpy as np

TWO_PI = 2.0 * np.pi


def angular_encode(a: np.ndarray, q: int) -> np.ndarray:
    """Map residues to unit-circle pairs along a trailing axis of size 2.

    x = 0 encodes to exactly (1.0, 0.0). Input entries must lie in [0, q).
    """
    a = np.asarray(a)
    if a.size and (a.min() < 0 or a.max() >= q):
        raise ValueError(f"entries must lie in [0, {q})")
    theta = a.astype(np.float64) * (TWO_PI / q)
    return np.stack([np.cos(theta), np.sin(theta)], axis=-1)


def angular_decode(pairs: np.ndarray, q: int) -> np.ndarray:
    """Nearest residue in [0, q) for each (cos, sin) pair.

    Total on all of R^2 minus the origin; the pair need not be unit norm, so
    model outputs can be decoded without normalization.
    """
    pairs = np.asarray(pairs, dtype=np.float64)
    theta = np.arctan2(pairs[..., 1], pairs[..., 0])  # (-pi, pi]
    return np.rint(theta * (q / TWO_PI)).astype(np.int64) % q


def centered(values: np.ndarray, q: int) -> np.ndarray:
    """Residues mapped to the symmetric range (-q/2, q/2]."""
    values = np.asarray(values, dtype=np.int64)
    return ((values + q // 2) % q) - q // 2
