"""Transformer baseline operating on lweforge dataset directories.

This package deliberately does not import lweforge. It reads the dataset
binary format, manifest, and instance files directly (see the primary
package's docs/dataset_format.txt) and shells out to the lwe-forge CLI for
candidate verification, so the two components stay coupled only through
their documented file formats.
"""

from salsa_baseline.encoding import angular_decode, angular_encode
from salsa_baseline.model import ModelConfig, SequenceRegressor

__all__ = [
    "angular_decode",
    "angular_encode",
    "ModelConfig",
    "SequenceRegressor",
]
