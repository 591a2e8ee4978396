"""Excised random-matrix models for quadratic twist families of newform L-functions."""

__version__ = "0.1.0"

from .ensembles import (EigenangleSample, EnsembleId, GroupKind, SampleBatch,
                        sample_eigenangles)
from .kernels import KernelMode, one_level_density
from .spectral import charpoly_at_one, excise, first_scaled_eigenangle

__all__ = [
    "EigenangleSample",
    "EnsembleId",
    "GroupKind",
    "SampleBatch",
    "sample_eigenangles",
    "KernelMode",
    "one_level_density",
    "charpoly_at_one",
    "excise",
    "first_scaled_eigenangle",
]
