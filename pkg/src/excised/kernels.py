"""
Scaled one-level densities of the classical compact groups and
pair-correlation expansions.

Angles are in unit-mean-spacing coordinates: theta * N / pi for SO(2N) and
USp(2N), theta * (2N + 1) / (2 pi) for SO(2N + 1) and theta * N / (2 pi)
for U(N).  Densities are defined on theta in [0, 1].
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .ensembles import EnsembleId, GroupKind

__all__ = [
    "KernelMode",
    "PairCorrCoefficients",
    "one_level_density",
    "pair_correlation_unitary",
    "pair_correlation_family",
    "SERIES_CUTOFF",
]

#: Below this |theta| the sine ratios are replaced by their Taylor series.
SERIES_CUTOFF = 1e-6


class KernelMode(str, enum.Enum):
    EXACT = "exact"
    EXPANDED = "expanded"


@dataclass(frozen=True)
class PairCorrCoefficients:
    e1: float
    e2: float
    e3: float
    R: float

    def __post_init__(self):
        if not self.R > 0:
            raise ValueError("R must be positive")


def _sin_ratio(m: float, u: np.ndarray) -> np.ndarray:
    """sin(m u) / sin(u), continued through u = 0."""
    out = np.empty_like(u)
    small = np.abs(u) < SERIES_CUTOFF
    with np.errstate(invalid="ignore", divide="ignore"):
        out[~small] = np.sin(m * u[~small]) / np.sin(u[~small])
    us = u[small]
    out[small] = m * (1.0 - (m * m - 1.0) * us * us / 6.0)
    return out


def _sinc(x: np.ndarray) -> np.ndarray:
    """sin(x) / x with its series near 0."""
    out = np.empty_like(x)
    small = np.abs(x) < SERIES_CUTOFF
    out[~small] = np.sin(x[~small]) / x[~small]
    out[small] = 1.0 - x[small] ** 2 / 6.0
    return out


def _exact(kind: GroupKind, n: int, t: np.ndarray) -> np.ndarray:
    if kind is GroupKind.SO_EVEN:
        return 1 - 1 / (2 * n) + _sin_ratio(2 * n - 1, math.pi * t / n) / (2 * n)
    if kind is GroupKind.USP:
        return 1 + 1 / (2 * n) - _sin_ratio(2 * n + 1, math.pi * t / n) / (2 * n)
    if kind is GroupKind.SO_ODD:
        L = 2 * n + 1
        # sin(4 pi t N / L) / sin(2 pi t / L) = sin(2N u) / sin(u), u = 2 pi t / L
        return 1 - 1 / L - _sin_ratio(2 * n, 2 * math.pi * t / L) / L
    return np.ones_like(t)


def _expanded(kind: GroupKind, n: int, t: np.ndarray) -> np.ndarray:
    x = 2 * math.pi * t
    s = np.sin(x)
    c = np.cos(x)
    sinc = _sinc(x)
    if kind is GroupKind.SO_EVEN:
        return 1 + sinc - (1 + c) / (2 * n) - math.pi * t * s / (6 * n * n)
    if kind is GroupKind.USP:
        return 1 - sinc + (1 - c) / (2 * n) + math.pi * t * s / (6 * n * n)
    if kind is GroupKind.SO_ODD:
        L = 2 * n + 1
        return 1 - sinc - (1 - c) / L + 2 * math.pi * t * s / (3 * L * L)
    return np.ones_like(t)


def one_level_density(ensemble: EnsembleId, theta, mode: KernelMode | str = KernelMode.EXACT):
    """Scaled one-level density of ``ensemble`` at ``theta`` in [0, 1].

    ``mode="expanded"`` keeps the 1/N expansion through second order.
    Accepts scalars or arrays and returns the same shape.
    """
    mode = KernelMode(mode)
    t = np.asarray(theta, dtype=float)
    if np.any(t < 0) or np.any(t > 1) or np.any(np.isnan(t)):
        raise ValueError("theta must lie in [0, 1]")
    flat = np.atleast_1d(t).ravel()
    fn = _exact if mode is KernelMode.EXACT else _expanded
    out = fn(ensemble.kind, ensemble.half_size, flat).reshape(t.shape)
    return float(out) if out.ndim == 0 else out


def pair_correlation_unitary(n: int, x):
    """Large-N scaled pair correlation of U(N), 1 - sinc^2 - sin^2(pi x) / (3 N^2)."""
    if n < 1:
        raise ValueError("N must be positive")
    x = np.asarray(x, dtype=float)
    out = 1.0 - np.sinc(x) ** 2 - np.sin(np.pi * x) ** 2 / (3.0 * n * n)
    return float(out) if out.ndim == 0 else out


def pair_correlation_family(coeffs: PairCorrCoefficients, y):
    """Pair correlation of a twisted L-function through order R^-3."""
    y = np.asarray(y, dtype=float)
    R = coeffs.R
    s = np.sin(np.pi * y)
    out = (1.0 - np.sinc(y) ** 2 + (coeffs.e1 - coeffs.e2 * s * s) / R ** 2
           - coeffs.e3 * np.pi * y * np.sin(2 * np.pi * y) / R ** 3)
    return float(out) if out.ndim == 0 else out
