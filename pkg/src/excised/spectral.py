"""
Statistics of eigenangle samples: |Lambda_A(1)|, excision, first scaled
eigenangles, mean-one normalisation, histograms and spacings.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .ensembles import EigenangleSample, GroupKind, SampleBatch

__all__ = [
    "Histogram",
    "charpoly_at_one",
    "first_scaled_eigenangle",
    "scaled_eigenangles",
    "excise",
    "normalize_mean_one",
    "empirical_density",
    "nearest_neighbor_spacings",
    "format_number",
    "ks_distance",
]


def format_number(x: float) -> str:
    """Locale-independent 12-significant-digit formatting used for all output."""
    return format(float(x), ".12g")


@dataclass
class Histogram:
    """Binned density.

    ``below`` and ``above`` count values falling outside ``bin_edges``;
    they are reported, never silently dropped.  For ``kind="probability"``
    the in-range density integrates to one.
    """

    bin_edges: np.ndarray
    density: np.ndarray
    sample_count: int
    below: int = 0
    above: int = 0
    kind: str = "probability"
    counts: np.ndarray | None = field(default=None, repr=False)

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.bin_edges)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[1:] + self.bin_edges[:-1])

    @property
    def masses(self) -> np.ndarray:
        return self.density * self.widths

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("bin_lo,bin_hi,density\n")
        for lo, hi, d in zip(self.bin_edges[:-1], self.bin_edges[1:], self.density):
            buf.write(f"{format_number(lo)},{format_number(hi)},{format_number(d)}\n")
        return buf.getvalue()

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_csv())


def _angles_of(sample) -> tuple[GroupKind, int, np.ndarray]:
    if isinstance(sample, SampleBatch):
        return sample.ensemble.kind, sample.ensemble.half_size, sample.angles
    if isinstance(sample, EigenangleSample):
        return sample.ensemble.kind, sample.ensemble.half_size, sample.angles[None, :]
    raise TypeError("expected an EigenangleSample or SampleBatch")


def charpoly_at_one(sample):
    """|Lambda_A(1)| for one sample (float) or a batch (array).

    SO(2N+1) uses the product over the nontrivial pairs only, since the full
    determinant vanishes identically.
    """
    kind, _, th = _angles_of(sample)
    half = np.sin(0.5 * th)
    if kind is GroupKind.U:
        vals = np.prod(2.0 * np.abs(half), axis=1)
    else:
        # 2 - 2 cos(theta) written as 4 sin^2(theta/2) to keep precision near 0
        vals = np.prod(4.0 * half * half, axis=1)
    return float(vals[0]) if isinstance(sample, EigenangleSample) else vals


def _scale_factor(kind: GroupKind, n: int) -> float:
    if kind is GroupKind.SO_ODD:
        return (2 * n + 1) / (2 * math.pi)
    if kind is GroupKind.U:
        return n / (2 * math.pi)
    return n / math.pi


def scaled_eigenangles(sample) -> np.ndarray:
    """All angles of ``sample`` in unit-mean-spacing coordinates."""
    kind, n, th = _angles_of(sample)
    out = th * _scale_factor(kind, n)
    return out[0] if isinstance(sample, EigenangleSample) else out


def first_scaled_eigenangle(sample):
    kind, n, th = _angles_of(sample)
    if th.shape[1] == 0:
        raise ValueError("sample has no eigenangles")
    vals = th[:, 0] * _scale_factor(kind, n)
    return float(vals[0]) if isinstance(sample, EigenangleSample) else vals


def excise(samples, threshold: float):
    """Keep the samples whose |Lambda_A(1)| is at least ``threshold``.

    Works on a :class:`SampleBatch` (returns a batch) or a list of samples
    (returns a list); order is preserved.
    """
    if not threshold >= 0:
        raise ValueError("threshold must be nonnegative")
    if isinstance(samples, SampleBatch):
        return samples[charpoly_at_one(samples) >= threshold]
    return [s for s in samples if charpoly_at_one(s) >= threshold]


def normalize_mean_one(values: Sequence[float]) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("cannot normalise an empty sample")
    mean = v.mean()
    if not mean > 0:
        raise ValueError("sample mean must be positive")
    return v / mean


def empirical_density(values: Sequence[float], bins: int, range: tuple[float, float]) -> Histogram:
    lo, hi = map(float, range)
    if not lo < hi:
        raise ValueError("range must satisfy lo < hi")
    if bins < 1:
        raise ValueError("bins must be positive")
    v = np.asarray(values, dtype=float).ravel()
    edges = np.linspace(lo, hi, bins + 1)
    below = int(np.count_nonzero(v < lo))
    above = int(np.count_nonzero(v > hi))
    counts, _ = np.histogram(v, bins=edges)
    inside = counts.sum()
    if inside:
        density = counts / (inside * np.diff(edges))
    else:
        density = np.zeros(bins)
    return Histogram(edges, density, int(v.size), below, above, "probability", counts)


def nearest_neighbor_spacings(values: Sequence[float]) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    d = np.diff(v, axis=-1)
    if np.any(d < 0):
        raise ValueError("input must be sorted ascending")
    return d


def ks_distance(sample_a: Sequence[float], sample_b: Sequence[float]) -> float:
    """Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|."""
    a = np.sort(np.asarray(sample_a, dtype=float).ravel())
    b = np.sort(np.asarray(sample_b, dtype=float).ravel())
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be nonempty")
    pts = np.concatenate([a, b])
    fa = np.searchsorted(a, pts, side="right") / a.size
    fb = np.searchsorted(b, pts, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))
