"""
Lowest-zero datasets and model-versus-data comparison reports.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import arithmetic as ar
from .arithmetic import CaseSelector, NewformCase, NewformData
from .calibration import EffectiveSize, calibrate_excision, zero_density_R
from .ensembles import EnsembleId, GroupKind, sample_eigenangles
from .spectral import (Histogram, charpoly_at_one, empirical_density, first_scaled_eigenangle,
                       format_number, ks_distance, normalize_mean_one)

__all__ = [
    "ZeroDataError",
    "ZeroRecord",
    "ZeroDataset",
    "load_zero_dataset",
    "scale_zeros",
    "ks_distance",
    "l2_distance",
    "Pairing",
    "load_pairings",
    "default_ensemble",
    "infer_case",
    "ComparisonReport",
    "compare_report",
    "empirical_pair_correlation",
    "DEFAULT_BINS",
    "DEFAULT_RANGE",
]

DEFAULT_BINS = 60
DEFAULT_RANGE = (0.0, 4.0)

_DATA = Path(__file__).with_name("data")

_CASE_GROUP = {
    CaseSelector.PRINCIPAL_EVEN: GroupKind.SO_EVEN,
    CaseSelector.PRINCIPAL_ODD: GroupKind.SO_ODD,
    CaseSelector.SELF_CM: GroupKind.USP,
    CaseSelector.GENERIC: GroupKind.U,
}


class ZeroDataError(ValueError):
    pass


@dataclass(frozen=True)
class ZeroRecord:
    d: int
    gammas: tuple
    vanishing: bool = False

    @property
    def gamma1(self) -> float:
        return self.gammas[0]


@dataclass
class ZeroDataset:
    newform_label: str
    records: list
    source: str = ""

    def __post_init__(self):
        seen = set()
        for r in self.records:
            if r.d in seen:
                raise ZeroDataError(f"duplicate discriminant {r.d}")
            seen.add(r.d)
            if not r.gammas:
                raise ZeroDataError(f"d={r.d}: no ordinates")
            if r.vanishing:
                if r.gamma1 != 0:
                    raise ZeroDataError(f"d={r.d}: a vanishing record must have gamma1 = 0")
            elif not r.gamma1 > 0:
                raise ZeroDataError(f"d={r.d}: gamma1 must be positive unless flagged vanishing")

    def __len__(self) -> int:
        return len(self.records)

    @property
    def discriminants(self) -> np.ndarray:
        return np.array([r.d for r in self.records], dtype=np.int64)

    @property
    def gamma1(self) -> np.ndarray:
        return np.array([r.gamma1 for r in self.records], dtype=float)

    @property
    def vanishing(self) -> np.ndarray:
        return np.array([r.vanishing for r in self.records], dtype=bool)

    @property
    def vanishing_count(self) -> int:
        return int(self.vanishing.sum())

    def to_csv(self) -> str:
        width = max((len(r.gammas) for r in self.records), default=1)
        flag = any(r.vanishing for r in self.records)
        buf = io.StringIO()
        if self.newform_label:
            buf.write(f"# newform: {self.newform_label}\n")
        if self.source:
            buf.write(f"# source: {self.source}\n")
        header = ["d"] + [f"gamma{i + 1}" for i in range(width)] + (["vanishing"] if flag else [])
        buf.write(",".join(header) + "\n")
        for r in self.records:
            row = [str(r.d)] + [format_number(g) for g in r.gammas]
            row += [""] * (width - len(r.gammas))
            if flag:
                row.append("1" if r.vanishing else "0")
            buf.write(",".join(row) + "\n")
        return buf.getvalue()

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_csv())


_TRUE = {"1", "true", "yes", "y", "t"}
_FALSE = {"0", "false", "no", "n", "f", ""}


def load_zero_dataset(path, newform_label: str | None = None) -> ZeroDataset:
    """Read a ``d,gamma1[,gamma2,...][,vanishing]`` CSV.

    Lines starting with ``#`` are comments; ``# newform: <label>`` and
    ``# source: <text>`` are picked up as metadata.  Errors cite line numbers.
    """
    path = Path(path)
    label, source = "", str(path)
    header = None
    records: list[ZeroRecord] = []
    seen: dict[int, int] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            if text.startswith("#"):
                key, _, val = text[1:].partition(":")
                if key.strip().lower() == "newform":
                    label = val.strip()
                elif key.strip().lower() == "source":
                    source = val.strip()
                continue
            fields = next(csv.reader([text]))
            fields = [f.strip() for f in fields]
            if header is None:
                header = [f.lower() for f in fields]
                if header[:2] != ["d", "gamma1"]:
                    raise ZeroDataError(f"line {lineno}: header must start with d,gamma1")
                has_flag = header[-1] == "vanishing"
                ncols = len(header) - (1 if has_flag else 0)
                for i, name in enumerate(header[1:ncols], start=1):
                    if name != f"gamma{i}":
                        raise ZeroDataError(f"line {lineno}: unexpected column {name!r}")
                continue
            if len(fields) != len(header):
                raise ZeroDataError(f"line {lineno}: expected {len(header)} fields, got {len(fields)}")
            try:
                d = int(fields[0])
            except ValueError:
                raise ZeroDataError(f"line {lineno}: d={fields[0]!r} is not an integer") from None
            if d == 1 or not ar.is_fundamental_discriminant(d):
                raise ZeroDataError(f"line {lineno}: d={d} is not a fundamental discriminant")
            if d in seen:
                raise ZeroDataError(f"line {lineno}: duplicate d={d} (first on line {seen[d]})")
            seen[d] = lineno
            vanishing = False
            if has_flag:
                flag = fields[-1].lower()
                if flag in _TRUE:
                    vanishing = True
                elif flag not in _FALSE:
                    raise ZeroDataError(f"line {lineno}: bad vanishing flag {fields[-1]!r}")
            gammas = []
            for f in fields[1:ncols]:
                if f == "":
                    continue
                try:
                    g = float(f)
                except ValueError:
                    raise ZeroDataError(f"line {lineno}: {f!r} is not a number") from None
                if not math.isfinite(g):
                    raise ZeroDataError(f"line {lineno}: non-finite ordinate")
                gammas.append(g)
            if not gammas:
                raise ZeroDataError(f"line {lineno}: gamma1 missing")
            if any(b < a for a, b in zip(gammas, gammas[1:])):
                raise ZeroDataError(f"line {lineno}: ordinates must be ascending")
            if vanishing and gammas[0] != 0:
                raise ZeroDataError(f"line {lineno}: vanishing record needs gamma1 = 0")
            if not vanishing and not gammas[0] > 0:
                raise ZeroDataError(f"line {lineno}: gamma1 must be positive unless flagged vanishing")
            records.append(ZeroRecord(d, tuple(gammas), vanishing))
    if header is None:
        raise ZeroDataError(f"{path}: no header line")
    return ZeroDataset(newform_label or label, records, source)


def scale_zeros(dataset: ZeroDataset, case: CaseSelector | str, M: float, X: float) -> np.ndarray:
    """gamma1 * R / pi for the non-vanishing records (vanishing ones are dropped)."""
    R = zero_density_R(case, M, X)
    g = dataset.gamma1[~dataset.vanishing] if len(dataset) else np.zeros(0)
    return g * R / math.pi


def l2_distance(a: Histogram, b: Histogram) -> float:
    """sqrt(sum (p_i - q_i)^2) over bin masses of two histograms with shared edges."""
    if not np.array_equal(a.bin_edges, b.bin_edges):
        raise ValueError("histograms must share bin edges")
    return float(np.sqrt(np.sum((a.masses - b.masses) ** 2)))


# ---------------------------------------------------------------------------
# Pairings of families with ensembles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Pairing:
    label: str
    case: CaseSelector
    ensemble: EnsembleId


def load_pairings(path=None) -> list[Pairing]:
    path = Path(path) if path is not None else _DATA / "pairings.csv"
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        rows = csv.DictReader(line for line in fh if not line.lstrip().startswith("#"))
        for row in rows:
            out.append(Pairing(row["label"].strip(), CaseSelector(row["case"].strip()),
                               EnsembleId(GroupKind.parse(row["group"]), int(row["half_size"]))))
    return out


def default_ensemble(label: str, case: CaseSelector | str, pairings=None) -> EnsembleId:
    case = CaseSelector(case)
    pairings = load_pairings() if pairings is None else pairings
    for wanted in (label, "*"):
        for p in pairings:
            if p.label == wanted and p.case is case:
                return p.ensemble
    raise KeyError(f"no pairing for {label} ({case.value})")


def infer_case(newform: NewformData, discriminants: Sequence[int]) -> CaseSelector:
    """Family case from the newform type and, for principal forms, the twist signs.

    Principal forms are classified by eps_f psi_d(-M) over the dataset; a
    mixture of signs raises.  Self-CM and generic forms map directly.
    """
    if newform.case is NewformCase.SELF_CM:
        return CaseSelector.SELF_CM
    if newform.case is NewformCase.GENERIC:
        return CaseSelector.GENERIC
    M = newform.level
    signs = {newform.sign * ar.kronecker_symbol(int(d), -M) for d in discriminants}
    signs.discard(0)
    if signs == {1}:
        return CaseSelector.PRINCIPAL_EVEN
    if signs == {-1}:
        return CaseSelector.PRINCIPAL_ODD
    raise ValueError("dataset mixes even and odd twists; pass the case explicitly")


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

@dataclass
class ComparisonReport:
    data_histogram: Histogram
    model_histogram: Histogram
    ks: float
    l2: float
    threshold_used: float | None
    n_eff_used: EffectiveSize
    counts: dict
    case: CaseSelector
    ensemble: EnsembleId
    seed: int
    warnings: list = field(default_factory=list)

    def to_dict(self, histogram_paths: dict | None = None) -> dict:
        out = {
            "case": self.case.value,
            "ensemble": {"group": self.ensemble.kind.value, "half_size": self.ensemble.half_size,
                         "name": str(self.ensemble)},
            "seed": self.seed,
            "ks": float(format_number(self.ks)),
            "l2": float(format_number(self.l2)),
            "threshold_used": None if self.threshold_used is None
            else float(format_number(self.threshold_used)),
            "n_eff_used": self.n_eff_used.to_dict(),
            "bins": int(self.data_histogram.density.size),
            "range": [float(self.data_histogram.bin_edges[0]),
                      float(self.data_histogram.bin_edges[-1])],
            "counts": dict(self.counts),
            "warnings": list(self.warnings),
        }
        if histogram_paths:
            out["histograms"] = dict(histogram_paths)
        return out

    def write(self, out_dir, stem: str = "compare") -> Path:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        data_csv = out_dir / f"{stem}_data_hist.csv"
        model_csv = out_dir / f"{stem}_model_hist.csv"
        self.data_histogram.write_csv(data_csv)
        self.model_histogram.write_csv(model_csv)
        path = out_dir / f"{stem}_report.json"
        body = self.to_dict({"data": data_csv.name, "model": model_csv.name})
        path.write_text(json.dumps(body, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return path


def compare_report(dataset: ZeroDataset, newform: NewformData,
                   ensemble: EnsembleId | None = None, mc_count: int = 100_000,
                   seed: int = 0, excision=None, *, case: CaseSelector | str | None = None,
                   X: float | None = None, bins: int = DEFAULT_BINS,
                   range: tuple = DEFAULT_RANGE, workers: int = 1, pairings=None,
                   calibration_grid: int = 64) -> ComparisonReport:
    """Mean-one lowest zeros against mean-one first eigenangles of the model.

    ``excision`` is ``None`` (no excision), a threshold on |Lambda_A(1)|, or
    ``"calibrate"`` to fit the threshold.  When ``X`` is given the zeros are
    first put on the unit-mean-spacing scale; the mean-one normalisation makes
    this cosmetic for the statistics.
    """
    notes: list[str] = []
    ds = dataset.discriminants
    case = CaseSelector(case) if case is not None else infer_case(newform, ds)
    if case.newform_case is not newform.case:
        raise ValueError(f"case {case.value} does not fit a {newform.case.value} newform")
    if ensemble is None:
        ensemble = default_ensemble(newform.label, case, pairings)
        provenance = "pairing table"
    else:
        provenance = "user"
    expected = _CASE_GROUP[case]
    if ensemble.kind is not expected:
        msg = (f"{case.value} families pair with {expected.value}, comparing against "
               f"{ensemble.kind.value} instead")
        warnings.warn(msg, stacklevel=2)
        notes.append(msg)
    if dataset.newform_label and dataset.newform_label != newform.label:
        notes.append(f"dataset is labelled {dataset.newform_label}, newform is {newform.label}")

    if X is not None:
        zeros = scale_zeros(dataset, case, newform.level, X)
    else:
        zeros = dataset.gamma1[~dataset.vanishing]
    if zeros.size == 0:
        raise ValueError("dataset has no non-vanishing zeros to compare")
    data = normalize_mean_one(zeros)

    batch = sample_eigenangles(ensemble, mc_count, seed, workers=workers)
    first = first_scaled_eigenangle(batch)
    lam = charpoly_at_one(batch)
    threshold = None
    if isinstance(excision, str):
        if excision != "calibrate":
            raise ValueError("excision must be a threshold, 'calibrate' or None")
        threshold = calibrate_excision(first, lam, data, grid=calibration_grid)
    elif excision is not None:
        threshold = float(excision)
        if not threshold >= 0:
            raise ValueError("threshold must be nonnegative")
    kept = first if threshold is None else first[lam >= threshold]
    if kept.size == 0:
        raise ValueError("excision removed every model sample")
    model = normalize_mean_one(kept)

    data_hist = empirical_density(data, bins, range)
    model_hist = empirical_density(model, bins, range)
    counts = {
        "data_records": len(dataset),
        "data_used": int(data.size),
        "vanishing": dataset.vanishing_count,
        "data_below_range": data_hist.below,
        "data_above_range": data_hist.above,
        "model_samples": int(mc_count),
        "model_kept": int(kept.size),
        "model_below_range": model_hist.below,
        "model_above_range": model_hist.above,
    }
    return ComparisonReport(
        data_histogram=data_hist, model_histogram=model_hist,
        ks=ks_distance(model, data), l2=l2_distance(data_hist, model_hist),
        threshold_used=threshold,
        n_eff_used=EffectiveSize(float(ensemble.half_size), ensemble.kind, provenance),
        counts=counts, case=case, ensemble=ensemble, seed=int(seed), warnings=notes)


# ---------------------------------------------------------------------------
# Pair correlation of a single spectrum
# ---------------------------------------------------------------------------

def empirical_pair_correlation(ordinates, R_pc: float, bins: int, range: tuple,
                               period: float | None = None, chunk: int = 256) -> Histogram:
    """Histogram of (gamma - gamma') R_pc / pi over ordered pairs, per unit length per zero.

    ``ordinates`` is one sorted spectrum or a 2-D array of spectra (one per
    row), pooled.  With ``period`` the scaled differences are wrapped into
    (-period/2, period/2], which suits eigenangles on the circle.
    """
    if not R_pc > 0:
        raise ValueError("R_pc must be positive")
    arr = np.asarray(ordinates, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] < 2:
        raise ValueError("need at least two ordinates per spectrum")
    if np.any(np.diff(arr, axis=1) < 0):
        raise ValueError("ordinates must be sorted ascending")
    lo, hi = map(float, range)
    if not lo < hi or bins < 1:
        raise ValueError("need lo < hi and bins >= 1")
    edges = np.linspace(lo, hi, bins + 1)
    counts = np.zeros(bins, dtype=np.int64)
    below = above = 0
    n = arr.shape[1]
    off_diag = ~np.eye(n, dtype=bool)
    scaled = arr * (R_pc / math.pi)
    for start in np.arange(0, scaled.shape[0], chunk):
        block = scaled[start:start + chunk]
        diff = (block[:, :, None] - block[:, None, :])[:, off_diag]
        if period is not None:
            diff = diff - period * np.round(diff / period)
        diff = diff.ravel()
        below += int(np.count_nonzero(diff < lo))
        above += int(np.count_nonzero(diff > hi))
        counts += np.histogram(diff, bins=edges)[0]
    total_zeros = arr.size
    density = counts / (total_zeros * np.diff(edges))
    return Histogram(edges, density, int(total_zeros), below, above, "pair", counts)
