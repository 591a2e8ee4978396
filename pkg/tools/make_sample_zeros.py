"""
Regenerate the bundled synthetic lowest-zero file in src/excised/data/.

The "zeros" are first eigenangles of excised SO(20) matrices, put back on
the ordinate scale by gamma1 = x pi / R with R for the even family of
11.2.a.a at X = 2000.  They exercise the loader and the comparison
pipeline; they are not zeros of any L-function.

    python3 tools/make_sample_zeros.py
"""

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))
from excised.arithmetic import FamilySpec, bundled_newform, family_discriminants  # noqa: E402
from excised.calibration import zero_density_R  # noqa: E402
from excised.compare import ZeroDataset, ZeroRecord  # noqa: E402
from excised.ensembles import EnsembleId, sample_eigenangles  # noqa: E402
from excised.spectral import charpoly_at_one, first_scaled_eigenangle  # noqa: E402

OUT = Path(__file__).resolve().parents[1] / "src" / "excised" / "data"
X = 2000
COUNT = 200
SEED = 20240
QUANTILE = 0.2


def main() -> None:
    f = bundled_newform("11.2.a.a")
    ds = family_discriminants(FamilySpec(f, "principal_even", X))[:COUNT]
    if ds.size < COUNT:
        raise SystemExit(f"only {ds.size} discriminants up to X={X}")
    batch = sample_eigenangles(EnsembleId("SO_even", 10), 4 * COUNT, SEED)
    lam = charpoly_at_one(batch)
    threshold = float(np.quantile(lam, QUANTILE))
    first = first_scaled_eigenangle(batch)[lam >= threshold][:COUNT]
    R = zero_density_R("principal_even", f.level, X)
    gammas = first * np.pi / R
    records = [ZeroRecord(int(d), (float(g),), False) for d, g in zip(ds, gammas)]
    source = (f"synthetic: SO(20) first eigenangles, seed {SEED}, excised below the "
              f"{QUANTILE:g} quantile of |Lambda(1)|, scaled with R at X={X}")
    ZeroDataset(f.label, records, source).save(OUT / "sample_zeros_11.2.a.a_even.csv")


if __name__ == "__main__":
    main()
