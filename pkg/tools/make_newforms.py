"""
Regenerate the bundled newform files in src/excised/data/.

11.2.a.a is the newform of the elliptic curve y^2 + y = x^3 - x^2 - 10x - 20;
its a_p come from counting points mod p.  3.7.b.a is the CM form attached
to the Hecke character (alpha) -> alpha^6 of Q(sqrt(-3)); a_p = pi^6 + conj(pi)^6
for p = pi conj(pi) split, 0 for p inert, and a_3 = (sqrt(-3))^6 = -27.

    python3 tools/make_newforms.py [PMAX]
"""

import json
import math
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))
from excised.arithmetic import kronecker_symbol, primes_up_to  # noqa: E402

OUT = Path(__file__).resolve().parents[1] / "src" / "excised" / "data"


def curve_ap(p: int) -> int:
    """a_p of y^2 + y = x^3 - x^2 - 10x - 20, for any prime p."""
    if p == 2:
        pts = sum(1 for x in range(2) for y in range(2)
                  if (y * y + y - (x ** 3 - x * x - 10 * x - 20)) % 2 == 0)
        return p - pts
    x = np.arange(p, dtype=np.int64)
    f = (x * x % p * x - x * x - 10 * x - 20) % p
    disc = (1 + 4 * f) % p
    squares = np.zeros(p, dtype=bool)
    squares[(x * x) % p] = True
    leg = np.where(disc == 0, 0, np.where(squares[disc], 1, -1))
    # number of y per x is 1 + (disc|p)
    return int(-leg.sum())


def cm_ap(p: int) -> int:
    """a_p of the weight-7 level-3 CM form."""
    if p == 3:
        return -27
    if p % 3 == 2:
        return 0
    w = complex(-0.5, math.sqrt(3) / 2)
    for a in range(math.isqrt(4 * p) + 1):
        for b in range(a + 1):
            if a * a - a * b + b * b == p:
                pi = a + b * w
                return int(round(2 * (pi ** 6).real))
    raise RuntimeError(f"no norm form representation of {p}")


def write(obj, name):
    path = OUT / f"{name}.json"
    path.write_text(json.dumps(obj, indent=1) + "\n", encoding="utf-8")
    print(f"wrote {path} ({len(obj['ap'])} primes)")


def main(pmax: int = 10_000):
    primes = [int(p) for p in primes_up_to(pmax)]
    write({
        "label": "11.2.a.a", "level": 11, "weight": 2, "case": "principal", "sign": 1,
        "ap": [{"p": p, "re": curve_ap(p) / math.sqrt(p), "im": 0.0} for p in primes],
        "chi": [{"p": p, "re": 0.0 if p == 11 else 1.0, "im": 0.0} for p in primes],
        "constants": {},
    }, "11.2.a.a")
    write({
        "label": "3.7.b.a", "level": 3, "weight": 7, "case": "self_cm", "sign": 1,
        "ap": [{"p": p, "re": cm_ap(p) / p ** 3, "im": 0.0} for p in primes],
        "chi": [{"p": p, "re": float(kronecker_symbol(-3, p)), "im": 0.0} for p in primes],
        "constants": {},
    }, "3.7.b.a")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 10_000)
