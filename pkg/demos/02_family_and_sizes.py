"""
From a newform to a matrix size
===============================

Build the family of even quadratic twists of 11.2.a.a, check its size
against the asymptotic count, and turn a lower-order coefficient into an
effective SO(2N).
"""

import math

from excised.arithmetic import (FamilySpec, bundled_newform, family_cardinality_estimate,
                                family_discriminants, logderiv_at_one)
from excised.calibration import (CoefficientIngredients, coefficient, n_eff_one_level,
                                 n_eff_pair, zero_density_R)

f = bundled_newform("11.2.a.a")
X = 100_000
fam = family_discriminants(FamilySpec(f, "principal_even", X))
est = family_cardinality_estimate(f, X)
print(f"{fam.size} even twists up to {X}, asymptotic {est:.1f}, "
      f"gap {abs(fam.size - est) / math.sqrt(X):.2f} sqrt(X)")
print("first few d:", fam[:8].tolist())

# L'/L(1, sym^2 f) sits on the edge of convergence; extrapolate from 1 + delta
ext = logderiv_at_one("sym_sq", f, 10_000)
print(f"L'/L(1, sym^2 f) ~ {ext.value:.5f}  (spread {ext.spread:.1e}, "
      f"truncation bound {ext.tail_bound:.1f})")

# e1 only needs |lambda_f(M)|^2, which the newform file carries
ing = CoefficientIngredients.for_newform(f, "principal_even", P=10_000)
print(f"e1 = {coefficient('e1', ing):.6f}")

# a1 needs A^1_f(0,0), which is not computed here; pass a value to see the size
R = zero_density_R("principal_even", f.level, X)
size = n_eff_one_level("principal_even", f.level, X, coefficient_value=R / 20)
print(f"R = {R:.4f}; a1 = R/20 gives N_eff = {size.value:.3f}, i.e. SO({size.dimension})")

# the pair-correlation route for a non-self-dual family
print("pair route, R=10, <e1>=1, <e2>=2:", round(n_eff_pair(10, 1, 2).value, 6))
