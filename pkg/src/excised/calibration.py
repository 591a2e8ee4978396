"""
Model parameters from arithmetic: lower-order coefficients, the density
scale R, effective matrix sizes, the orthogonal moment generating function,
vanishing predictions and the excision threshold fit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.special import gammaln

from . import arithmetic as ar
from .arithmetic import CaseSelector, LocalFactor, NewformData
from .ensembles import GroupKind
from .spectral import ks_distance, normalize_mean_one

__all__ = [
    "MissingIngredientError",
    "CoefficientIngredients",
    "COEFFICIENT_NAMES",
    "coefficient",
    "zero_density_R",
    "EffectiveSize",
    "n_eff_one_level",
    "n_eff_pair",
    "pair_objective",
    "mgf_so_even",
    "h_asym",
    "vanish_probability",
    "vanishing_prediction",
    "vanishing_annotation",
    "excision_profile",
    "calibrate_excision",
]


class MissingIngredientError(KeyError):
    def __init__(self, name: str, coefficient: str | None = None):
        self.name = name
        where = f" (needed by {coefficient})" if coefficient else ""
        super().__init__(f"missing ingredient {name!r}{where}")

    def __str__(self):
        return self.args[0]


# ingredients whose f-bar counterpart defaults to the complex conjugate
_BARRED = {
    "A1_00": "A1_00_bar",
    "chi_logderiv": "chi_logderiv_bar",
    "symsq_logderiv": "symsq_logderiv_bar",
    "eta_f": "eta_f_bar",
    "Atilde_00": "Atilde_00_bar",
    "L1_chi": "L1_chi_bar",
    "L1_ad": "L1_ad_bar",
    "L1_symsq": "L1_symsq_bar",
    "Btilde1_0": "Btilde1_0_bar",
    "L1prime_symsq": "L1prime_symsq_bar",
}
_UNBARRED = {v: k for k, v in _BARRED.items()}


@dataclass
class CoefficientIngredients:
    """Named scalars entering the coefficient formulas, with their provenance.

    Provenance tags are free-form; the constructors use ``user``,
    ``constant``, ``derived``, ``truncated`` and ``extrapolated``.
    Conjugate-form ingredients (suffix ``_bar``) fall back to the complex
    conjugate of their unbarred counterpart, and ``A1_00`` falls back to
    ``-B1_0 / 2``.
    """

    values: dict[str, complex] = field(default_factory=dict)
    provenance: dict[str, str] = field(default_factory=dict)
    uncertainty: dict[str, float] = field(default_factory=dict)

    def set(self, name: str, value, source: str = "user", uncertainty: float | None = None):
        v = complex(value)
        if not (math.isfinite(v.real) and math.isfinite(v.imag)):
            raise ValueError(f"ingredient {name!r} must be finite")
        self.values[name] = v
        self.provenance[name] = source
        if uncertainty is not None:
            self.uncertainty[name] = float(uncertainty)
        return self

    def has(self, name: str) -> bool:
        try:
            self.get(name)
        except MissingIngredientError:
            return False
        return True

    def get(self, name: str, coefficient: str | None = None) -> complex:
        if name in self.values:
            return self.values[name]
        if name in _UNBARRED and _UNBARRED[name] in self.values:
            return self.values[_UNBARRED[name]].conjugate()
        if name == "A1_00" and "B1_0" in self.values:
            return -self.values["B1_0"] / 2
        if name == "A1_00_bar" and self.has("A1_00"):
            return self.get("A1_00").conjugate()
        raise MissingIngredientError(name, coefficient)

    def source(self, name: str) -> str:
        if name in self.provenance:
            return self.provenance[name]
        if name in _UNBARRED and _UNBARRED[name] in self.values:
            return "conjugate of " + _UNBARRED[name]
        if name == "A1_00" and "B1_0" in self.values:
            return "derived from B1_0"
        raise MissingIngredientError(name)

    # -- constructors --------------------------------------------------------

    @classmethod
    def from_mapping(cls, mapping: Mapping, default_source: str = "user") -> "CoefficientIngredients":
        """Read ``{name: number}`` or ``{name: {"value": x, "source": tag}}``.

        Complex values are given as ``[re, im]`` or ``{"re": .., "im": ..}``.
        """
        ing = cls()
        for name, raw in mapping.items():
            source = default_source
            if isinstance(raw, Mapping) and "value" in raw:
                source = str(raw.get("source", default_source))
                raw = raw["value"]
            ing.set(name, _parse_number(raw), source)
        return ing

    @classmethod
    def for_newform(cls, newform: NewformData, case: CaseSelector | str | None = None,
                    P: int | None = None, discriminants: Iterable[int] | None = None
                    ) -> "CoefficientIngredients":
        """Everything computable from ``newform`` alone.

        Always fills the universal constants, psi(k/2), the level and
        |lambda_f(M)|^2.  eta_f is filled when ``case`` is given (the
        generic case also needs ``discriminants``).  With a prime cutoff
        ``P`` the sym^2 log-derivative at 1 is extrapolated from truncated
        Euler products.  Entries in ``newform.constants`` override all of
        these.
        """
        ing = cls()
        ing.set("euler_gamma", ar.special_constant("euler_gamma"), "constant")
        ing.set("stieltjes_1", ar.special_constant("stieltjes_1"), "constant")
        ing.set("digamma_k_half", ar.special_constant("digamma", newform.weight / 2), "constant")
        ing.set("level", newform.level, "newform")
        M = newform.level
        if M in newform.hecke:
            ing.set("lambda_M_abs2", abs(newform.hecke[M]) ** 2, "newform")
        if case is not None:
            case = CaseSelector(case)
            if case is not CaseSelector.GENERIC or discriminants is not None:
                ing.set("eta_f", ar.root_number_expectation(case, newform, discriminants), "derived")
        if P is not None:
            ext = ar.logderiv_at_one(LocalFactor.SYM_SQ, newform, P)
            ing.set("symsq_logderiv", ext.value, "extrapolated", ext.spread)
        for name, v in newform.constants.items():
            ing.set(name, v, "newform file")
        return ing


def _parse_number(raw) -> complex:
    if isinstance(raw, Mapping):
        return complex(float(raw.get("re", 0.0)), float(raw.get("im", 0.0)))
    if isinstance(raw, (list, tuple)):
        if len(raw) != 2:
            raise ValueError("complex ingredients are [re, im]")
        return complex(float(raw[0]), float(raw[1]))
    return complex(float(raw))


def _as_real(z: complex, scale: float = 1.0):
    if abs(z.imag) <= 1e-12 * max(1.0, abs(z), scale):
        return z.real
    return z


def _a1(g):
    psi, gam = g("digamma_k_half"), g("euler_gamma")
    return 1 - psi - g("A1_00") + gam - g("symsq_logderiv")


def _a2(g):
    psi, gam, g1 = g("digamma_k_half"), g("euler_gamma"), g("stieltjes_1")
    B1, B2 = g("B1_0"), g("B2_0")
    L1, L2 = g("symsq_logderiv"), g("symsq_logderiv2")
    return (-2 * psi - 2 * psi * gam + 2 * gam - 2 * g1
            + (2 * psi - 2 - 2 * gam - B1) * L1
            + (gam + 1 - psi) * B1 + B2 / 4 + 2 * L2)


def _a3(g):
    psi, g1 = g("digamma_k_half"), g("stieltjes_1")
    return 2 - 2 * psi + 2 * g1 - 2 * g("symsq_logderiv") - 2 * g("A1_00")


def _a4(g):
    # the printed formula also carries -4 i pi tau gamma, which depends on
    # the integration variable; it is left out here
    psi, gam, g1 = g("digamma_k_half"), g("euler_gamma"), g("stieltjes_1")
    B1, B2 = g("B1_0"), g("B2_0")
    L1, L2 = g("symsq_logderiv"), g("symsq_logderiv2")
    return (4 * psi + 4 * psi * gam + 4 * g1 + (2 * psi - 2 - 2 * gam) * B1
            + (4 + 4 * gam + 2 * B1 - 4 * psi) * L1 - B2 / 2 - L2)


def _b1(g):
    psi = g("digamma_k_half")
    return (1 - psi - g("xi0") * g("L1_chi") / g("L1_ad") - g("A1_00")
            + g("chi_logderiv"))


def _b2(g):
    psi, B1, B2 = g("digamma_k_half"), g("B1_0"), g("B2_0")
    xi0, xi1 = g("xi0"), g("xi1")
    return (-2 * psi + B1 - psi * B1 + B2 / 4 + 2 * g("chi_logderiv2")
            + g("chi_logderiv") * (-2 * xi0 + B1 + 2 - 2 * psi)
            + g("L1_chi") / g("L1_ad") * (2 * psi * xi0 - 2 * xi0 + 2 * xi1 - xi0 * B1))


def _c1(g):
    return g("digamma_k_half") + 0.5 * (
        g("A1_00") + g("A1_00_bar") - g("chi_logderiv") - g("chi_logderiv_bar")
        + g("symsq_logderiv") + g("symsq_logderiv_bar"))


def _c2(g):
    return -0.5 * (
        g("eta_f") * g("Atilde_00") * g("L1_chi") * g("L1_symsq_bar") / g("L1_ad")
        + g("eta_f_bar") * g("Atilde_00_bar") * g("L1_chi_bar") * g("L1_symsq") / g("L1_ad_bar"))


def _d1(g):
    psi = g("digamma_k_half")
    At, Atb = g("Atilde_00"), g("Atilde_00_bar")
    Lc, Lcb = g("L1_chi"), g("L1_chi_bar")
    first = g("eta_f") * g("L1_symsq_bar") / g("L1_ad") * (
        -0.5 * g("Btilde1_0") * Lc + psi * At * Lc - At * Lc)
    second = g("eta_f_bar") * g("L1_symsq") / g("L1_ad_bar") * (
        -0.5 * g("Btilde1_0_bar") * Lcb + psi * Atb * Lcb - Atb * Lcb)
    # both derivative terms carry eta_f as printed
    third = (g("eta_f") * g("L1prime_symsq_bar") / g("L1_ad") * At * Lc
             + g("eta_f") * g("L1prime_symsq") / g("L1_ad_bar") * Atb * Lcb)
    return first + second + third


def _e1(g):
    M = g("level").real
    lam2 = g("lambda_M_abs2").real
    # 1/2 log(M)^2 / (M / |lambda|^2 - 1), written to allow lambda = 0
    return 0.5 * math.log(M) ** 2 * lam2 / (M - lam2)


def _e2(g):
    gam = g("euler_gamma")
    return (-2 + gam * gam + 2 * g("stieltjes_1") - g("script_A2_0") / 2
            - g("adj_logderiv1"))


def _e3(g):
    return (16 + g("script_A3_0")) / 12


_FORMULAS = {
    "a1": _a1, "a2": _a2, "a3": _a3, "a4": _a4,
    "b1": _b1, "b2": _b2, "c1": _c1, "c2": _c2, "d1": _d1,
    "e1": _e1, "e2": _e2, "e3": _e3,
}
COEFFICIENT_NAMES = tuple(_FORMULAS)


def coefficient(name: str, ing: CoefficientIngredients):
    """Evaluate one lower-order coefficient; raises MissingIngredientError naming the gap."""
    try:
        fn = _FORMULAS[name]
    except KeyError:
        raise ValueError(f"unknown coefficient {name!r}; expected one of {COEFFICIENT_NAMES}") from None
    value = complex(fn(lambda key: ing.get(key, name)))
    return _as_real(value)


# ---------------------------------------------------------------------------
# Density scale and effective sizes
# ---------------------------------------------------------------------------

def _log_conductor(M: float, X: float) -> float:
    if X < 3:
        raise ValueError("X must be at least 3")
    arg = math.sqrt(M) * X / (2 * math.pi)
    if arg <= 1:
        raise ValueError("sqrt(M) X / 2 pi must exceed 1")
    return math.log(arg)


def zero_density_R(case: CaseSelector | str, M: float, X: float) -> float:
    case = CaseSelector(case)
    L = _log_conductor(M, X)
    if case is CaseSelector.PRINCIPAL_ODD:
        return L - 0.5
    if case is CaseSelector.GENERIC:
        return 2 * L
    return L


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class EffectiveSize:
    """Effective half-size N and the nearest admissible matrix dimension."""

    value: float
    kind: GroupKind
    provenance: str

    def __post_init__(self):
        if not self.value > 0:
            raise ValueError("effective size must be positive")
        object.__setattr__(self, "kind", GroupKind(self.kind))

    @property
    def dimension(self) -> int:
        if self.kind is GroupKind.U:
            return max(1, _round_half_up(self.value))
        if self.kind is GroupKind.SO_ODD:
            # nearest odd integer to 2N + 1
            return max(3, 2 * _round_half_up(self.value) + 1)
        return max(2, 2 * _round_half_up(self.value))

    @property
    def half_size(self) -> int:
        if self.kind is GroupKind.U:
            return self.dimension
        return self.dimension // 2

    def to_dict(self) -> dict:
        return {"value": self.value, "group": self.kind.value, "dimension": self.dimension,
                "half_size": self.half_size, "provenance": self.provenance}


_ONE_LEVEL = {
    CaseSelector.PRINCIPAL_EVEN: ("a1", GroupKind.SO_EVEN),
    CaseSelector.PRINCIPAL_ODD: ("a3", GroupKind.SO_ODD),
    CaseSelector.SELF_CM: ("b1", GroupKind.USP),
}


def n_eff_one_level(case: CaseSelector | str, M: float, X: float,
                    ing: CoefficientIngredients | None = None, *,
                    coefficient_value: float | None = None) -> EffectiveSize:
    """Match the leading lower-order term of the one-level density.

    The relevant coefficient (a1, a3 or b1) is evaluated from ``ing`` unless
    ``coefficient_value`` is given.
    """
    case = CaseSelector(case)
    if case is CaseSelector.GENERIC:
        raise ValueError("the generic case has no one-level lower-order term; use n_eff_pair")
    name, kind = _ONE_LEVEL[case]
    if coefficient_value is None:
        if ing is None:
            raise ValueError("supply ingredients or coefficient_value")
        c = coefficient(name, ing)
        if isinstance(c, complex):
            raise ValueError(f"{name} = {c} is not real")
    else:
        c = float(coefficient_value)
    if not c > 0:
        raise ValueError(f"{name} must be positive, got {c}")
    L = _log_conductor(M, X)
    if case is CaseSelector.PRINCIPAL_EVEN:
        value = L / (2 * c)
    elif case is CaseSelector.PRINCIPAL_ODD:
        value = (L - 0.5) / c - 0.5
    else:
        value = 2 * L / (2 * c)
    if not value > 0:
        raise ValueError(f"effective size {value} is not positive")
    return EffectiveSize(value, kind, f"one-level ({name}={c:.12g})")


def n_eff_pair(R: float, e1_avg: float, e2_avg: float) -> EffectiveSize:
    if not R > 0:
        raise ValueError("R must be positive")
    disc = 3 * e2_avg - 4 * e1_avg
    if not disc > 0:
        raise ValueError(f"no admissible unitary size: 3<e2> - 4<e1> = {disc:.6g} <= 0")
    return EffectiveSize(R / math.sqrt(disc), GroupKind.U, "pair correlation")


def pair_objective(N: float, R: float, e1: float, e2: float) -> float:
    """Squared L^2 norm over [0, 1] of (e1 - e2 sin^2 pi y)/R^2 + sin^2(pi y)/(3 N^2).

    Uses the exact moments of sin^2 (1/2) and sin^4 (3/8) on [0, 1].
    """
    u = e1 / R ** 2
    v = 1 / (3 * N * N) - e2 / R ** 2
    return u * u + u * v + 3 * v * v / 8


# ---------------------------------------------------------------------------
# Moments and the vanishing prediction
# ---------------------------------------------------------------------------

def mgf_so_even(N: int, s: float) -> float:
    """E |Lambda_A(1)|^s over SO(2N), evaluated through log-gamma."""
    if N < 1:
        raise ValueError("N must be positive")
    if not s > -0.5:
        raise ValueError("s must exceed -1/2")
    j = np.arange(1, N + 1, dtype=float)
    logv = (2 * N * s * math.log(2)
            + np.sum(gammaln(N + j - 1) + gammaln(s + j - 0.5)
                     - gammaln(j - 0.5) - gammaln(s + j + N - 1)))
    return float(math.exp(logv))


def h_asym(N: float) -> float:
    if not N > 0:
        raise ValueError("N must be positive")
    G = ar.special_constant("barnes_g_half")
    return 2 ** (-7 / 8) * G * math.pi ** (-0.25) * (2 * N) ** 0.375


def vanish_probability(d: float, k: float, delta_kappa: float, a_half: float) -> float:
    if d < 2:
        raise ValueError("d must be at least 2")
    if delta_kappa < 0:
        raise ValueError("delta_kappa must be nonnegative")
    p = 2 * a_half * h_asym(math.log(d)) * math.sqrt(delta_kappa) / d ** (k / 2 - 0.25)
    return min(1.0, max(0.0, p))


def _vanish_probabilities(d: np.ndarray, k, delta_kappa, a_half) -> np.ndarray:
    G = ar.special_constant("barnes_g_half")
    h = 2 ** (-7 / 8) * G * math.pi ** (-0.25) * (2 * np.log(d)) ** 0.375
    p = 2 * a_half * h * math.sqrt(delta_kappa) / d ** (k / 2 - 0.25)
    return np.clip(p, 0.0, 1.0)


def vanishing_prediction(discriminants: Sequence[int], k: float, delta_kappa: float,
                         a_half: float, X: float, mode: str = "sum"):
    """Predicted number of vanishing central values among prime d <= X in the family.

    ``mode="sum"`` adds the vanishing probabilities over the prime
    discriminants; ``"asymptotic"`` gives the closed form (divergent regime
    only); ``"classify"`` returns ``"divergent"`` or ``"convergent"``.
    ``k`` is half the form's weight.
    """
    if X < 3:
        raise ValueError("X must be at least 3")
    if mode == "classify":
        return "divergent" if k < 2.5 else "convergent"
    if mode == "asymptotic":
        if k >= 2.5:
            raise ValueError("the asymptotic holds only in the divergent regime k < 5/2")
        e = (5 - 2 * k) / 4
        return (2 * a_half * math.sqrt(delta_kappa) * h_asym(math.log(X)) / (4 * math.log(X))
                * X ** e / e)
    if mode == "sum":
        d = np.asarray(discriminants, dtype=np.int64)
        d = d[(d >= 2) & (d <= X)]
        d = d[np.isin(d, ar.primes_up_to(int(X)))]
        if d.size == 0:
            return 0.0
        return float(np.sum(_vanish_probabilities(d.astype(float), k, delta_kappa, a_half)))
    raise ValueError(f"unknown mode {mode!r}")


def vanishing_annotation(k: float) -> str | None:
    """Context for weights where the prose and the convergence exponent disagree."""
    if k == 2:
        return ("k = 2 lies in the divergent regime by the convergence exponent, "
                "although only finitely many vanishing even twists are expected; "
                "the prediction should be read with that caveat")
    return None


# ---------------------------------------------------------------------------
# Excision threshold fit
# ---------------------------------------------------------------------------

def excision_profile(model_first_eigs: Sequence[float], model_charpoly: Sequence[float],
                     data_first_zeros: Sequence[float], grid: int = 64):
    """KS distance between mean-one data and the mean-one excised model on a threshold grid.

    Returns ``(thresholds, ks)``.  The grid is geometric from the smallest
    to the median |Lambda_A(1)|.
    """
    x = np.asarray(model_first_eigs, dtype=float)
    c = np.asarray(model_charpoly, dtype=float)
    data = np.asarray(data_first_zeros, dtype=float)
    if x.size == 0 or data.size == 0:
        raise ValueError("model and data samples must be nonempty")
    if x.shape != c.shape:
        raise ValueError("model first eigenvalues and |Lambda_A(1)| must be paired")
    if grid < 2:
        raise ValueError("grid needs at least two points")
    data = normalize_mean_one(data)
    med = float(np.median(c))
    positive = c[c > 0]
    lo = float(positive.min()) if positive.size else 0.0
    if lo > 0 and med > lo:
        thresholds = np.geomspace(lo, med, grid)
    else:
        thresholds = np.full(1, lo)
    if np.any(c == 0):
        thresholds[0] = 0.0
    ks = np.empty(thresholds.size)
    for i, t in enumerate(thresholds):
        kept = x[c >= t]
        ks[i] = ks_distance(normalize_mean_one(kept), data) if kept.size else 1.0
    return thresholds, ks


def calibrate_excision(model_first_eigs: Sequence[float], model_charpoly: Sequence[float],
                       data_first_zeros: Sequence[float], grid: int = 64) -> float:
    """Threshold minimising the KS distance; ties go to the smaller threshold."""
    thresholds, ks = excision_profile(model_first_eigs, model_charpoly, data_first_zeros, grid)
    return float(thresholds[int(np.argmin(ks))])  # argmin returns the first minimum
