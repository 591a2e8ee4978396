"""
Haar eigenangle samplers for SO(2N), SO(2N+1), USp(2N) and U(N).

The three self-conjugate groups are sampled through their Jacobi-ensemble
representation: with x = 2 cos(theta) the Weyl measure becomes a beta = 2
Jacobi ensemble on [-2, 2], which is realised exactly by the Killip-Nenciu
tridiagonal model (independent Beta-distributed Verblunsky coefficients,
Geronimus relations, then a symmetric tridiagonal eigensolve).

U(N) is sampled from a phase-corrected QR factorisation of a complex
Ginibre matrix.  Dense oracles (Gram-Schmidt for U and USp, Householder QR
for SO) provide independent routes used by the test-suite.

All randomness is derived from ``(seed, chunk index)`` through
``numpy.random.SeedSequence``; the chunk layout depends only on ``count``,
so results are bit-identical for any number of worker threads.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np

__all__ = [
    "GroupKind",
    "EnsembleId",
    "EigenangleSample",
    "SampleBatch",
    "JacobiParams",
    "BudgetExceededError",
    "jacobi_params_for",
    "sample_eigenangles",
    "sample_unitary_oracle",
    "sample_dense_oracle",
    "weyl_log_density",
    "DEFAULT_BUDGET",
    "CHUNK_SIZE",
]

#: Maximum ``count * N**2`` accepted by the samplers unless overridden.
DEFAULT_BUDGET = 4.0e9
#: Samples per RNG stream. Changing this changes every seeded output.
CHUNK_SIZE = 8192

_SEED_MASK = (1 << 64) - 1


class GroupKind(str, enum.Enum):
    SO_EVEN = "SO_even"
    SO_ODD = "SO_odd"
    USP = "USp"
    U = "U"

    @classmethod
    def parse(cls, value: "str | GroupKind") -> "GroupKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "_")
        aliases = {
            "so_even": cls.SO_EVEN, "so_odd": cls.SO_ODD,
            "usp": cls.USP, "sp": cls.USP, "u": cls.U,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown group kind {value!r}") from None


@dataclass(frozen=True)
class EnsembleId:
    """A compact group together with its half-size ``N``.

    For ``U`` the half-size is the full matrix size.
    """

    kind: GroupKind
    half_size: int

    def __post_init__(self):
        object.__setattr__(self, "kind", GroupKind.parse(self.kind))
        if int(self.half_size) != self.half_size or self.half_size < 1:
            raise ValueError(f"half_size must be a positive integer, got {self.half_size!r}")
        object.__setattr__(self, "half_size", int(self.half_size))

    @property
    def dimension(self) -> int:
        n = self.half_size
        return {GroupKind.SO_EVEN: 2 * n, GroupKind.SO_ODD: 2 * n + 1,
                GroupKind.USP: 2 * n, GroupKind.U: n}[self.kind]

    @property
    def angle_range(self) -> tuple[float, float]:
        if self.kind is GroupKind.U:
            return 0.0, 2.0 * math.pi
        return 0.0, math.pi

    def __str__(self) -> str:
        name = {GroupKind.SO_EVEN: "SO", GroupKind.SO_ODD: "SO",
                GroupKind.USP: "USp", GroupKind.U: "U"}[self.kind]
        return f"{name}({self.dimension})"


@dataclass(frozen=True)
class EigenangleSample:
    """Sorted nontrivial eigenangles of one matrix.

    For the orthogonal and symplectic groups these are the N angles in
    [0, pi] representing conjugate pairs; the fixed eigenvalue 1 of
    SO(2N+1) is not listed.  For U(N) they are the N angles in [0, 2 pi).
    """

    ensemble: EnsembleId
    angles: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.angles, dtype=float)
        if a.ndim != 1 or a.size != self.ensemble.half_size:
            raise ValueError(f"expected {self.ensemble.half_size} angles, got shape {a.shape}")
        if np.any(np.diff(a) < 0):
            raise ValueError("angles must be sorted ascending")
        lo, hi = self.ensemble.angle_range
        if a.size and (a[0] < lo or a[-1] > hi):
            raise ValueError("angle outside the ensemble's range")
        object.__setattr__(self, "angles", a)


class SampleBatch:
    """Many eigenangle samples from one ensemble, stored as a ``(count, N)`` array.

    Iterating or indexing with an integer yields :class:`EigenangleSample`;
    the vectorised statistics in :mod:`excised.spectral` accept the batch
    directly.
    """

    def __init__(self, ensemble: EnsembleId, angles: np.ndarray):
        angles = np.asarray(angles, dtype=float)
        if angles.ndim != 2 or angles.shape[1] != ensemble.half_size:
            raise ValueError(f"angles must have shape (count, {ensemble.half_size})")
        self.ensemble = ensemble
        self.angles = angles

    def __len__(self) -> int:
        return self.angles.shape[0]

    def __getitem__(self, idx):
        if isinstance(idx, (int, np.integer)):
            return EigenangleSample(self.ensemble, self.angles[idx])
        return SampleBatch(self.ensemble, self.angles[idx])

    def __iter__(self) -> Iterator[EigenangleSample]:
        for row in self.angles:
            yield EigenangleSample(self.ensemble, row)

    def __eq__(self, other) -> bool:
        return (isinstance(other, SampleBatch) and self.ensemble == other.ensemble
                and np.array_equal(self.angles, other.angles))

    def __repr__(self) -> str:
        return f"SampleBatch({self.ensemble}, count={len(self)})"

    @classmethod
    def from_samples(cls, samples: Sequence[EigenangleSample]) -> "SampleBatch":
        if not samples:
            raise ValueError("cannot build a batch from no samples")
        ens = samples[0].ensemble
        if any(s.ensemble != ens for s in samples):
            raise ValueError("samples come from different ensembles")
        return cls(ens, np.stack([s.angles for s in samples]))


@dataclass(frozen=True)
class JacobiParams:
    """Exponents of the weight (1 - x)^a (1 + x)^b, x = cos(theta)."""

    a: float
    b: float

    def __post_init__(self):
        if not (self.a > -1 and self.b > -1):
            raise ValueError("Jacobi exponents must exceed -1")


class BudgetExceededError(ValueError):
    """Raised when ``count * N**2`` exceeds the sampler budget."""


def jacobi_params_for(ensemble: EnsembleId) -> JacobiParams:
    kind = ensemble.kind
    if kind is GroupKind.SO_EVEN:
        return JacobiParams(-0.5, -0.5)
    if kind is GroupKind.SO_ODD:
        return JacobiParams(0.5, -0.5)
    if kind is GroupKind.USP:
        return JacobiParams(0.5, 0.5)
    raise ValueError("U(N) eigenangles do not form a Jacobi ensemble on [-1, 1]")


# ---------------------------------------------------------------------------
# RNG plumbing
# ---------------------------------------------------------------------------

def _chunk_rng(seed: int, chunk: int, stream: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed) & _SEED_MASK, spawn_key=(stream, chunk))
    return np.random.Generator(np.random.Philox(ss))


def _check_budget(n: int, count: int, budget: float | None) -> None:
    budget = DEFAULT_BUDGET if budget is None else budget
    if count * n * n > budget:
        raise BudgetExceededError(
            f"count*N^2 = {count * n * n:.3g} exceeds the sampling budget {budget:.3g}; "
            "lower count or raise the budget explicitly")


def _run_chunked(draw: Callable[[np.random.Generator, int], np.ndarray], count: int,
                 seed: int, stream: int, workers: int) -> np.ndarray:
    if count < 1:
        raise ValueError("count must be at least 1")
    sizes = [min(CHUNK_SIZE, count - start) for start in range(0, count, CHUNK_SIZE)]

    def job(i: int) -> np.ndarray:
        return draw(_chunk_rng(seed, i, stream), sizes[i])

    if workers <= 1 or len(sizes) == 1:
        parts = [job(i) for i in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, range(len(sizes))))
    return np.concatenate(parts, axis=0)


# stream ids keep the default samplers and the oracles on disjoint streams
_STREAMS = {GroupKind.SO_EVEN: 1, GroupKind.SO_ODD: 2, GroupKind.USP: 3, GroupKind.U: 4}
_ORACLE_OFFSET = 100


# ---------------------------------------------------------------------------
# Default samplers
# ---------------------------------------------------------------------------

def _jacobi_tridiagonal_angles(rng: np.random.Generator, n: int, size: int,
                               params: JacobiParams) -> np.ndarray:
    """Killip-Nenciu model for density prod|x_i-x_j|^2 prod (2-x)^a (2+x)^b on [-2,2]."""
    a, b = params.a, params.b
    # verblunsky[:, k + 1] holds alpha_k for k = -1 .. 2n-1; alpha_{-1} = alpha_{2n-1} = -1
    alpha = np.empty((size, 2 * n + 1))
    alpha[:, 0] = -1.0
    alpha[:, 2 * n] = -1.0
    for k in range(2 * n - 1):
        if k % 2 == 0:
            s = (2 * n - k - 2) / 2 + a + 1
            t = (2 * n - k - 2) / 2 + b + 1
        else:
            s = (2 * n - k - 3) / 2 + a + b + 2
            t = (2 * n - k - 1) / 2
        # density on (-1, 1) proportional to (1 - x)^(s-1) (1 + x)^(t-1)
        alpha[:, k + 1] = 1.0 - 2.0 * rng.beta(s, t, size=size)

    def al(k: int) -> np.ndarray:
        return alpha[:, k + 1]

    jac = np.zeros((size, n, n))
    for k in range(n):
        # alpha_{-1} = -1 kills the alpha_{-2} term when k = 0
        prev = al(2 * k - 2) if k else 0.0
        jac[:, k, k] = (1 - al(2 * k - 1)) * al(2 * k) - (1 + al(2 * k - 1)) * prev
    for k in range(n - 1):
        off = np.sqrt(np.clip((1 - al(2 * k - 1)) * (1 - al(2 * k) ** 2) * (1 + al(2 * k + 1)), 0, None))
        jac[:, k, k + 1] = off
        jac[:, k + 1, k] = off
    x = np.linalg.eigvalsh(jac)  # ascending in x, so descending in theta
    theta = np.arccos(np.clip(0.5 * x, -1.0, 1.0))
    return theta[:, ::-1].copy()


def _ginibre(rng: np.random.Generator, size: int, n: int) -> np.ndarray:
    z = rng.standard_normal((size, n, n, 2))
    return (z[..., 0] + 1j * z[..., 1]) / math.sqrt(2.0)


def _unitary_qr_angles(rng: np.random.Generator, n: int, size: int) -> np.ndarray:
    z = _ginibre(rng, size, n)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=1, axis2=2)
    q = q * (d / np.abs(d))[:, None, :]
    ev = np.linalg.eigvals(q)
    return np.sort(np.mod(np.angle(ev), 2 * math.pi), axis=1)


def sample_eigenangles(ensemble: EnsembleId, count: int, seed: int, *,
                       workers: int = 1, budget: float | None = None) -> SampleBatch:
    """Draw ``count`` independent Haar eigenangle samples.

    Parameters
    ----------
    ensemble : EnsembleId
    count : int
        Number of matrices.
    seed : int
        Any integer; reduced modulo 2**64.
    workers : int
        Thread count. Has no effect on the values returned.
    budget : float, optional
        Upper bound on ``count * N**2``; defaults to :data:`DEFAULT_BUDGET`.
    """
    n = ensemble.half_size
    _check_budget(n, count, budget)
    stream = _STREAMS[ensemble.kind]
    if ensemble.kind is GroupKind.U:
        def draw(rng, size):
            return _unitary_qr_angles(rng, n, size)
    else:
        params = jacobi_params_for(ensemble)

        def draw(rng, size):
            return _jacobi_tridiagonal_angles(rng, n, size, params)
    return SampleBatch(ensemble, _run_chunked(draw, count, seed, stream, workers))


# ---------------------------------------------------------------------------
# Dense oracles
# ---------------------------------------------------------------------------

def _gram_schmidt_unitary(z: np.ndarray) -> np.ndarray:
    """Column Gram-Schmidt; the implied triangular factor has positive diagonal."""
    q = np.empty_like(z)
    n = z.shape[-1]
    for j in range(n):
        v = z[:, :, j].copy()
        for _ in range(2):  # second pass restores orthogonality lost to rounding
            if j:
                coef = np.einsum("bij,bi->bj", q[:, :, :j].conj(), v)
                v -= np.einsum("bij,bj->bi", q[:, :, :j], coef)
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        q[:, :, j] = v
    return q


def _unitary_gs_angles(rng: np.random.Generator, n: int, size: int) -> np.ndarray:
    q = _gram_schmidt_unitary(_ginibre(rng, size, n))
    ev = np.linalg.eigvals(q)
    return np.sort(np.mod(np.angle(ev), 2 * math.pi), axis=1)


def _paired_angles(ev: np.ndarray, n: int, fixed_one: bool) -> np.ndarray:
    ang = np.sort(np.abs(np.angle(ev)), axis=1)
    if fixed_one:
        ang = ang[:, 1:]
    return ang[:, ::2][:, :n]


def _special_orthogonal_angles(rng: np.random.Generator, n: int, size: int, odd: bool) -> np.ndarray:
    dim = 2 * n + 1 if odd else 2 * n
    z = rng.standard_normal((size, dim, dim))
    q, r = np.linalg.qr(z)
    sgn = np.sign(np.diagonal(r, axis1=1, axis2=2))
    sgn[sgn == 0] = 1.0
    q = q * sgn[:, None, :]
    det = np.linalg.det(q)
    q[:, :, 0] *= np.sign(det)[:, None]
    return _paired_angles(np.linalg.eigvals(q), n, odd)


def _symplectic_angles(rng: np.random.Generator, n: int, size: int) -> np.ndarray:
    # quaternionic Gram-Schmidt: each new column v brings its partner J conj(v),
    # which goes in column n + k so that U J = J conj(U)
    z = _ginibre(rng, size, 2 * n)
    done = np.zeros((size, 2 * n, 2 * n), dtype=complex)
    u = np.zeros((size, 2 * n, 2 * n), dtype=complex)
    for k in range(n):
        v = z[:, :, k].copy()
        for _ in range(2):
            if k:
                prev = done[:, :, : 2 * k]
                coef = np.einsum("bij,bi->bj", prev.conj(), v)
                v -= np.einsum("bij,bj->bi", prev, coef)
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        partner = np.concatenate([-v[:, n:].conj(), v[:, :n].conj()], axis=1)
        done[:, :, 2 * k] = v
        done[:, :, 2 * k + 1] = partner
        u[:, :, k] = v
        u[:, :, n + k] = partner
    return _paired_angles(np.linalg.eigvals(u), n, False)


def sample_unitary_oracle(n: int, count: int, seed: int, *, workers: int = 1) -> SampleBatch:
    """Haar U(N) eigenangles through explicit Gram-Schmidt orthonormalisation.

    Independent of the Householder route used by :func:`sample_eigenangles`.
    """
    ens = EnsembleId(GroupKind.U, n)
    _check_budget(n, count, None)

    def draw(rng, size):
        return _unitary_gs_angles(rng, n, size)
    return SampleBatch(ens, _run_chunked(draw, count, seed, _STREAMS[GroupKind.U] + _ORACLE_OFFSET, workers))


def sample_dense_oracle(ensemble: EnsembleId, count: int, seed: int, *, workers: int = 1) -> SampleBatch:
    """Eigenangles of explicitly constructed Haar matrices (any of the four groups)."""
    n = ensemble.half_size
    if ensemble.kind is GroupKind.U:
        return sample_unitary_oracle(n, count, seed, workers=workers)
    _check_budget(2 * n + 1, count, None)
    if ensemble.kind is GroupKind.USP:
        def draw(rng, size):
            return _symplectic_angles(rng, n, size)
    else:
        odd = ensemble.kind is GroupKind.SO_ODD

        def draw(rng, size):
            return _special_orthogonal_angles(rng, n, size, odd)
    stream = _STREAMS[ensemble.kind] + _ORACLE_OFFSET
    return SampleBatch(ensemble, _run_chunked(draw, count, seed, stream, workers))


# ---------------------------------------------------------------------------

def weyl_log_density(ensemble: EnsembleId, angles) -> float:
    """Log of the unnormalised Weyl density at ``angles``.

    Returns ``-inf`` when two angles coincide (or an angle sits on a zero
    of the one-body weight).
    """
    th = np.asarray(angles, dtype=float)
    if th.shape != (ensemble.half_size,):
        raise ValueError(f"expected {ensemble.half_size} angles")
    lo, hi = ensemble.angle_range
    if np.any(th < lo) or np.any(th > hi):
        raise ValueError("angle outside the ensemble's range")
    iu = np.triu_indices(th.size, 1)
    with np.errstate(divide="ignore"):
        if ensemble.kind is GroupKind.U:
            z = np.exp(1j * th)
            total = 2.0 * np.sum(np.log(np.abs(z[:, None] - z[None, :])[iu]))
            return float(total)
        c = np.cos(th)
        total = 2.0 * np.sum(np.log(np.abs(c[:, None] - c[None, :])[iu]))
        if ensemble.kind is GroupKind.SO_ODD:
            total += np.sum(np.log(np.sin(th / 2) ** 2))
        elif ensemble.kind is GroupKind.USP:
            total += np.sum(np.log(np.sin(th) ** 2))
    return float(total)
