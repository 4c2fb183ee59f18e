"""Problem instances for robust low-rank matrix sensing.

Provides the three ingredients of an instance and the measurement map:

- ground truth: a PSD rank-``r_star`` matrix ``X* = U* U*^T`` of size d x d,
- measurement ensemble: m symmetric Gaussian matrices ``A_i``,
- noise: a sparse corruption vector s with ``floor(p*m)`` nonzero entries,

and ``y_i = <A_i, X*> + s_i`` with ``<A, X> = trace(A^T X)``.

Conventions
-----------
- arrays are float64; the ensemble is stored stacked with shape (m, d, d),
- every generator takes an explicit integer seed; the same seed reproduces
  the same object bit for bit,
- factor matrices are plain (d, r) arrays, measurement vectors plain (m,)
  arrays; only metadata-bearing objects get classes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

__all__ = [
    "GroundTruth",
    "MeasurementEnsemble",
    "NoiseSpec",
    "NoiseVector",
    "gen_ground_truth",
    "gen_ensemble",
    "stream_ensemble",
    "gen_noise",
    "apply_operator",
    "measure",
]

NOISE_DISTS = ("gaussian", "uniform", "laplace", "cauchy", "rademacher", "none")


@dataclass(frozen=True)
class GroundTruth:
    """Planted solution X* = factor @ factor.T, PSD with rank r_star.

    With ``unit_norm`` (the default) the factor is rescaled so that
    ``||X*||_F = 1``; for r_star = 1 this makes the planted vector unit
    length, which the signal/error diagnostics rely on.
    """

    d: int
    r_star: int
    factor: np.ndarray
    unit_norm: bool = True

    @property
    def x_star(self) -> np.ndarray:
        return self.factor @ self.factor.T


@dataclass(frozen=True)
class MeasurementEnsemble:
    """Stack of m symmetric d x d Gaussian measurement matrices.

    ``variant="goe"`` (default): A = (G + G^T)/2 with G i.i.d. standard
    normal, so diagonal entries have variance 1 and off-diagonal entries
    variance 1/2.  This makes Var<A, X> = ||X||_F^2 for symmetric X.

    ``variant="iid"``: symmetric with unit-variance entries everywhere
    (upper triangle mirrored).  Only used for the lower-bound demo of the
    l2-style corrector; the certifiers assume "goe" scaling.
    """

    d: int
    m: int
    matrices: np.ndarray
    seed: int
    variant: str = "goe"

    @property
    def flat(self) -> np.ndarray:
        """(m, d*d) view of the stack, for BLAS-backed contractions."""
        return self.matrices.reshape(self.m, self.d * self.d)


@dataclass(frozen=True)
class NoiseSpec:
    """Distribution of the sparse corruption.

    ``p`` is the corrupted fraction; exactly ``floor(p*m)`` of the m
    measurements are hit.  ``scale`` is the distribution's own scale
    parameter: sigma for gaussian, the half-width a for uniform on [-a, a],
    the diversity b for laplace, gamma for cauchy, the magnitude c for
    rademacher (+-c).  All are symmetric about zero.
    """

    p: float
    dist: str = "gaussian"
    scale: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"corrupted fraction p={self.p} outside [0, 1]")
        if self.dist not in NOISE_DISTS:
            raise ValueError(f"unknown noise dist {self.dist!r}, expected one of {NOISE_DISTS}")
        if self.dist == "none" and self.p != 0.0:
            raise ValueError("dist='none' requires p=0")
        if self.scale < 0:
            raise ValueError(f"scale must be nonnegative, got {self.scale}")

    @property
    def heavy_tailed(self) -> bool:
        return self.dist == "cauchy"

    @property
    def variance(self) -> float:
        """Per-entry variance on the corrupted support; undefined for cauchy."""
        if self.dist == "cauchy":
            raise ValueError("cauchy noise has no variance")
        return {
            "gaussian": self.scale**2,
            "uniform": self.scale**2 / 3.0,
            "laplace": 2.0 * self.scale**2,
            "rademacher": self.scale**2,
            "none": 0.0,
        }[self.dist]

    @classmethod
    def for_variance(cls, p: float, dist: str, variance: float, seed: int = 0) -> "NoiseSpec":
        """Spec whose entries have the given variance (cauchy unsupported)."""
        if dist == "cauchy":
            raise ValueError("cauchy noise has no variance; set scale directly")
        if variance < 0:
            raise ValueError("variance must be nonnegative")
        scale = {
            "gaussian": np.sqrt(variance),
            "uniform": np.sqrt(3.0 * variance),
            "laplace": np.sqrt(variance / 2.0),
            "rademacher": np.sqrt(variance),
            "none": 0.0,
        }[dist]
        return cls(p=p, dist=dist, scale=float(scale), seed=seed)


@dataclass(frozen=True)
class NoiseVector:
    """Realized corruption: s has support ``support`` and zeros elsewhere."""

    s: np.ndarray
    support: np.ndarray
    spec: NoiseSpec | None = None


def gen_ground_truth(d: int, r_star: int, unit_norm: bool = True, seed: int = 0) -> GroundTruth:
    """Draw a random PSD rank-r_star planted matrix.

    The factor has i.i.d. Gaussian entries; with ``unit_norm`` it is rescaled
    so ||X*||_F = 1.  Rank is exactly r_star almost surely.
    """
    if not 1 <= r_star <= d:
        raise ValueError(f"need 1 <= r_star <= d, got r_star={r_star}, d={d}")
    rng = np.random.default_rng(seed)
    factor = rng.standard_normal((d, r_star))
    if unit_norm:
        x = factor @ factor.T
        factor = factor / np.sqrt(np.linalg.norm(x, "fro"))
    return GroundTruth(d=d, r_star=r_star, factor=factor, unit_norm=unit_norm)


def _symmetrize(g: np.ndarray, variant: str) -> np.ndarray:
    # g: (b, d, d) raw Gaussian block -> symmetric matrices, in place where cheap
    if variant == "goe":
        return 0.5 * (g + np.transpose(g, (0, 2, 1)))
    if variant == "iid":
        # keep diagonal and upper triangle of g, mirror it down: all entries var 1
        a = np.triu(g)
        a = a + np.transpose(a, (0, 2, 1))
        d = g.shape[-1]
        a[:, np.arange(d), np.arange(d)] *= 0.5
        return a
    raise ValueError(f"unknown ensemble variant {variant!r}")


def gen_ensemble(d: int, m: int, seed: int = 0, variant: str = "goe") -> MeasurementEnsemble:
    """Draw the full measurement ensemble as one (m, d, d) array."""
    if d < 1 or m < 1:
        raise ValueError(f"need d >= 1 and m >= 1, got d={d}, m={m}")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((m, d, d))
    return MeasurementEnsemble(d=d, m=m, matrices=_symmetrize(g, variant), seed=seed, variant=variant)


def stream_ensemble(
    d: int, m: int, seed: int = 0, variant: str = "goe", block: int = 256
) -> Iterator[tuple[int, np.ndarray]]:
    """Yield (start_index, block_of_matrices) without materializing all m.

    Regenerates the exact same matrices as ``gen_ensemble`` with the same
    seed: standard_normal fills arrays with consecutive variates, so
    consecutive blocks concatenate to the one-shot draw bit for bit.
    """
    if block < 1:
        raise ValueError("block must be positive")
    rng = np.random.default_rng(seed)
    start = 0
    while start < m:
        b = min(block, m - start)
        g = rng.standard_normal((b, d, d))
        yield start, _symmetrize(g, variant)
        start += b


def gen_noise(m: int, spec: NoiseSpec) -> NoiseVector:
    """Realize the sparse corruption for m measurements.

    Support is floor(p*m) indices drawn uniformly without replacement; the
    values on the support are i.i.d. from the spec's distribution.  The same
    spec (including its seed) reproduces the same vector.
    """
    rng = np.random.default_rng(spec.seed)
    k = int(np.floor(spec.p * m))
    support = np.sort(rng.choice(m, size=k, replace=False)) if k > 0 else np.empty(0, dtype=np.intp)
    s = np.zeros(m)
    if k > 0 and spec.dist != "none":
        if spec.dist == "gaussian":
            vals = spec.scale * rng.standard_normal(k)
        elif spec.dist == "uniform":
            vals = rng.uniform(-spec.scale, spec.scale, k)
        elif spec.dist == "laplace":
            vals = rng.laplace(0.0, spec.scale, k)
        elif spec.dist == "cauchy":
            vals = spec.scale * rng.standard_cauchy(k)
        elif spec.dist == "rademacher":
            vals = spec.scale * (2.0 * rng.integers(0, 2, k) - 1.0)
        s[support] = vals
    return NoiseVector(s=s, support=support, spec=spec)


def apply_operator(ensemble: MeasurementEnsemble, x: np.ndarray) -> np.ndarray:
    """A(X): the m-vector of inner products <A_i, X>."""
    if x.shape != (ensemble.d, ensemble.d):
        raise ValueError(f"X has shape {x.shape}, expected {(ensemble.d, ensemble.d)}")
    return ensemble.flat @ np.ascontiguousarray(x).ravel()


def measure(
    ensemble: MeasurementEnsemble, truth: GroundTruth, noise: NoiseVector | None = None
) -> np.ndarray:
    """y = A(X*) + s.  Returns the plain (m,) measurement vector."""
    if truth.d != ensemble.d:
        raise ValueError(f"truth dimension {truth.d} != ensemble dimension {ensemble.d}")
    y = apply_operator(ensemble, truth.x_star)
    if noise is not None:
        if noise.s.shape != (ensemble.m,):
            raise ValueError(f"noise has shape {noise.s.shape}, expected {(ensemble.m,)}")
        y = y + noise.s
    return y
