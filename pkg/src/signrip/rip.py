"""Monte-Carlo certifiers for restricted-isometry properties of the ensemble.

Three related properties of a fixed (ensemble, noise) pair, each probed by
sampling the unit-Frobenius rank-r sphere and taking the worst deviation:

- l2-RIP:      (1/m)||A(X)||_2^2 close to ||X||_F^2,
- l1/l2-RIP:   (1/m)||A(X)||_1 close to sqrt(2/pi) ||X||_F,
- sign-RIP:    Q(X) = (1/m) sum_i Sign(<A_i,X> - s_i) A_i close to
               phi(X) * X/||X||_F in the rank-restricted norm,

where phi is the noise-dependent scaling function

    phi(X) = sqrt(2/pi) * (1 - p + p * E[exp(-s^2 / (2 c))]),

with c = ||X||_F^2 under the default "frob_squared" exponent convention
(the convention with a checkable closed form for Gaussian noise) or
c = ||X||_F under "frob".

Sampled maxima are lower bounds on the true suprema and are labeled
estimates throughout; no net enumeration is attempted.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .loss import f_r_norm, sign_weighted_adjoint
from .model import NOISE_DISTS, MeasurementEnsemble, NoiseVector, apply_operator

__all__ = [
    "SQRT_2_OVER_PI",
    "ScalingFunction",
    "RipEstimate",
    "QDeviation",
    "scaling_phi",
    "sign_rip_deficiency",
    "estimate_sign_rip",
    "estimate_l2_rip",
    "estimate_l1l2_rip",
    "q_deviation_l2",
]

SQRT_2_OVER_PI = float(np.sqrt(2.0 / np.pi))

_MODES = ("closed_form_gaussian", "monte_carlo")
_CONVENTIONS = ("frob", "frob_squared")


@dataclass(frozen=True)
class ScalingFunction:
    """Parameters of phi.  scale is the noise distribution's scale parameter.

    ``closed_form_gaussian`` evaluates the Gaussian integral
    E[exp(-s^2/(2c))] = 1/sqrt(1 + sigma^2/c) exactly; it applies to
    gaussian noise (and the degenerate "none").  Other distributions fall
    back to Monte Carlo with ``n_samples`` draws from ``seed``.
    """

    p: float
    dist: str = "gaussian"
    scale: float = 1.0
    mode: str = "closed_form_gaussian"
    exponent_convention: str = "frob_squared"
    n_samples: int = 100_000
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p={self.p} outside [0, 1]")
        if self.dist not in NOISE_DISTS:
            raise ValueError(f"unknown dist {self.dist!r}, expected one of {NOISE_DISTS}")
        if self.mode not in _MODES:
            raise ValueError(f"mode must be one of {_MODES}, got {self.mode!r}")
        if self.exponent_convention not in _CONVENTIONS:
            raise ValueError(
                f"exponent_convention must be one of {_CONVENTIONS}, got {self.exponent_convention!r}"
            )
        if self.n_samples < 1:
            raise ValueError("n_samples must be positive")


def _draw_noise_values(dist: str, scale: float, n: int, rng: np.random.Generator) -> np.ndarray:
    if dist == "gaussian":
        return scale * rng.standard_normal(n)
    if dist == "uniform":
        return rng.uniform(-scale, scale, n)
    if dist == "laplace":
        return rng.laplace(0.0, scale, n)
    if dist == "cauchy":
        return scale * rng.standard_cauchy(n)
    if dist == "rademacher":
        return scale * (2.0 * rng.integers(0, 2, n) - 1.0)
    raise ValueError(f"cannot sample dist {dist!r}")


def scaling_phi(sf: ScalingFunction, frob_x: float) -> float:
    """Evaluate phi at a probe with Frobenius norm frob_x (> 0)."""
    if frob_x <= 0:
        raise ValueError(f"frob_x must be positive, got {frob_x}")
    if sf.p == 0.0 or sf.dist == "none" or sf.scale == 0.0:
        return SQRT_2_OVER_PI
    c = frob_x**2 if sf.exponent_convention == "frob_squared" else frob_x
    if sf.mode == "closed_form_gaussian" and sf.dist == "gaussian":
        expectation = 1.0 / np.sqrt(1.0 + sf.scale**2 / c)
    else:
        # non-gaussian closed form unavailable: fall back to Monte Carlo
        rng = np.random.default_rng(sf.seed)
        s = _draw_noise_values(sf.dist, sf.scale, sf.n_samples, rng)
        expectation = float(np.mean(np.exp(-(s**2) / (2.0 * c))))
    return SQRT_2_OVER_PI * (1.0 - sf.p + sf.p * expectation)


class QDeviation(NamedTuple):
    """Worst sampled ||Q_l2(X) - X||_F plus the pure-noise matrix norm."""

    deviation: float
    noise_only: float


@dataclass(frozen=True)
class RipEstimate:
    """Sampled worst-case deficiency of one RIP flavor.

    ``delta_hat`` is the maximum deviation over the sampled probes and
    ``witness`` the probe achieving it; a lower bound on the true delta.
    ``phi_at_witness`` is filled for the Sign kind only.
    """

    kind: str  # "L2" | "L1L2" | "Sign"
    rank: int
    delta_hat: float
    n_samples: int
    witness: np.ndarray
    d: int
    m: int
    p: float = 0.0
    sigma: float = 0.0
    phi_at_witness: float | None = None

    CSV_HEADER = "kind,r,m,d,p,sigma,n_samples,delta_hat"

    def to_csv_row(self) -> str:
        return (
            f"{self.kind},{self.rank},{self.m},{self.d},{self.p:.10g},"
            f"{self.sigma:.10g},{self.n_samples},{self.delta_hat:.12g}"
        )


def _sample_rank_r_unit(rng: np.random.Generator, d: int, r: int) -> np.ndarray:
    # symmetric rank-<=r, unit Frobenius: Gaussian frame + Gaussian spectrum
    v, _ = np.linalg.qr(rng.standard_normal((d, r)))
    lam = rng.standard_normal(r)
    x = (v * lam) @ v.T
    return x / np.linalg.norm(lam)


def _noise_values(ensemble: MeasurementEnsemble, noise: NoiseVector | None) -> np.ndarray:
    if noise is None:
        return np.zeros(ensemble.m)
    if noise.s.shape != (ensemble.m,):
        raise ValueError(f"noise has shape {noise.s.shape}, expected {(ensemble.m,)}")
    return noise.s


def _default_sf(noise: NoiseVector | None) -> ScalingFunction:
    if noise is None or noise.spec is None:
        return ScalingFunction(p=0.0, dist="none")
    spec = noise.spec
    return ScalingFunction(p=spec.p, dist=spec.dist, scale=spec.scale, seed=spec.seed)


def sign_rip_deficiency(
    ensemble: MeasurementEnsemble,
    noise: NoiseVector | None,
    x: np.ndarray,
    r: int,
    sf: ScalingFunction,
) -> float:
    """||Q - phi * X/||X||_F||_{F,r} / phi at one probe X (nonzero)."""
    frob_x = float(np.linalg.norm(x, "fro"))
    if frob_x == 0.0:
        raise ValueError("probe X must be nonzero")
    s = _noise_values(ensemble, noise)
    q = sign_weighted_adjoint(ensemble, apply_operator(ensemble, x) - s)
    phi = scaling_phi(sf, frob_x)
    return f_r_norm(q - phi * x / frob_x, r) / phi


def estimate_sign_rip(
    ensemble: MeasurementEnsemble,
    noise: NoiseVector | None,
    r: int,
    n_samples: int,
    seed: int = 0,
    sf: ScalingFunction | None = None,
    probes: Sequence[np.ndarray] | Callable[[], Sequence[np.ndarray]] | None = None,
) -> RipEstimate:
    """Sampled maximum sign-RIP deficiency over the rank-r sphere.

    Draws n_samples random probes; ``probes`` may supply extra structured
    matrices (iterate-style UU^T - X*) that join the maximum.  All probes
    see the one shared noise realization.  The scaling function defaults to
    the one implied by the noise's own spec (noiseless constant if absent).
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    if sf is None:
        sf = _default_sf(noise)
    rng = np.random.default_rng(seed)
    extra = list(probes() if callable(probes) else (probes or []))
    best, witness = -np.inf, None
    for k in range(n_samples + len(extra)):
        x = _sample_rank_r_unit(rng, ensemble.d, r) if k < n_samples else extra[k - n_samples]
        val = sign_rip_deficiency(ensemble, noise, x, r, sf)
        if val > best:
            best, witness = val, x
    spec = noise.spec if noise is not None else None
    return RipEstimate(
        kind="Sign",
        rank=r,
        delta_hat=best,
        n_samples=n_samples,
        witness=witness,
        d=ensemble.d,
        m=ensemble.m,
        p=spec.p if spec is not None else 0.0,
        sigma=spec.scale if spec is not None else 0.0,
        phi_at_witness=scaling_phi(sf, float(np.linalg.norm(witness, "fro"))),
    )


def estimate_l2_rip(
    ensemble: MeasurementEnsemble, r: int, n_samples: int, seed: int = 0
) -> RipEstimate:
    """Sampled maximum of |(1/m)||A(X)||_2^2 - 1| over unit rank-r probes."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    best, witness = -np.inf, None
    for _ in range(n_samples):
        x = _sample_rank_r_unit(rng, ensemble.d, r)
        a = apply_operator(ensemble, x)
        val = abs(float(a @ a) / ensemble.m - 1.0)
        if val > best:
            best, witness = val, x
    return RipEstimate(
        kind="L2", rank=r, delta_hat=best, n_samples=n_samples,
        witness=witness, d=ensemble.d, m=ensemble.m,
    )


def estimate_l1l2_rip(
    ensemble: MeasurementEnsemble, r: int, n_samples: int, seed: int = 0
) -> RipEstimate:
    """Sampled maximum of |(1/m)||A(X)||_1 - sqrt(2/pi)| / sqrt(2/pi)."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    best, witness = -np.inf, None
    for _ in range(n_samples):
        x = _sample_rank_r_unit(rng, ensemble.d, r)
        val = abs(float(np.abs(apply_operator(ensemble, x)).mean()) - SQRT_2_OVER_PI) / SQRT_2_OVER_PI
        if val > best:
            best, witness = val, x
    return RipEstimate(
        kind="L1L2", rank=r, delta_hat=best, n_samples=n_samples,
        witness=witness, d=ensemble.d, m=ensemble.m,
    )


def q_deviation_l2(
    ensemble: MeasurementEnsemble,
    noise: NoiseVector | None,
    n_samples: int,
    seed: int = 0,
) -> QDeviation:
    """Worst sampled ||(1/m) sum_i (<A_i,X> - s_i) A_i - X||_F on the sphere.

    This is the l2-style corrector whose deviation does NOT vanish under
    corruption: it carries the pure-noise matrix (1/m) sum_{i in S} s_i A_i,
    returned separately as ``noise_only`` (zero when s = 0).
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    s = _noise_values(ensemble, noise)
    m, d = ensemble.m, ensemble.d
    noise_mat = (s @ ensemble.flat).reshape(d, d) / m
    rng = np.random.default_rng(seed)
    best = -np.inf
    for _ in range(n_samples):
        g = rng.standard_normal((d, d))
        x = 0.5 * (g + g.T)
        x /= np.linalg.norm(x, "fro")
        q = ((apply_operator(ensemble, x) - s) @ ensemble.flat).reshape(d, d) / m
        best = max(best, float(np.linalg.norm(q - x, "fro")))
    return QDeviation(deviation=best, noise_only=float(np.linalg.norm(noise_mat, "fro")))
