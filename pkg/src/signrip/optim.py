"""Subgradient descent on the robust l1 loss, plus a smooth-GD baseline.

SubGD iterates U_{t+1} = U_t - eta_t * D_t with D_t = Q U_t the l1
subgradient; the proposed step size divides a geometric decay by ||Q||_F.
Spectral initialization builds U_0 from the top eigenvectors of the
normalized sign-weighted matrix C = (1/m) sum_i Sign(y_i) A_i.

Step-size policies (step index t starts at 0; policies that divide by the
index use t+1, so the first step is well defined):

- QNormGeometric(eta0, rho):        eta_t = eta0 * rho^t / ||Q_t||_F
- Geometric(eta0, rho):             eta_t = eta0 * rho^t
- ResidualProportional(eta0):       eta_t = eta0 * (pi/2) * (1/m)||y - A(U_t U_t^T)||_1
  (the pi/2 makes eta_t track eta0 * ||U_t U_t^T - X*||_F in the noiseless
  population limit; folding it into eta0 instead gives the same policy)
- InverseT(eta0):                   eta_t = eta0 / (t+1)
- InverseSqrtT(eta0):               eta_t = eta0 / sqrt(t+1)
- Constant(eta0):                   eta_t = eta0

Every run produces a RunRecord with one row per visited iterate (T+1 rows
for T steps, including t=0); the final row records the step that would be
taken next, so step-accounting identities hold on every row.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Union

import numpy as np

from .diagnostics import decompose, error_frobenius
from .loss import sign_weighted_adjoint
from .model import GroundTruth, MeasurementEnsemble, apply_operator

__all__ = [
    "QNormGeometric",
    "Geometric",
    "ResidualProportional",
    "InverseT",
    "InverseSqrtT",
    "Constant",
    "StepPolicy",
    "Spectral",
    "RandomGaussian",
    "ZeroAdjacent",
    "InitSpec",
    "RunRecord",
    "StepSizeSingularity",
    "StationaryClass",
    "spectral_init",
    "random_init",
    "make_init",
    "subgd",
    "gd_l2",
    "classify_stationary",
    "schedule_alpha",
    "schedule_rho",
    "schedule_iterations",
]

OVERFLOW_NORM = 1e6


def _check_eta0(eta0: float) -> None:
    if eta0 <= 0:
        raise ValueError(f"eta0 must be positive, got {eta0}")


def _check_rho(rho: float) -> None:
    if not 0.0 < rho < 1.0:
        raise ValueError(f"rho must lie in (0, 1), got {rho}")


@dataclass(frozen=True)
class QNormGeometric:
    eta0: float
    rho: float

    def __post_init__(self):
        _check_eta0(self.eta0)
        _check_rho(self.rho)


@dataclass(frozen=True)
class Geometric:
    eta0: float
    rho: float

    def __post_init__(self):
        _check_eta0(self.eta0)
        _check_rho(self.rho)


@dataclass(frozen=True)
class ResidualProportional:
    eta0: float

    def __post_init__(self):
        _check_eta0(self.eta0)


@dataclass(frozen=True)
class InverseT:
    eta0: float

    def __post_init__(self):
        _check_eta0(self.eta0)


@dataclass(frozen=True)
class InverseSqrtT:
    eta0: float

    def __post_init__(self):
        _check_eta0(self.eta0)


@dataclass(frozen=True)
class Constant:
    eta0: float

    def __post_init__(self):
        _check_eta0(self.eta0)


StepPolicy = Union[QNormGeometric, Geometric, ResidualProportional, InverseT, InverseSqrtT, Constant]


class StepSizeSingularity(RuntimeError):
    """||Q||_F = 0 under QNormGeometric; carries the partial RunRecord."""

    def __init__(self, message: str, record: "RunRecord"):
        super().__init__(message)
        self.record = record


def _eta(policy: StepPolicy, t: int, q_frob: float, resid_abs_mean: float) -> float:
    if isinstance(policy, QNormGeometric):
        if q_frob == 0.0:
            raise ZeroDivisionError("||Q||_F = 0")
        return policy.eta0 * policy.rho**t / q_frob
    if isinstance(policy, Geometric):
        return policy.eta0 * policy.rho**t
    if isinstance(policy, ResidualProportional):
        return policy.eta0 * (np.pi / 2.0) * resid_abs_mean
    if isinstance(policy, InverseT):
        return policy.eta0 / (t + 1)
    if isinstance(policy, InverseSqrtT):
        return policy.eta0 / np.sqrt(t + 1)
    if isinstance(policy, Constant):
        return policy.eta0
    raise TypeError(f"unknown step policy {policy!r}")


@dataclass(frozen=True)
class Spectral:
    alpha: float

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")


@dataclass(frozen=True)
class RandomGaussian:
    scale: float

    def __post_init__(self):
        if self.scale < 0:
            raise ValueError(f"scale must be nonnegative, got {self.scale}")


@dataclass(frozen=True)
class ZeroAdjacent:
    """Random direction rescaled to exact Frobenius norm ``scale``."""

    scale: float

    def __post_init__(self):
        if self.scale < 0:
            raise ValueError(f"scale must be nonnegative, got {self.scale}")


InitSpec = Union[Spectral, RandomGaussian, ZeroAdjacent]


COLUMNS = (
    "t",
    "eta_t",
    "loss_l1",
    "loss_l2",
    "err_frob",
    "signal_norm",
    "error_norm",
    "error_frob",
    "q_frob",
)


@dataclass
class RunRecord:
    """Per-iteration trace of a run; one row per visited iterate.

    Columns: t, eta_t, loss_l1, loss_l2, err_frob (NaN without truth),
    signal_norm ||r_t||, error_norm ||E_t||_2, error_frob ||E_t||_F (NaN
    unless a rank-1 truth is supplied), q_frob.  ``status`` is "ok" or
    "overflow" (GD divergence abort).
    """

    data: np.ndarray
    status: str = "ok"

    @property
    def n_rows(self) -> int:
        return self.data.shape[0]

    def column(self, name: str) -> np.ndarray:
        return self.data[:, COLUMNS.index(name)]

    def final(self, name: str) -> float:
        return float(self.data[-1, COLUMNS.index(name)])

    def to_csv(self, path) -> None:
        header = ",".join(COLUMNS)
        np.savetxt(path, self.data, delimiter=",", header=header, comments="", fmt="%.12g")


def spectral_init(
    ensemble: MeasurementEnsemble, y: np.ndarray, r_prime: int, alpha: float
) -> np.ndarray:
    """Initialize from the sign-weighted matrix C = (1/m) sum_i Sign(y_i) A_i.

    Normalizes C, eigendecomposes, keeps the r_prime largest eigenvalues
    with negative ones clipped to zero, and returns
    U_0 = alpha * V * diag(clipped)^(1/2), a (d, r_prime) factor.
    """
    if not 1 <= r_prime <= ensemble.d:
        raise ValueError(f"need 1 <= r_prime <= d, got r_prime={r_prime}, d={ensemble.d}")
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    c = sign_weighted_adjoint(ensemble, y)
    c_norm = float(np.linalg.norm(c, "fro"))
    if c_norm == 0.0:
        raise ValueError("sign-weighted matrix C is zero (all measurements zero); cannot initialize")
    eigval, eigvec = np.linalg.eigh(c / c_norm)
    order = np.argsort(eigval, kind="stable")[::-1][:r_prime]  # descending, deterministic ties
    top = np.clip(eigval[order], 0.0, None)
    v = eigvec[:, order].copy()
    for j in range(v.shape[1]):  # fix eigenvector sign: first nonzero component positive
        nz = np.flatnonzero(np.abs(v[:, j]) > 1e-12)
        if nz.size and v[nz[0], j] < 0:
            v[:, j] = -v[:, j]
    return alpha * v * np.sqrt(top)


def random_init(d: int, r_prime: int, scale: float, seed: int = 0) -> np.ndarray:
    """i.i.d. Gaussian entries scaled so E||U_0||_F is about ``scale``."""
    if scale < 0:
        raise ValueError(f"scale must be nonnegative, got {scale}")
    rng = np.random.default_rng(seed)
    return rng.standard_normal((d, r_prime)) * (scale / np.sqrt(d * r_prime))


def make_init(
    init: InitSpec,
    ensemble: MeasurementEnsemble,
    y: np.ndarray,
    r_prime: int,
    seed: int = 0,
) -> np.ndarray:
    """Materialize an InitSpec into a concrete (d, r_prime) factor."""
    if isinstance(init, Spectral):
        return spectral_init(ensemble, y, r_prime, init.alpha)
    if isinstance(init, RandomGaussian):
        return random_init(ensemble.d, r_prime, init.scale, seed)
    if isinstance(init, ZeroAdjacent):
        rng = np.random.default_rng(seed)
        g = rng.standard_normal((ensemble.d, r_prime))
        nrm = np.linalg.norm(g, "fro")
        return (init.scale / nrm) * g if nrm > 0 else g * 0.0
    raise TypeError(f"unknown init spec {init!r}")


def _metrics_row(
    t: int,
    eta: float,
    resid: np.ndarray,
    m: int,
    u: np.ndarray,
    truth: GroundTruth | None,
    core_frob: float,
) -> list[float]:
    l1 = float(np.abs(resid).sum()) / (2 * m)
    l2 = float(resid @ resid) / (2 * m)
    err = signal = err_spec = err_fro = np.nan
    if truth is not None:
        err = error_frobenius(u, truth)
        if truth.r_star == 1:
            dec = decompose(u, truth)
            signal = float(np.linalg.norm(dec.r_t))
            err_spec = float(np.linalg.norm(dec.e_t, 2))
            err_fro = float(np.linalg.norm(dec.e_t, "fro"))
    return [float(t), eta, l1, l2, err, signal, err_spec, err_fro, core_frob]


def subgd(
    ensemble: MeasurementEnsemble,
    y: np.ndarray,
    u0: np.ndarray,
    policy: StepPolicy,
    iters: int,
    truth: GroundTruth | None = None,
    sign_zero: str = "zero",
) -> tuple[np.ndarray, RunRecord]:
    """Run T steps of subgradient descent on the l1 loss from U_0.

    Returns the final factor and a (T+1)-row RunRecord.  Raises
    StepSizeSingularity (with the partial record attached) if ||Q||_F
    vanishes while QNormGeometric still has steps to take.
    """
    if iters < 0:
        raise ValueError(f"iters must be >= 0, got {iters}")
    u = np.array(u0, dtype=float, copy=True)
    m = ensemble.m
    rows = []
    for t in range(iters + 1):
        resid = apply_operator(ensemble, u @ u.T) - y
        q = sign_weighted_adjoint(ensemble, resid, sign_zero)
        q_frob = float(np.linalg.norm(q, "fro"))
        resid_abs_mean = float(np.abs(resid).mean())
        try:
            eta = _eta(policy, t, q_frob, resid_abs_mean)
        except ZeroDivisionError:
            rows.append(_metrics_row(t, np.nan, resid, m, u, truth, q_frob))
            record = RunRecord(data=np.array(rows))
            if t == iters:  # no step pending; the undefined eta is only cosmetic
                return u, record
            raise StepSizeSingularity(
                f"||Q||_F = 0 at iteration {t}; QNormGeometric step undefined", record
            ) from None
        rows.append(_metrics_row(t, eta, resid, m, u, truth, q_frob))
        if t < iters:
            u = u - eta * (q @ u)
    return u, RunRecord(data=np.array(rows))


def gd_l2(
    ensemble: MeasurementEnsemble,
    y: np.ndarray,
    u0: np.ndarray,
    policy: StepPolicy,
    iters: int,
    truth: GroundTruth | None = None,
) -> tuple[np.ndarray, RunRecord]:
    """Gradient descent on the smooth l2 loss; same record schema as subgd.

    The q_frob column records the Frobenius norm of the gradient core
    (2/m) sum_i (<A_i, UU^T> - y_i) A_i.  Aborts with status "overflow"
    once ||U_t||_F exceeds 1e6 (the overfitting baseline can diverge).
    """
    if iters < 0:
        raise ValueError(f"iters must be >= 0, got {iters}")
    u = np.array(u0, dtype=float, copy=True)
    m, d = ensemble.m, ensemble.d
    rows = []
    for t in range(iters + 1):
        resid = apply_operator(ensemble, u @ u.T) - y
        core = (2.0 / m) * (resid @ ensemble.flat).reshape(d, d)
        core_frob = float(np.linalg.norm(core, "fro"))
        resid_abs_mean = float(np.abs(resid).mean())
        try:
            eta = _eta(policy, t, core_frob, resid_abs_mean)
        except ZeroDivisionError:
            eta = np.nan
        rows.append(_metrics_row(t, eta, resid, m, u, truth, core_frob))
        if np.linalg.norm(u, "fro") > OVERFLOW_NORM:
            return u, RunRecord(data=np.array(rows), status="overflow")
        if t < iters:
            if not np.isfinite(eta):
                break
            u = u - eta * (core @ u)
    return u, RunRecord(data=np.array(rows))


class StationaryClass(enum.Enum):
    NEAR_TRUTH = "NearTruth"
    NEAR_ORIGIN = "NearOrigin"
    OTHER = "Other"


_DEFAULT_C = 2.0 * np.sqrt(2.0)


def classify_stationary(
    u: np.ndarray,
    truth: GroundTruth,
    delta: float,
    c_truth: float = _DEFAULT_C,
    c_origin: float = _DEFAULT_C,
) -> StationaryClass:
    """Classify an iterate against the two benign stationary regions.

    NearTruth: ||UU^T - X*||_F <= c_truth * delta; otherwise NearOrigin if
    ||U||_2^2 <= c_origin * delta; otherwise Other.  Defaults use the
    derived constant 2*sqrt(2) for both radii.
    """
    if truth.r_star != 1:
        raise ValueError("classification is defined for rank-1 truth only")
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    if error_frobenius(u, truth) <= c_truth * delta:
        return StationaryClass.NEAR_TRUTH
    if np.linalg.norm(u, 2) ** 2 <= c_origin * delta:
        return StationaryClass.NEAR_ORIGIN
    return StationaryClass.OTHER


def schedule_alpha(delta: float, r_prime: int) -> float:
    """Initialization scale sqrt(delta) / r_prime^(1/4) (unit constant)."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    return float(np.sqrt(delta) / r_prime**0.25)


def schedule_rho(eta0: float, alpha: float) -> float:
    """Decay rate 1 - eta0/log(1/alpha) (unit constant); needs alpha < 1."""
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    rho = 1.0 - eta0 / np.log(1.0 / alpha)
    if not 0.0 < rho < 1.0:
        raise ValueError(f"derived rho={rho:.4g} outside (0, 1); shrink eta0")
    return float(rho)


def schedule_iterations(eta0: float, delta: float, r_prime: int) -> int:
    """Early-stopping horizon ceil(log(r_prime/delta)/eta0) (unit constant)."""
    if delta <= 0 or eta0 <= 0:
        raise ValueError("eta0 and delta must be positive")
    if r_prime / delta <= 1.0:
        raise ValueError("need r_prime/delta > 1 for a positive horizon")
    return int(np.ceil(np.log(r_prime / delta) / eta0))
