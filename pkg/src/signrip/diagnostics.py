"""Signal/error decomposition against a rank-1 planted direction.

For unit u* and an iterate U, split U = u* r^T + E with r = U^T u* the
component along the planted direction and E = (I - u* u*^T) U its orthogonal
complement.  The recovery error then satisfies the exact identity

    ||UU^T - u*u*^T||_F^2 = (1 - ||r||^2)^2 + 2 ||E r||^2 + ||E E^T||_F^2

and the looser bound with ||E||^2 ||r||^2 and ||E||_F^4 on the right.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import GroundTruth

__all__ = ["Decomposition", "ErrorBoundReport", "decompose", "error_frobenius", "check_error_bound"]


@dataclass(frozen=True)
class Decomposition:
    r_t: np.ndarray  # (r',) signal coefficients U^T u*
    e_t: np.ndarray  # (d, r') error component, rows orthogonal to u*


def _unit_direction(truth: GroundTruth) -> np.ndarray:
    if truth.r_star != 1:
        raise ValueError("signal/error decomposition needs a rank-1 truth")
    u_star = truth.factor[:, 0]
    if abs(np.linalg.norm(u_star) - 1.0) > 1e-8:
        raise ValueError("planted direction must be unit norm (use unit_norm=True)")
    return u_star


def decompose(u: np.ndarray, truth: GroundTruth) -> Decomposition:
    """Split U into planted-direction and orthogonal components."""
    u_star = _unit_direction(truth)
    if u.ndim != 2 or u.shape[0] != truth.d:
        raise ValueError(f"factor has shape {u.shape}, expected ({truth.d}, r')")
    r_t = u.T @ u_star
    e_t = u - np.outer(u_star, r_t)
    return Decomposition(r_t=r_t, e_t=e_t)


def error_frobenius(u: np.ndarray, truth: GroundTruth) -> float:
    """||UU^T - X*||_F, computed directly."""
    return float(np.linalg.norm(u @ u.T - truth.x_star, "fro"))


@dataclass(frozen=True)
class ErrorBoundReport:
    lhs: float  # squared recovery error
    rhs: float  # (1-||r||^2)^2 + 2 ||E||^2 ||r||^2 + ||E||_F^4
    holds: bool


def check_error_bound(u: np.ndarray, truth: GroundTruth) -> ErrorBoundReport:
    """Check err^2 <= (1-||r||^2)^2 + 2||E||^2 ||r||^2 + ||E||_F^4."""
    dec = decompose(u, truth)
    lhs = error_frobenius(u, truth) ** 2
    r_sq = float(dec.r_t @ dec.r_t)
    e_spec = float(np.linalg.norm(dec.e_t, 2))
    e_fro = float(np.linalg.norm(dec.e_t, "fro"))
    rhs = (1.0 - r_sq) ** 2 + 2.0 * e_spec**2 * r_sq + e_fro**4
    return ErrorBoundReport(lhs=lhs, rhs=rhs, holds=bool(lhs <= rhs + 1e-8))
