"""Losses and (sub)gradients for the factorized sensing objective.

f_l1(U) = (1/2m) ||y - A(UU^T)||_1     (robust objective)
f_l2(U) = (1/2m) ||y - A(UU^T)||_2^2   (smooth baseline)

All sign weights go through the residual r = A(UU^T) - y, which keeps the
noise sign convention unambiguous.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import MeasurementEnsemble, apply_operator

__all__ = [
    "SubgradientResult",
    "residual",
    "loss_l1",
    "loss_l2",
    "subgrad_l1",
    "grad_l2",
    "sign_weighted_adjoint",
    "f_r_norm",
]


@dataclass(frozen=True)
class SubgradientResult:
    """One subgradient evaluation of f_l1.

    direction = q_matrix @ U, where q_matrix is the sign-weighted adjoint
    (1/m) sum_i Sign(<A_i, UU^T> - y_i) A_i and q_frob its Frobenius norm.
    """

    direction: np.ndarray
    q_matrix: np.ndarray
    q_frob: float


def _check_factor(ensemble: MeasurementEnsemble, u: np.ndarray) -> None:
    if u.ndim != 2 or u.shape[0] != ensemble.d:
        raise ValueError(f"factor has shape {u.shape}, expected ({ensemble.d}, r')")


def residual(y: np.ndarray, ensemble: MeasurementEnsemble, u: np.ndarray) -> np.ndarray:
    """A(UU^T) - y, the signed residual vector."""
    _check_factor(ensemble, u)
    return apply_operator(ensemble, u @ u.T) - y


def loss_l1(y: np.ndarray, ensemble: MeasurementEnsemble, u: np.ndarray) -> float:
    return float(np.abs(residual(y, ensemble, u)).sum() / (2 * ensemble.m))


def loss_l2(y: np.ndarray, ensemble: MeasurementEnsemble, u: np.ndarray) -> float:
    r = residual(y, ensemble, u)
    return float(r @ r / (2 * ensemble.m))


def _signs(z: np.ndarray, sign_zero: str) -> np.ndarray:
    w = np.sign(z)
    if sign_zero == "zero":
        return w
    if sign_zero == "plus":
        return np.where(z == 0.0, 1.0, w)
    if sign_zero == "minus":
        return np.where(z == 0.0, -1.0, w)
    raise ValueError(f"sign_zero must be 'zero', 'plus' or 'minus', got {sign_zero!r}")


def sign_weighted_adjoint(
    ensemble: MeasurementEnsemble, z: np.ndarray, sign_zero: str = "zero"
) -> np.ndarray:
    """(1/m) sum_i Sign(z_i) A_i for an arbitrary m-vector z.

    Symmetric because the A_i are; this is the Q matrix of the subgradient
    when z is the residual, and the spectral-init matrix when z = y.
    """
    if z.shape != (ensemble.m,):
        raise ValueError(f"z has shape {z.shape}, expected {(ensemble.m,)}")
    w = _signs(z, sign_zero)
    q = (w @ ensemble.flat).reshape(ensemble.d, ensemble.d)
    return q / ensemble.m


def subgrad_l1(
    y: np.ndarray, ensemble: MeasurementEnsemble, u: np.ndarray, sign_zero: str = "zero"
) -> SubgradientResult:
    """Subgradient of f_l1 at U: D = Q U with Q the sign-weighted adjoint.

    At points with a zero residual entry the subdifferential is a set;
    ``sign_zero`` picks the element (Sign(0) = 0 by default, the minimum-norm
    choice on that coordinate).
    """
    q = sign_weighted_adjoint(ensemble, residual(y, ensemble, u), sign_zero)
    return SubgradientResult(direction=q @ u, q_matrix=q, q_frob=float(np.linalg.norm(q, "fro")))


def grad_l2(y: np.ndarray, ensemble: MeasurementEnsemble, u: np.ndarray) -> np.ndarray:
    """Gradient of f_l2 at U: (2/m) sum_i (<A_i, UU^T> - y_i) A_i U."""
    r = residual(y, ensemble, u)
    g = (r @ ensemble.flat).reshape(ensemble.d, ensemble.d)
    return (2.0 / ensemble.m) * (g @ u)


def f_r_norm(m: np.ndarray, r: int) -> float:
    """Rank-restricted Frobenius norm: l2 norm of the top r singular values.

    Equals max_{rank(Y)<=r, ||Y||_F=1} <M, Y>; coincides with ||M||_F when
    r >= rank(M) and with the spectral norm when r = 1.
    """
    if m.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {m.shape}")
    if not 1 <= r <= min(m.shape):
        raise ValueError(f"need 1 <= r <= min{m.shape}, got r={r}")
    s = np.linalg.svd(m, compute_uv=False)
    return float(np.sqrt((s[:r] ** 2).sum()))
