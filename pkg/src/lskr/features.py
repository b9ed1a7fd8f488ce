"""Explicit exponential feature maps and their stacked matrices.

The map sends a point x to the vector (exp(j 2pi k.x))_{k in support}, so a
trigonometric polynomial with coefficients c vanishes on a cloud exactly when
c annihilates the stacked feature matrix. This explicit path is practical in
low dimension and doubles as the brute-force oracle for the kernel engine.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapacityExceededError, InvalidInputError
from .geometry import (
    MAX_SUPPORT_SIZE,
    FourierCoeffs,
    PointCloud,
    SupportSet,
    wrap_point,
)


def weight_vector(support: SupportSet, sigma: float) -> np.ndarray:
    """Gaussian frequency weights e^{-pi^2 sigma^2 ||k||^2}, one per row."""
    if not (np.isfinite(sigma) and sigma > 0):
        raise InvalidInputError(f"sigma must be positive, got {sigma}")
    ksq = np.sum(support.freqs.astype(float) ** 2, axis=1)
    return np.exp(-np.pi**2 * sigma**2 * ksq)


def feature_map(x, support: SupportSet) -> np.ndarray:
    """Exponential features of a single point, in the support's ordering."""
    xw = wrap_point(x).ravel()
    if xw.shape[0] != support.dim:
        raise InvalidInputError(
            f"point has dimension {xw.shape[0]}, support expects {support.dim}"
        )
    phase = 2.0 * np.pi * (support.freqs @ xw)
    return np.exp(1j * phase)


@dataclass(frozen=True)
class FeatureMatrix:
    """Columnwise feature maps of a cloud, optionally row-weighted."""

    support: SupportSet
    values: np.ndarray
    weighted: bool = False
    sigma: float | None = None

    def __post_init__(self):
        vals = np.array(np.asarray(self.values, dtype=complex), copy=True)
        if vals.ndim != 2 or vals.shape[0] != len(self.support):
            raise InvalidInputError("row count must match the support size")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def shape(self) -> tuple:
        return self.values.shape


def feature_matrix(
    X: PointCloud, support: SupportSet, sigma: float | None = None
) -> FeatureMatrix:
    """Stack feature maps of all points; scale row k by e^{-pi^2 sigma^2 |k|^2}.

    Phases are computed from wrapped coordinates, so large inputs do not lose
    precision to big trig arguments.
    """
    if X.n != support.dim:
        raise InvalidInputError(
            f"cloud dimension {X.n} does not match support dimension {support.dim}"
        )
    if len(support) * X.N > 4 * MAX_SUPPORT_SIZE:
        raise CapacityExceededError(
            f"explicit feature matrix of shape ({len(support)}, {X.N}) exceeds cap"
        )
    xw = wrap_point(X.data)
    phase = 2.0 * np.pi * (support.freqs @ xw)
    vals = np.exp(1j * phase)
    if sigma is not None:
        vals = weight_vector(support, sigma)[:, None] * vals
    return FeatureMatrix(
        support=support, values=vals, weighted=sigma is not None, sigma=sigma
    )


def annihilation_residual(X: PointCloud, c: FourierCoeffs) -> float:
    """l2 norm of c^T Phi(X); zero iff every point sits on the zero set."""
    if X.n != c.support.dim:
        raise InvalidInputError("coefficient support does not match cloud dimension")
    phi = feature_matrix(X, c.support).values
    return float(np.linalg.norm(c.values @ phi))


def evaluate_potential(points, c: FourierCoeffs) -> np.ndarray:
    """psi(x) = sum_k c_k e^{j 2pi k.x} for each column of ``points``."""
    if isinstance(points, PointCloud):
        points = points.data
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[0] != c.support.dim:
        raise InvalidInputError("points do not match the coefficient dimension")
    phase = 2.0 * np.pi * (c.support.freqs @ wrap_point(pts))
    return c.values @ np.exp(1j * phase)
