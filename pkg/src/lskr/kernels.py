"""Shift-invariant kernels and Gram matrices: the implicit feature-map path.

The Dirichlet kernel of a cube support factors the explicit feature Gram,
kappa(x_j - x_i) = phi(x_i)^H phi(x_j), so N x N Gram matrices replace
|support| x N feature matrices. The periodized Gaussian is the limit kernel
of Gaussian-weighted maps and carries the same low-rank structure for
bandlimited surfaces; its non-periodic variant serves image-scale clouds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CapacityExceededError, InvalidInputError, UnsupportedError
from .geometry import (
    DirichletSpec,
    GaussianSpec,
    KernelSpec,
    PointCloud,
    wrap_point,
)

# IRLS needs dense eigendecompositions of the Gram, so keep N moderate.
MAX_GRAM_POINTS = 5000


def realified(data) -> np.ndarray:
    """Complex columns viewed as real vectors of twice the length."""
    arr = np.atleast_2d(np.asarray(data))
    if np.iscomplexobj(arr):
        return np.vstack([arr.real, arr.imag])
    return arr.astype(float, copy=False)


def _dirichlet_halfwidth(spec: DirichletSpec) -> int:
    K = spec.support.cube_halfwidth
    if K is None:
        raise UnsupportedError("Dirichlet kernel requires a centered-cube support")
    return K


def _dirichlet_factor(t: np.ndarray, K: int) -> np.ndarray:
    """sin((2K+1) pi t) / sin(pi t) with the exact limit 2K+1 at t = 0."""
    tw = t - np.floor(t + 0.5)
    out = np.empty_like(tw)
    zero = tw == 0.0
    out[zero] = 2 * K + 1
    nz = ~zero
    out[nz] = np.sin((2 * K + 1) * np.pi * tw[nz]) / np.sin(np.pi * tw[nz])
    return out


def _gaussian_layers(sigma: float) -> int:
    return math.ceil(6 * sigma) + 1


def _gaussian_theta(t: np.ndarray, sigma: float) -> np.ndarray:
    """One-dimensional periodized Gaussian sum_m exp(-(t+m)^2 / (2 sigma^2))."""
    tw = t - np.floor(t + 0.5)
    M = _gaussian_layers(sigma)
    out = np.zeros_like(tw)
    for m in range(-M, M + 1):
        out += np.exp(-((tw + m) ** 2) / (2.0 * sigma**2))
    return out


def _gaussian_theta_prime(t: np.ndarray, sigma: float) -> np.ndarray:
    """Derivative of the periodized factor, term by term."""
    tw = t - np.floor(t + 0.5)
    M = _gaussian_layers(sigma)
    out = np.zeros_like(tw)
    for m in range(-M, M + 1):
        out += -((tw + m) / sigma**2) * np.exp(-((tw + m) ** 2) / (2.0 * sigma**2))
    return out


def kernel_eval(r, spec: KernelSpec) -> float:
    """Kernel value at a displacement vector."""
    rv = np.asarray(r, dtype=float).ravel()
    if isinstance(spec, DirichletSpec):
        K = _dirichlet_halfwidth(spec)
        if rv.shape[0] != spec.support.dim:
            raise InvalidInputError("displacement dimension mismatch")
        return float(np.prod(_dirichlet_factor(rv, K)))
    if isinstance(spec, GaussianSpec):
        if not spec.periodic:
            return float(np.exp(-np.dot(rv, rv) / (2.0 * spec.sigma**2)))
        return float(np.prod(_gaussian_theta(rv, spec.sigma)))
    raise UnsupportedError(f"unknown kernel spec {spec!r}")


@dataclass(frozen=True)
class GramMatrix:
    """N x N real symmetric kernel matrix with constant diagonal kappa(0)."""

    values: np.ndarray
    spec: KernelSpec

    def __post_init__(self):
        vals = np.array(np.asarray(self.values, dtype=float), copy=True)
        if vals.ndim != 2 or vals.shape[0] != vals.shape[1]:
            raise InvalidInputError("Gram matrix must be square")
        vals = 0.5 * (vals + vals.T)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def N(self) -> int:
        return self.values.shape[0]


def _pairwise_diffs(coords: np.ndarray) -> np.ndarray:
    # (m, N, N) tensor of x_i - x_j along each coordinate
    return coords[:, :, None] - coords[:, None, :]


def pairwise_kernel(coords: np.ndarray, spec: KernelSpec) -> np.ndarray:
    """Kernel matrix of real coordinate columns (m x N)."""
    m, N = coords.shape
    if isinstance(spec, DirichletSpec):
        if spec.support.dim != m:
            raise InvalidInputError(
                f"cloud has {m} real coordinates, support expects {spec.support.dim}"
            )
        K = _dirichlet_halfwidth(spec)
        out = np.ones((N, N))
        for d in range(m):
            out *= _dirichlet_factor(coords[d][:, None] - coords[d][None, :], K)
        return out
    if isinstance(spec, GaussianSpec):
        if not spec.periodic:
            sq = np.sum(coords**2, axis=0)
            d2 = sq[:, None] + sq[None, :] - 2.0 * (coords.T @ coords)
            np.maximum(d2, 0.0, out=d2)
            return np.exp(-d2 / (2.0 * spec.sigma**2))
        out = np.ones((N, N))
        for d in range(m):
            out *= _gaussian_theta(coords[d][:, None] - coords[d][None, :], spec.sigma)
        return out
    raise UnsupportedError(f"unknown kernel spec {spec!r}")


def gram_matrix(X, spec: KernelSpec) -> GramMatrix:
    """Assemble the kernel Gram of a cloud; complex clouds are realified."""
    data = X.data if isinstance(X, PointCloud) else np.atleast_2d(np.asarray(X))
    coords = realified(data)
    if coords.shape[1] > MAX_GRAM_POINTS:
        raise CapacityExceededError(
            f"{coords.shape[1]} points exceed the Gram cap {MAX_GRAM_POINTS}"
        )
    vals = pairwise_kernel(coords, spec)
    return GramMatrix(values=vals, spec=spec)


@dataclass(frozen=True)
class RankProfile:
    """Descending Gram eigenvalues plus thresholded rank estimates."""

    eigenvalues: np.ndarray
    thresholds: tuple
    ranks: tuple


def kernel_rank_profile(G: GramMatrix, thresholds) -> RankProfile:
    """Eigenvalue profile and, per threshold tau, #{eigenvalues > tau * max}."""
    evals = np.linalg.eigvalsh(G.values)[::-1].copy()
    lam_max = float(evals[0])
    ths = tuple(float(t) for t in thresholds)
    ranks = tuple(int(np.sum(evals > t * lam_max)) for t in ths)
    evals.setflags(write=False)
    return RankProfile(eigenvalues=evals, thresholds=ths, ranks=ranks)


def kernel_trace_gradient(X, Q: np.ndarray, spec: GaussianSpec) -> np.ndarray:
    """Gradient of h(X) = sum_ij Q_ij kappa(x_i - x_j) = trace(K(X) Q).

    Column p of the result is sum_j (Q + Q^T)_pj * grad kappa(x_p - x_j).
    Complex clouds are differentiated through their realified coordinates
    and returned in complex form.
    """
    if not isinstance(spec, GaussianSpec):
        raise UnsupportedError("trace gradient is defined for Gaussian kernels")
    data = X.data if isinstance(X, PointCloud) else np.atleast_2d(np.asarray(X))
    coords = realified(data)
    m, N = coords.shape
    Qs = np.asarray(Q, dtype=float)
    if Qs.shape != (N, N):
        raise InvalidInputError("Q must be N x N for an N-point cloud")
    Q2 = Qs + Qs.T
    if not spec.periodic:
        Kmat = pairwise_kernel(coords, spec)
        M = Q2 * Kmat
        s = M.sum(axis=1)
        grad = -(coords * s[None, :] - coords @ M.T) / spec.sigma**2
    else:
        diffs = _pairwise_diffs(coords)
        thetas = [_gaussian_theta(diffs[d], spec.sigma) for d in range(m)]
        grad = np.empty((m, N))
        for d in range(m):
            P = _gaussian_theta_prime(diffs[d], spec.sigma)
            for e in range(m):
                if e != d:
                    P = P * thetas[e]
            grad[d] = np.sum(Q2 * P, axis=1)
    if np.iscomplexobj(data):
        n = data.shape[0]
        return grad[:n] + 1j * grad[n:]
    return grad


def median_pairwise_sigma(X, factor: float = 0.5) -> float:
    """Kernel width from the cloud scale: factor * median pairwise distance."""
    data = X.data if isinstance(X, PointCloud) else np.atleast_2d(np.asarray(X))
    coords = realified(data)
    N = coords.shape[1]
    if N < 2:
        raise InvalidInputError("need at least two points to set a kernel width")
    sq = np.sum(coords**2, axis=0)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (coords.T @ coords)
    np.maximum(d2, 0.0, out=d2)
    dists = np.sqrt(d2[np.triu_indices(N, k=1)])
    med = float(np.median(dists))
    if med <= 0:
        raise InvalidInputError("cloud has zero spread; cannot infer sigma")
    return factor * med
