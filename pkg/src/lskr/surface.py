"""Surface recovery from point clouds via the minimum-eigenvector problem.

Given points that live on the zero set of a bandlimited potential, the
coefficient vector annihilates every feature map, so it spans (part of) the
null space of the feature Gram matrix Q = Phi Phi^H. Fitting therefore
reduces to a Hermitian eigendecomposition; the trailing eigenvectors give a
sum-of-squares diagnostic, and marching squares on the fitted potential
extracts displayable 2-D level sets.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from skimage import measure

from .errors import (
    InvalidInputError,
    NoNullspaceError,
    UnsupportedError,
)
from .features import feature_matrix, weight_vector
from .geometry import MAX_SUPPORT_SIZE, FourierCoeffs, PointCloud, SupportSet


def gram_Q(
    X: PointCloud, support: SupportSet, sigma: float | None = None
) -> np.ndarray:
    """Feature-space Gram Q = sum_i phi(x_i) phi(x_i)^H, Hermitian PSD.

    With weighting, phi is the diagonally scaled map, so
    trace(Q) = N * sum_k w_k^2.
    """
    phi = feature_matrix(X, support, sigma=sigma).values
    Q = phi @ phi.conj().T
    return 0.5 * (Q + Q.conj().T)


@dataclass(frozen=True)
class SurfaceModel:
    """Fitted zero-set model: unit coefficient vector plus null-space data.

    ``coeffs.values`` is the annihilating vector in the (possibly weighted)
    basis, unit l2 norm. ``nullspace_basis`` holds orthonormal coefficient
    vectors whose eigenvalues fell below the fit tolerance; each one
    annihilates the training cloud to within that tolerance.
    """

    coeffs: FourierCoeffs
    weighted: bool
    sigma: float | None
    nullspace_dim: int
    nullspace_basis: np.ndarray
    eigenvalues: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        basis = np.atleast_2d(np.asarray(self.nullspace_basis, dtype=complex))
        if basis.shape[0] != len(self.coeffs.support):
            basis = basis.reshape(len(self.coeffs.support), -1)
        basis = np.array(basis, copy=True)
        basis.setflags(write=False)
        object.__setattr__(self, "nullspace_basis", basis)
        if self.nullspace_dim != basis.shape[1]:
            raise InvalidInputError("nullspace_dim must match the basis width")

    @property
    def support(self) -> SupportSet:
        return self.coeffs.support

    def effective_values(self) -> np.ndarray:
        """Plain-basis coefficients: weights folded into the fitted vector."""
        vals = self.coeffs.values
        if self.weighted:
            return weight_vector(self.support, self.sigma) * vals
        return np.array(vals)

    @classmethod
    def from_coeffs(cls, coeffs: FourierCoeffs) -> "SurfaceModel":
        """Wrap known coefficients (normalized) as a single-vector model."""
        vals = coeffs.values / np.linalg.norm(coeffs.values)
        unit = FourierCoeffs(
            support=coeffs.support,
            values=vals,
            conjugate_symmetric=coeffs.conjugate_symmetric,
        )
        return cls(
            coeffs=unit,
            weighted=False,
            sigma=None,
            nullspace_dim=1,
            nullspace_basis=vals[:, None],
        )


def _negation_permutation(support: SupportSet) -> np.ndarray:
    """Index i -> index of -k_i; raises if the support is not symmetric."""
    idx = support.index_map()
    perm = np.empty(len(support), dtype=int)
    for i, k in enumerate(support.freqs):
        j = idx.get(tuple(-k))
        if j is None:
            raise UnsupportedError("support is not symmetric under negation")
        perm[i] = j
    return perm


def symmetrize_coeffs(c: np.ndarray, support: SupportSet) -> np.ndarray:
    """Nearest conjugate-symmetric unit vector to e^{j phase} c.

    The global phase is chosen to maximize the norm of the symmetric part,
    which makes the projection lossless whenever some rotation of c already
    represents a real potential.
    """
    perm = _negation_permutation(support)
    s = np.sum(c * c[perm])
    phase = np.exp(-0.5j * np.angle(s)) if s != 0 else 1.0
    rot = phase * c
    sym = 0.5 * (rot + np.conj(rot[perm]))
    nrm = np.linalg.norm(sym)
    if nrm < 1e-12:
        return c
    return sym / nrm


def fit_surface(
    X: PointCloud,
    support: SupportSet,
    sigma: float | None = None,
    tol: float = 1e-8,
    symmetrize: bool = False,
) -> SurfaceModel:
    """Solve min_{|c|=1} c^H Q c and collect the near-null eigenspace.

    ``tol`` is relative: eigenvectors with eigenvalue <= tol * lambda_max
    enter the null-space basis. Eigenvectors are conjugated so that the
    returned vectors annihilate via c^T Phi (the potential convention)
    rather than c^H Phi.
    """
    Q = gram_Q(X, support, sigma=sigma)
    evals, evecs = np.linalg.eigh(Q)
    lam_max = float(evals[-1])
    c = np.conj(evecs[:, 0])
    if symmetrize:
        c = symmetrize_coeffs(c, support)
    cutoff = tol * lam_max
    null_cols = np.conj(evecs[:, evals <= cutoff])
    coeffs = FourierCoeffs(
        support=support, values=c, conjugate_symmetric=symmetrize
    )
    return SurfaceModel(
        coeffs=coeffs,
        weighted=sigma is not None,
        sigma=sigma,
        nullspace_dim=null_cols.shape[1],
        nullspace_basis=null_cols,
        eigenvalues=evals[::-1].copy(),
    )


def _grid_columns(grid) -> np.ndarray:
    if isinstance(grid, PointCloud):
        return grid.data
    arr = np.atleast_2d(np.asarray(grid, dtype=float))
    return arr


def eval_potential(model: SurfaceModel, grid) -> np.ndarray:
    """psi at each grid column, using the model's weighted coefficients."""
    pts = _grid_columns(grid)
    if pts.shape[0] != model.support.dim:
        raise InvalidInputError("grid dimension does not match the model")
    phi = feature_matrix(PointCloud(pts), model.support).values
    return model.effective_values() @ phi


def sos_potential(model: SurfaceModel, grid) -> np.ndarray:
    """Sum of |psi_d|^2 over every null-space coefficient vector d.

    Vanishes on the training surface and grows away from it, which makes it
    the natural display field when the null space has dimension > 1.
    """
    if model.nullspace_dim < 1:
        raise NoNullspaceError("model has an empty null space")
    pts = _grid_columns(grid)
    if pts.shape[0] != model.support.dim:
        raise InvalidInputError("grid dimension does not match the model")
    phi = feature_matrix(PointCloud(pts), model.support, sigma=model.sigma).values
    vals = model.nullspace_basis.T @ phi
    return np.sum(np.abs(vals) ** 2, axis=0)


def potential_field(model: SurfaceModel, grid_res: int) -> np.ndarray:
    """real(psi) on the inclusive (grid_res+1)^2 grid over [-1/2, 1/2]^2."""
    if model.support.dim != 2:
        raise UnsupportedError("field sampling is implemented for n = 2 only")
    axis = -0.5 + np.arange(grid_res + 1) / grid_res
    xx, yy = np.meshgrid(axis, axis, indexing="ij")
    pts = np.vstack([xx.ravel(), yy.ravel()])
    # evaluate in column blocks so fine grids stay within the feature cap
    chunk = max(1, (4 * MAX_SUPPORT_SIZE) // max(len(model.support), 1) // 2)
    vals = np.empty(pts.shape[1])
    for start in range(0, pts.shape[1], chunk):
        stop = min(start + chunk, pts.shape[1])
        vals[start:stop] = np.real(eval_potential(model, pts[:, start:stop]))
    return vals.reshape(grid_res + 1, grid_res + 1)


def extract_levelset_2d(
    model: SurfaceModel, grid_res: int = 512
) -> list[np.ndarray]:
    """Marching-squares polylines of real(psi) = 0 in [-1/2, 1/2]^2.

    Returns a list of (M, 2) vertex arrays in torus coordinates; empty when
    the potential has no sign change on the grid. Deterministic for a fixed
    ``grid_res``.
    """
    if model.support.dim != 2:
        raise UnsupportedError("level-set extraction is implemented for n = 2 only")
    field_vals = potential_field(model, grid_res)
    if field_vals.min() > 0 or field_vals.max() < 0:
        return []
    contours = measure.find_contours(field_vals, 0.0)
    polys = []
    for cont in contours:
        verts = -0.5 + cont / grid_res
        polys.append(verts)
    return polys
