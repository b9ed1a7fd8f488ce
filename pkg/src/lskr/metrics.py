"""Quantitative evaluation: matrix errors, distances to known curves, spectra."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import InvalidInputError, NoZeroSetError, UnsupportedError
from .geometry import FourierCoeffs, PointCloud, wrap_point
from .surface import SurfaceModel, extract_levelset_2d


def relative_error(X, X_true) -> float:
    """Frobenius error ||X - X_true|| / ||X_true||."""
    a = X.data if isinstance(X, PointCloud) else np.asarray(X)
    b = X_true.data if isinstance(X_true, PointCloud) else np.asarray(X_true)
    if a.shape != b.shape:
        raise InvalidInputError(f"shape mismatch {a.shape} vs {b.shape}")
    denom = np.linalg.norm(b)
    if denom == 0:
        raise InvalidInputError("reference cloud has zero norm")
    return float(np.linalg.norm(a - b) / denom)


def rmse(X, X_true) -> float:
    a = X.data if isinstance(X, PointCloud) else np.asarray(X)
    b = X_true.data if isinstance(X_true, PointCloud) else np.asarray(X_true)
    if a.shape != b.shape:
        raise InvalidInputError(f"shape mismatch {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b) / np.sqrt(a.size))


def curve_distance(
    X: PointCloud, truth: FourierCoeffs, grid_res: int = 512
) -> np.ndarray:
    """Per-point distance to the zero set of a known 2-D potential.

    The zero set is polygonized once by marching squares and queried through
    a KD-tree; vertices are tiled over the 3x3 block of neighboring cells so
    distances respect the torus topology. Accuracy is limited by grid_res.
    """
    if X.n != 2 or truth.support.dim != 2:
        raise UnsupportedError("curve distances are defined for n = 2")
    model = SurfaceModel.from_coeffs(truth)
    polys = extract_levelset_2d(model, grid_res)
    if not polys:
        raise NoZeroSetError("potential has no zero crossing on the grid")
    verts = np.vstack(polys)
    shifts = np.array([(dx, dy) for dx in (-1, 0, 1) for dy in (-1, 0, 1)])
    tiled = np.vstack([verts + s for s in shifts])
    tree = cKDTree(tiled)
    pts = wrap_point(X.data).T
    dists, _ = tree.query(pts)
    return np.asarray(dists)


@dataclass
class EvalReport:
    """Flat result record shared by the CLI commands."""

    rmse: float
    rel_error: float
    mean_curve_dist: float | None = None
    eig_profile: list | None = None
    runtime_ms: int = 0
    warnings: list | None = None

    def to_json_dict(self) -> dict:
        out = {
            "rmse": self.rmse,
            "rel_error": self.rel_error,
            "runtime_ms": self.runtime_ms,
        }
        if self.mean_curve_dist is not None:
            out["mean_curve_dist"] = self.mean_curve_dist
        if self.eig_profile is not None:
            out["eig_profile"] = [float(v) for v in self.eig_profile]
        out["warnings"] = list(self.warnings or [])
        return out

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
