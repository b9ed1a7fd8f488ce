"""Ground-truth generators: analytic level-set shapes and a toy image series.

Every shape stores the exact Fourier coefficients of its defining potential,
so sampled clouds come with a known annihilating vector and rank structure.
The dynamic series renders a smoothly deforming disk controlled by two phase
parameters, giving a high-dimensional cloud on a two-parameter manifold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.signal import convolve2d
from scipy.special import expit

from .errors import InvalidInputError, NoZeroSetError
from .features import evaluate_potential
from .geometry import FourierCoeffs, PointCloud, cube_support, wrap_point


@dataclass(frozen=True)
class ShapeSpec:
    """Named analytic shape with the exact coefficients of its potential."""

    name: str
    coeffs: FourierCoeffs
    params: tuple = ()


def cos_curve(level: float = 1.0) -> ShapeSpec:
    """Zero set of cos(2 pi x) + cos(2 pi y) - level, a closed oval for
    level in (0, 2)."""
    support = cube_support(2, 1)
    coeffs = FourierCoeffs.from_dict(
        support,
        {
            (0, 0): -level,
            (1, 0): 0.5,
            (-1, 0): 0.5,
            (0, 1): 0.5,
            (0, -1): 0.5,
        },
        conjugate_symmetric=True,
    )
    return ShapeSpec(name="cos-curve", coeffs=coeffs, params=(("level", level),))


def _shifted_cos_grid(x0: float, level: float) -> np.ndarray:
    # 3x3 coefficient grid of cos(2 pi (x - x0)) + cos(2 pi y) - level,
    # indexed [kx + 1, ky + 1]
    g = np.zeros((3, 3), dtype=complex)
    g[1, 1] = -level
    g[2, 1] = 0.5 * np.exp(-2j * np.pi * x0)
    g[0, 1] = 0.5 * np.exp(2j * np.pi * x0)
    g[1, 2] = 0.5
    g[1, 0] = 0.5
    return g


def two_circle_union(offset: float = 0.22, level: float = 1.6) -> ShapeSpec:
    """Union of two oval curves centered at (+-offset, 0).

    The potential is the product of two shifted cos-curve potentials, so its
    coefficient grid is the 2-D convolution of their 3x3 grids.
    """
    grid = convolve2d(_shifted_cos_grid(offset, level), _shifted_cos_grid(-offset, level))
    support = cube_support(2, 2)
    coeffs = FourierCoeffs(
        support=support, values=grid.ravel(order="C"), conjugate_symmetric=True
    )
    return ShapeSpec(
        name="two-circles", coeffs=coeffs, params=(("offset", offset), ("level", level))
    )


def lemniscate() -> ShapeSpec:
    """Figure-eight: zero set of 3/8 - cos(4 pi y)/2 + cos(8 pi x)/8."""
    support = cube_support(2, 4)
    coeffs = FourierCoeffs.from_dict(
        support,
        {
            (0, 0): 0.375,
            (0, 2): -0.25,
            (0, -2): -0.25,
            (4, 0): 0.0625,
            (-4, 0): 0.0625,
        },
        conjugate_symmetric=True,
    )
    return ShapeSpec(name="lemniscate", coeffs=coeffs)


SHAPES = {
    "cos-curve": cos_curve,
    "two-circles": two_circle_union,
    "lemniscate": lemniscate,
}


def make_shape(name: str, **params) -> ShapeSpec:
    if name not in SHAPES:
        raise InvalidInputError(
            f"unknown shape {name!r}; choices: {sorted(SHAPES)}"
        )
    return SHAPES[name](**params)


def _psi(coeffs: FourierCoeffs, x: float, y: float) -> float:
    return float(np.real(evaluate_potential(np.array([[x], [y]]), coeffs))[0])


def _grad_psi(coeffs: FourierCoeffs, pt: np.ndarray) -> np.ndarray:
    phase = np.exp(2j * np.pi * (coeffs.support.freqs @ pt))
    terms = coeffs.values * phase
    grad = 2j * np.pi * (coeffs.support.freqs.T @ terms)
    return np.real(grad)


def sample_surface(
    shape: ShapeSpec, N: int, seed: int, sweep_res: int = 512
) -> PointCloud:
    """N points on the zero set, each polished to |psi| < 1e-12.

    Roots are located by sweeping axis-aligned lines through the unit cell,
    bracketing sign changes, and refining with Brent plus a couple of Newton
    steps along the gradient; the final cloud is a seeded subsample of the
    root pool, so results are deterministic per seed.
    """
    if N < 1:
        raise InvalidInputError("need N >= 1 points")
    coeffs = shape.coeffs
    axis = np.linspace(-0.5, 0.5, sweep_res + 1)
    grid = np.meshgrid(axis, axis, indexing="ij")
    pts = np.vstack([grid[0].ravel(), grid[1].ravel()])
    vals = np.real(evaluate_potential(pts, coeffs)).reshape(
        sweep_res + 1, sweep_res + 1
    )

    roots = []
    sign_flip = vals[:, :-1] * vals[:, 1:] < 0
    for i, j in zip(*np.nonzero(sign_flip)):
        x = axis[i]
        y = brentq(lambda t: _psi(coeffs, x, t), axis[j], axis[j + 1], xtol=1e-14)
        roots.append((x, y))
    sign_flip = vals[:-1, :] * vals[1:, :] < 0
    for i, j in zip(*np.nonzero(sign_flip)):
        y = axis[j]
        x = brentq(lambda t: _psi(coeffs, t, y), axis[i], axis[i + 1], xtol=1e-14)
        roots.append((x, y))

    if not roots:
        raise NoZeroSetError(f"shape {shape.name!r} has no zero crossing")

    pool = []
    for x, y in roots:
        pt = np.array([x, y])
        for _ in range(8):
            val = _psi(coeffs, pt[0], pt[1])
            if abs(val) < 0.5e-12:
                break
            g = _grad_psi(coeffs, pt)
            gn = float(g @ g)
            if gn == 0:
                break
            pt = pt - val * g / gn
        if abs(_psi(coeffs, pt[0], pt[1])) < 1e-12:
            pool.append(wrap_point(pt))
    if len(pool) < N:
        raise InvalidInputError(
            f"only {len(pool)} usable roots for N={N}; raise sweep_res"
        )
    pool = np.array(pool).T
    rng = np.random.default_rng(seed)
    idx = rng.choice(pool.shape[1], size=N, replace=False)
    return PointCloud(pool[:, idx])


def add_noise(X: PointCloud, std: float, seed: int) -> PointCloud:
    """Entrywise i.i.d. Gaussian perturbation, re-wrapped onto the torus."""
    if std < 0:
        raise InvalidInputError("noise std must be nonnegative")
    if std == 0:
        return PointCloud(X.data)
    rng = np.random.default_rng(seed)
    return PointCloud.wrapped(X.data + rng.normal(0.0, std, size=X.data.shape))


@dataclass(frozen=True)
class DynSeriesSpec:
    """Toy dynamic series: a disk driven by two oscillating phases.

    The disk center drifts vertically with the slow (respiratory) phase and
    the radius pulses with the fast (cardiac) phase; each frame is a pure
    function of the two phase values.
    """

    frame_shape: tuple = (32, 32)
    num_frames: int = 64
    cardiac_freq: float = 0.173
    resp_freq: float = 0.031
    drift_amp: float = 3.0
    radius_amp: float = 2.0
    base_radius: float = 8.0
    edge_width: float = 1.5

    def to_json_dict(self) -> dict:
        return {
            "frame_shape": list(self.frame_shape),
            "num_frames": self.num_frames,
            "cardiac_freq": self.cardiac_freq,
            "resp_freq": self.resp_freq,
            "drift_amp": self.drift_amp,
            "radius_amp": self.radius_amp,
            "base_radius": self.base_radius,
            "edge_width": self.edge_width,
        }


def render_frame(spec: DynSeriesSpec, cardiac_phase: float, resp_phase: float) -> np.ndarray:
    """One h x w frame from the two phase values; intensities in (-1/2, 1/2)."""
    h, w = spec.frame_shape
    rows = np.arange(h, dtype=float)[:, None]
    cols = np.arange(w, dtype=float)[None, :]
    center_r = (h - 1) / 2.0 + spec.drift_amp * resp_phase
    center_c = (w - 1) / 2.0
    radius = spec.base_radius + spec.radius_amp * cardiac_phase
    dist = np.sqrt((rows - center_r) ** 2 + (cols - center_c) ** 2)
    return -0.5 + expit((radius - dist) / spec.edge_width)


def make_dynamic_series(spec: DynSeriesSpec) -> PointCloud:
    """Columns are the vectorized frames (row-major), one per time step."""
    h, w = spec.frame_shape
    cols = np.empty((h * w, spec.num_frames))
    for t in range(spec.num_frames):
        cardiac = np.sin(2 * np.pi * spec.cardiac_freq * t)
        resp = np.sin(2 * np.pi * spec.resp_freq * t)
        cols[:, t] = render_frame(spec, cardiac, resp).ravel()
    return PointCloud(cols)
