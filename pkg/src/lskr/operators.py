"""Linear measurement operators with matched forward/adjoint pairs.

Identity covers denoising, entry masks cover missing-data problems, and
per-frame Fourier masks emulate undersampled k-space acquisition of an image
series. All DFTs are unitary, so a Fourier mask satisfies A A* = I on its
sampled set. Every operator is stateless after construction and exposes
``forward``, ``adjoint``, and ``out_dim``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .geometry import PointCloud


def _as_matrix(X) -> np.ndarray:
    if isinstance(X, PointCloud):
        return X.data
    arr = np.atleast_2d(np.asarray(X))
    return arr


@dataclass(frozen=True)
class IdentityOp:
    """A(X) = vec(X); measurements are the column-stacked entries."""

    n: int
    N: int

    @property
    def shape(self) -> tuple:
        return (self.n, self.N)

    @property
    def out_dim(self) -> int:
        return self.n * self.N

    def forward(self, X) -> np.ndarray:
        mat = _as_matrix(X)
        if mat.shape != self.shape:
            raise InvalidInputError(f"expected shape {self.shape}, got {mat.shape}")
        return mat.ravel(order="F")

    def adjoint(self, y) -> np.ndarray:
        vec = np.asarray(y).ravel()
        if vec.shape[0] != self.out_dim:
            raise InvalidInputError(
                f"expected {self.out_dim} measurements, got {vec.shape[0]}"
            )
        return vec.reshape(self.shape, order="F")


@dataclass(frozen=True)
class EntryMaskOp:
    """A(X) = entries of X where the boolean mask is set (row-major order)."""

    mask: np.ndarray

    def __post_init__(self):
        m = np.array(np.asarray(self.mask, dtype=bool), copy=True)
        if m.ndim != 2:
            raise InvalidInputError("entry mask must be a 2-D boolean matrix")
        m.setflags(write=False)
        object.__setattr__(self, "mask", m)

    @property
    def shape(self) -> tuple:
        return self.mask.shape

    @property
    def out_dim(self) -> int:
        return int(self.mask.sum())

    def forward(self, X) -> np.ndarray:
        mat = _as_matrix(X)
        if mat.shape != self.mask.shape:
            raise InvalidInputError(
                f"expected shape {self.mask.shape}, got {mat.shape}"
            )
        return mat[self.mask]

    def adjoint(self, y) -> np.ndarray:
        vec = np.asarray(y).ravel()
        if vec.shape[0] != self.out_dim:
            raise InvalidInputError(
                f"expected {self.out_dim} measurements, got {vec.shape[0]}"
            )
        out = np.zeros(self.mask.shape, dtype=vec.dtype)
        out[self.mask] = vec
        return out


@dataclass(frozen=True)
class FourierMaskOp:
    """Per-column unitary 2-D DFT followed by per-frame frequency sampling.

    Columns are h*w frames flattened in row-major order; ``masks`` has shape
    (N, h, w) in unshifted DFT coordinates. Measurements concatenate the
    sampled frequencies frame by frame.
    """

    frame_shape: tuple
    masks: np.ndarray

    def __post_init__(self):
        h, w = self.frame_shape
        object.__setattr__(self, "frame_shape", (int(h), int(w)))
        m = np.array(np.asarray(self.masks, dtype=bool), copy=True)
        if m.ndim != 3 or m.shape[1:] != self.frame_shape:
            raise InvalidInputError(
                f"masks must have shape (N, {h}, {w}), got {m.shape}"
            )
        m.setflags(write=False)
        object.__setattr__(self, "masks", m)

    @property
    def n(self) -> int:
        return self.frame_shape[0] * self.frame_shape[1]

    @property
    def N(self) -> int:
        return self.masks.shape[0]

    @property
    def shape(self) -> tuple:
        return (self.n, self.N)

    @property
    def out_dim(self) -> int:
        return int(self.masks.sum())

    def forward(self, X) -> np.ndarray:
        mat = _as_matrix(X)
        if mat.shape != self.shape:
            raise InvalidInputError(f"expected shape {self.shape}, got {mat.shape}")
        h, w = self.frame_shape
        frames = mat.T.reshape(self.N, h, w)
        spectra = np.fft.fft2(frames, norm="ortho")
        return spectra[self.masks]

    def adjoint(self, y) -> np.ndarray:
        vec = np.asarray(y, dtype=complex).ravel()
        if vec.shape[0] != self.out_dim:
            raise InvalidInputError(
                f"expected {self.out_dim} measurements, got {vec.shape[0]}"
            )
        h, w = self.frame_shape
        spectra = np.zeros((self.N, h, w), dtype=complex)
        spectra[self.masks] = vec
        frames = np.fft.ifft2(spectra, norm="ortho")
        return frames.reshape(self.N, self.n).T


MeasurementOp = IdentityOp | EntryMaskOp | FourierMaskOp


def _centered_freq_band(size: int, count: int) -> np.ndarray:
    """Boolean band over unshifted integer DFT frequencies of a given axis."""
    freqs = np.rint(np.fft.fftfreq(size) * size).astype(int)
    if count % 2 == 1:
        half = (count - 1) // 2
        return (freqs >= -half) & (freqs <= half)
    half = count // 2
    return (freqs >= -half) & (freqs <= half - 1)


def center_kspace_op(frame_shape, center_size: int, num_frames: int) -> FourierMaskOp:
    """Fourier mask keeping the centered low-frequency block of every frame."""
    h, w = frame_shape
    if center_size < 1 or center_size > min(h, w):
        raise InvalidInputError(
            f"center_size must lie in [1, {min(h, w)}], got {center_size}"
        )
    band_y = _centered_freq_band(h, center_size)
    band_x = _centered_freq_band(w, center_size)
    mask2d = band_y[:, None] & band_x[None, :]
    masks = np.broadcast_to(mask2d, (num_frames, h, w)).copy()
    return FourierMaskOp(frame_shape=(h, w), masks=masks)


def variable_density_masks(
    frame_shape, num_frames: int, accel: float, seed: int
) -> np.ndarray:
    """Per-frame random Cartesian masks, denser near DC, ~1/accel sampling.

    Sampling probability is min(alpha / (1 + |f|), 1) with alpha tuned by
    bisection so the mean probability equals 1/accel; the DC sample is always
    kept. Frames draw independent masks from one seeded generator.
    """
    h, w = frame_shape
    if accel < 1:
        raise InvalidInputError(f"acceleration must be >= 1, got {accel}")
    fy = np.rint(np.fft.fftfreq(h) * h).astype(int)
    fx = np.rint(np.fft.fftfreq(w) * w).astype(int)
    fnorm = np.sqrt(fy[:, None] ** 2 + fx[None, :] ** 2)
    density = 1.0 / (1.0 + fnorm)
    target = 1.0 / accel

    def mean_prob(alpha):
        return float(np.mean(np.minimum(alpha * density, 1.0)))

    lo, hi = 0.0, 1.0
    while mean_prob(hi) < target:
        hi *= 2.0
        if hi > 1e12:
            break
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mean_prob(mid) < target:
            lo = mid
        else:
            hi = mid
    prob = np.minimum(hi * density, 1.0)
    rng = np.random.default_rng(seed)
    masks = rng.random((num_frames, h, w)) < prob[None, :, :]
    masks[:, 0, 0] = True
    return masks
