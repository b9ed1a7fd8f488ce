"""Core domain types: points on the unit torus, frequency supports, coefficients.

Coordinates live in the centered unit cell [-1/2, 1/2)^n and are treated as
torus coordinates: every kernel and basis function in this package is
1-periodic, so wrapping is lossless. Frequency supports are centered integer
cubes {-K..K}^n in a fixed lexicographic order, which makes feature-map
layouts deterministic and keeps translation counting closed-form.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CapacityExceededError,
    EmptyCloudError,
    InvalidInputError,
    UnsupportedError,
)

# Hard cap on explicit frequency supports; beyond this the kernel path applies.
MAX_SUPPORT_SIZE = 10**6


def wrap_point(p) -> np.ndarray:
    """Map each coordinate into [-1/2, 1/2) by subtracting the nearest integer.

    Idempotent; raises InvalidInputError on non-finite entries.
    """
    arr = np.asarray(p, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("point coordinates must be finite")
    return arr - np.floor(arr + 0.5)


def _as_readonly(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class SupportSet:
    """Ordered set of distinct integer frequency vectors in Z^n.

    ``freqs`` has shape (size, n) and rows are sorted lexicographically; the
    ordering is part of the public contract. ``cube_halfwidth`` is set when
    the set was built as a centered cube {-K..K}^n.
    """

    freqs: np.ndarray
    cube_halfwidth: int | None = None

    def __post_init__(self):
        freqs = np.atleast_2d(np.asarray(self.freqs, dtype=int))
        if freqs.size == 0:
            raise InvalidInputError("support set must be non-empty")
        seen = {tuple(row) for row in freqs}
        if len(seen) != freqs.shape[0]:
            raise InvalidInputError("support set entries must be distinct")
        object.__setattr__(self, "freqs", _as_readonly(freqs))

    @property
    def dim(self) -> int:
        return self.freqs.shape[1]

    def __len__(self) -> int:
        return self.freqs.shape[0]

    def index_map(self) -> dict[tuple, int]:
        """Frequency tuple -> row index, in the fixed ordering."""
        return {tuple(row): i for i, row in enumerate(self.freqs)}


def cube_support(n: int, K: int) -> SupportSet:
    """Centered cube {-K..K}^n in lexicographic order, (2K+1)^n entries."""
    if n < 1 or K < 0:
        raise InvalidInputError(f"need n >= 1 and K >= 0, got n={n}, K={K}")
    size = (2 * K + 1) ** n
    if size > MAX_SUPPORT_SIZE:
        raise CapacityExceededError(
            f"cube support of size {size} exceeds cap {MAX_SUPPORT_SIZE}"
        )
    freqs = np.array(
        list(itertools.product(range(-K, K + 1), repeat=n)), dtype=int
    )
    return SupportSet(freqs=freqs, cube_halfwidth=K)


def translate_count(gamma: SupportSet, lam: SupportSet) -> int:
    """Number of integer shifts t with lam + t contained in gamma.

    Only centered-cube supports are handled; the count factors over
    dimensions as prod_d (2*K_gamma - 2*K_lam + 1).
    """
    if gamma.cube_halfwidth is None or lam.cube_halfwidth is None:
        raise UnsupportedError("translate_count requires centered-cube supports")
    if gamma.dim != lam.dim:
        raise InvalidInputError("supports must share the ambient dimension")
    if lam.cube_halfwidth > gamma.cube_halfwidth:
        raise InvalidInputError("inner cube must not exceed the outer cube")
    per_dim = 2 * (gamma.cube_halfwidth - lam.cube_halfwidth) + 1
    return per_dim ** gamma.dim


@dataclass(frozen=True)
class PointCloud:
    """n x N matrix whose columns are points; immutable after construction.

    Construction does not wrap: use :meth:`wrapped` for canonical torus
    coordinates. Complex-valued data is allowed (columns of vectorized
    Fourier-domain frames); torus semantics then apply to the real and
    imaginary parts separately.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.atleast_2d(np.asarray(self.data))
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise EmptyCloudError(f"cloud must be a non-empty 2-D matrix, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InvalidInputError("cloud entries must be finite")
        object.__setattr__(self, "data", _as_readonly(arr))

    @classmethod
    def wrapped(cls, data) -> "PointCloud":
        """Build a cloud with every coordinate wrapped into [-1/2, 1/2)."""
        return cls(wrap_point(np.atleast_2d(np.asarray(data, dtype=float))))

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def N(self) -> int:
        return self.data.shape[1]

    def point(self, i: int) -> np.ndarray:
        return self.data[:, i]

    def to_csv(self, path) -> None:
        """One row per point, n columns, with a `# n=<n> N=<N>` header line."""
        if np.iscomplexobj(self.data):
            raise UnsupportedError("CSV serialization is defined for real clouds")
        np.savetxt(
            path,
            self.data.T,
            fmt="%.17g",
            delimiter=",",
            header=f"n={self.n} N={self.N}",
            comments="# ",
        )

    @classmethod
    def from_csv(cls, path) -> "PointCloud":
        rows = np.loadtxt(path, delimiter=",", ndmin=2)
        return cls(rows.T)


@dataclass(frozen=True)
class FourierCoeffs:
    """Coefficient vector aligned with a support set's ordering.

    When ``conjugate_symmetric`` is set, c_{-k} = conj(c_k) is verified on
    construction, which guarantees the represented potential is real-valued.
    """

    support: SupportSet
    values: np.ndarray
    conjugate_symmetric: bool = False

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex).ravel()
        if vals.shape[0] != len(self.support):
            raise InvalidInputError(
                f"{vals.shape[0]} values for a support of size {len(self.support)}"
            )
        if self.conjugate_symmetric:
            idx = self.support.index_map()
            for i, k in enumerate(self.support.freqs):
                j = idx.get(tuple(-k))
                if j is None or abs(vals[j] - np.conj(vals[i])) > 1e-12 * max(1.0, abs(vals[i])):
                    raise InvalidInputError("coefficients are not conjugate-symmetric")
        object.__setattr__(self, "values", _as_readonly(vals))

    @classmethod
    def from_dict(cls, support: SupportSet, entries: dict, **kw) -> "FourierCoeffs":
        """Build from {frequency tuple: value}; unlisted frequencies are zero."""
        idx = support.index_map()
        vals = np.zeros(len(support), dtype=complex)
        for k, v in entries.items():
            if tuple(k) not in idx:
                raise InvalidInputError(f"frequency {k} not in support")
            vals[idx[tuple(k)]] = v
        return cls(support=support, values=vals, **kw)

    def to_json_dict(self) -> dict:
        return {
            "support": [[int(v) for v in row] for row in self.support.freqs],
            "values": [[float(v.real), float(v.imag)] for v in self.values],
        }

    @classmethod
    def from_json_dict(cls, payload: dict, **kw) -> "FourierCoeffs":
        freqs = np.asarray(payload["support"], dtype=int)
        support = SupportSet(freqs=freqs)
        K = int(np.max(np.abs(freqs))) if freqs.size else 0
        if freqs.shape[0] == (2 * K + 1) ** freqs.shape[1]:
            expected = cube_support(freqs.shape[1], K)
            if np.array_equal(expected.freqs, support.freqs):
                support = expected
        vals = np.array([complex(re, im) for re, im in payload["values"]])
        return cls(support=support, values=vals, **kw)


@dataclass(frozen=True)
class DirichletSpec:
    """Shift-invariant kernel of an unweighted cube support."""

    support: SupportSet

    def __post_init__(self):
        if len(self.support) == 0:
            raise InvalidInputError("Dirichlet kernel needs a non-empty support")


@dataclass(frozen=True)
class GaussianSpec:
    """Gaussian kernel, periodized to the unit torus by default.

    ``periodic=False`` drops the wrapping and image sums, leaving the plain
    radial basis exp(-|r|^2 / (2 sigma^2)). That variant is the right one for
    clouds whose coordinates are not torus-valued (vectorized image frames),
    where sigma is large on the unit-cell scale and wrapping would collapse
    all distances.
    """

    sigma: float
    periodic: bool = True

    def __post_init__(self):
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            raise InvalidInputError(f"sigma must be positive, got {self.sigma}")


KernelSpec = DirichletSpec | GaussianSpec
