"""Lattice geometry, engineered couplings, and mirror/signature bookkeeping.

Site coordinates are 1-based, one integer per axis (up to three axes).
Flattening is row-major with the first axis slowest; every matrix and
amplitude vector in the package uses that ordering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

# exact quarter-turn phases i**k, indexed by k mod 4
_I_POWERS = (1 + 0j, 1j, -1 + 0j, -1j)


class LatticeError(ValueError):
    """Invalid extents or out-of-range site coordinates."""


class CouplingError(ValueError):
    """Degenerate hopping parameters (J = 0 where a scale is required)."""


class UnsupportedSizeError(ValueError):
    """Request exceeds the range the dense or numerically stable paths support."""


def i_power(k: int) -> complex:
    """Exact integer power of the imaginary unit."""
    return _I_POWERS[k % 4]


@dataclass(frozen=True)
class LatticeDims:
    """Rectangular lattice extents, one entry per axis."""

    extents: tuple[int, ...]

    def __post_init__(self):
        extents = tuple(int(e) for e in self.extents)
        object.__setattr__(self, "extents", extents)
        if not 1 <= len(extents) <= 3:
            raise LatticeError(f"need 1 to 3 axes, got {len(extents)}")
        if any(e < 1 for e in extents):
            raise LatticeError(f"every extent must be >= 1, got {extents}")

    @property
    def n_axes(self) -> int:
        return len(self.extents)

    @property
    def n_sites(self) -> int:
        return math.prod(self.extents)

    def check_site(self, site) -> tuple[int, ...]:
        """Validate a 1-based site and return it as a plain tuple."""
        coords = tuple(int(c) for c in site)
        if len(coords) != self.n_axes:
            raise LatticeError(
                f"site {coords} has {len(coords)} coordinates, lattice has {self.n_axes} axes")
        for c, e in zip(coords, self.extents):
            if not 1 <= c <= e:
                raise LatticeError(f"site {coords} outside extents {self.extents}")
        return coords

    def flat_index(self, site) -> int:
        coords = self.check_site(site)
        idx = 0
        for c, e in zip(coords, self.extents):
            idx = idx * e + (c - 1)
        return idx

    def site_at(self, flat: int) -> tuple[int, ...]:
        if not 0 <= flat < self.n_sites:
            raise LatticeError(f"flat index {flat} outside 0..{self.n_sites - 1}")
        coords = []
        for e in reversed(self.extents):
            coords.append(flat % e + 1)
            flat //= e
        return tuple(reversed(coords))

    def sites(self):
        """All sites in flattening order."""
        return (self.site_at(i) for i in range(self.n_sites))

    def require_transfer_extents(self) -> None:
        if any(e < 2 for e in self.extents):
            raise LatticeError(f"transfer requires every extent >= 2, got {self.extents}")


def as_dims(dims) -> LatticeDims:
    """Coerce a LatticeDims or a plain extent sequence to LatticeDims."""
    if isinstance(dims, LatticeDims):
        return dims
    if isinstance(dims, int):
        return LatticeDims((dims,))
    return LatticeDims(tuple(dims))


@dataclass(frozen=True)
class CouplingProfile:
    """Hopping amplitudes along one axis; values[j-1] couples sites j and j+1."""

    axis: int
    J: float
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1:
            raise CouplingError("coupling values must form a 1d sequence")
        object.__setattr__(self, "values", vals)

    @property
    def extent(self) -> int:
        return len(self.values) + 1


def coupling_profile(M: int, J: float, axis: int = 0) -> CouplingProfile:
    """Engineered profile J * sqrt(j*(M-j))/2 for j = 1..M-1 (palindromic)."""
    if M < 2:
        raise LatticeError(f"chain extent must be >= 2, got {M}")
    if J == 0:
        raise CouplingError("hopping scale J must be nonzero")
    j = np.arange(1, M)
    return CouplingProfile(axis=axis, J=float(J), values=float(J) * 0.5 * np.sqrt(j * (M - j)))


def magnetic_number(j: int, M: int) -> Fraction:
    """Magnetic number of site coordinate j on an extent-M axis, exactly j - (M+1)/2."""
    if not 1 <= j <= M:
        raise LatticeError(f"site coordinate {j} outside 1..{M}")
    return Fraction(2 * j - (M + 1), 2)


def signature(M: int) -> complex:
    """Mirror signature phase exp(-i*pi*(M-1)/2), exact on the quarter turns."""
    if M < 1:
        raise LatticeError(f"extent must be >= 1, got {M}")
    return _I_POWERS[(-(M - 1)) % 4]


def mirror_site(site, dims) -> tuple[int, ...]:
    """Per-axis reflection c -> extent - c + 1; an involution."""
    d = as_dims(dims)
    coords = d.check_site(site)
    return tuple(e - c + 1 for c, e in zip(coords, d.extents))


def pst_time(J: float) -> float:
    """Transfer time pi/|J| of an engineered lattice with equal axis scales."""
    if J == 0:
        raise CouplingError("hopping scale J must be nonzero")
    return math.pi / abs(J)
