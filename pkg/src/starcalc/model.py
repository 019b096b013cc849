"""Core data model: phase-space points, windows, ground configurations and
set functions tabulated over the subset lattice of a ground.

A ground configuration is a finite tuple of pairwise distinct points. A set
function over a ground of size n is a dense float64 array of length 2**n,
indexed by bitmask: bit i set means the i-th ground point is present.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import (
    DuplicatePoint,
    GroundMismatch,
    IndexOutOfRange,
    OutsideBox,
    TooLarge,
)
from .fields import as_field, const_field, parse_field

MAX_GROUND = 24


@dataclass(frozen=True)
class PhasePoint:
    """A single point, held as an immutable coordinate tuple."""

    coords: tuple

    def __post_init__(self):
        coords = tuple(float(c) for c in self.coords)
        if not all(np.isfinite(coords)):
            raise ValueError(f"non-finite coordinates: {coords}")
        object.__setattr__(self, "coords", coords)

    @property
    def dim(self) -> int:
        return len(self.coords)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.coords, dtype=float)


def point(*coords) -> PhasePoint:
    return PhasePoint(tuple(coords))


def as_point(obj, dim: int | None = None) -> PhasePoint:
    p = obj if isinstance(obj, PhasePoint) else PhasePoint(tuple(np.atleast_1d(obj)))
    if dim is not None and p.dim != dim:
        raise ValueError(f"point has dim {p.dim}, expected {dim}")
    return p


def points_to_array(points, dim: int | None = None) -> np.ndarray:
    """Stack points into an (n, d) float array; n = 0 gives shape (0, dim or 0)."""
    pts = [as_point(p, dim) for p in points]
    if not pts:
        return np.zeros((0, dim if dim is not None else 0))
    return np.array([p.coords for p in pts], dtype=float)


class GroundConfiguration:
    """Ordered tuple of pairwise distinct points carrying the subset lattice.

    Distinctness is exact coordinate comparison. Size is capped at
    MAX_GROUND so that 2**n tabulations stay addressable.
    """

    def __init__(self, points, dim: int | None = None):
        pts = tuple(as_point(p, dim) for p in points)
        if len(pts) > MAX_GROUND:
            raise TooLarge(f"ground size {len(pts)} exceeds maximum {MAX_GROUND}")
        if len({p.coords for p in pts}) != len(pts):
            raise DuplicatePoint("ground points must be pairwise distinct")
        if pts and len({p.dim for p in pts}) != 1:
            raise ValueError("ground points must share one dimension")
        self.points = pts

    @property
    def size(self) -> int:
        return len(self.points)

    @property
    def dim(self) -> int:
        return self.points[0].dim if self.points else 0

    def __len__(self):
        return len(self.points)

    def __getitem__(self, i) -> PhasePoint:
        return self.points[i]

    def __eq__(self, other):
        return isinstance(other, GroundConfiguration) and self.points == other.points

    def __hash__(self):
        return hash(self.points)

    def __repr__(self):
        return f"GroundConfiguration({len(self.points)} points, dim={self.dim})"

    def as_array(self) -> np.ndarray:
        return points_to_array(self.points)

    def subset(self, mask: int) -> tuple:
        """Points selected by the bitmask, in ground order."""
        self._check_mask(mask)
        return tuple(p for i, p in enumerate(self.points) if mask >> i & 1)

    def drop(self, i: int) -> "GroundConfiguration":
        """Ground with point i removed; remaining points keep their order."""
        if not 0 <= i < len(self.points):
            raise IndexOutOfRange(f"point index {i} out of range for size {len(self.points)}")
        return GroundConfiguration(self.points[:i] + self.points[i + 1:])

    def _check_mask(self, mask: int):
        if not 0 <= mask < (1 << len(self.points)):
            raise IndexOutOfRange(f"mask {mask} out of range for ground size {len(self.points)}")


def make_ground(points, space: "PhaseSpace | None" = None) -> GroundConfiguration:
    g = GroundConfiguration(points, dim=space.dim if space is not None else None)
    if space is not None and g.size:
        inside = space.contains(g.as_array())
        if not inside.all():
            raise OutsideBox(f"{int((~inside).sum())} ground point(s) outside the box")
    return g


@lru_cache(maxsize=None)
def popcounts(n: int) -> np.ndarray:
    """uint8 array of popcount(mask) for every mask below 2**n."""
    return np.bitwise_count(np.arange(1 << n, dtype=np.uint32)).astype(np.uint8)


def bit_indices(mask: int):
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def submasks(mask: int):
    """All submasks of mask, including 0 and mask itself (decreasing order)."""
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


class SetFunction:
    """Dense tabulation of a set function over a ground's subset lattice."""

    def __init__(self, ground: GroundConfiguration, values):
        values = np.asarray(values, dtype=float)
        if values.shape != (1 << ground.size,):
            raise ValueError(
                f"values length {values.shape} does not match ground size {ground.size}"
            )
        self.ground = ground
        self.values = values.copy()

    @classmethod
    def unit(cls, ground: GroundConfiguration) -> "SetFunction":
        """Indicator of the empty configuration, the convolution unit."""
        v = np.zeros(1 << ground.size)
        v[0] = 1.0
        return cls(ground, v)

    @property
    def n(self) -> int:
        return self.ground.size

    def value(self, mask: int) -> float:
        self.ground._check_mask(mask)
        return float(self.values[mask])

    def copy(self) -> "SetFunction":
        return SetFunction(self.ground, self.values)

    def with_values(self, values) -> "SetFunction":
        return SetFunction(self.ground, values)

    def level_values(self, r: int) -> np.ndarray:
        """Values on all subsets of cardinality r, in increasing mask order."""
        return self.values[popcounts(self.n) == r]

    def __add__(self, other):
        check_same_ground(self, other)
        return SetFunction(self.ground, self.values + other.values)

    def __sub__(self, other):
        check_same_ground(self, other)
        return SetFunction(self.ground, self.values - other.values)

    def __mul__(self, c):
        if not np.isscalar(c):
            return NotImplemented
        return SetFunction(self.ground, self.values * float(c))

    __rmul__ = __mul__

    def __neg__(self):
        return SetFunction(self.ground, -self.values)

    def __repr__(self):
        return f"SetFunction(n={self.n}, values[0..3]={self.values[:4]!r})"


def check_same_ground(a: SetFunction, b: SetFunction):
    if a.ground != b.ground:
        raise GroundMismatch("set functions live on different grounds")


class PhaseSpace:
    """Phase space: a box in R^d with a reference density and an activity.

    Args:
        dim: spatial dimension d >= 1.
        box: (d, 2) array of [lo, hi] pairs.
        z: activity, z > 0.
        density: optional Field weighting the reference measure
            (default: constant 1, plain Lebesgue).
    """

    def __init__(self, dim: int, box, z: float = 1.0, density=None):
        self.dim = int(dim)
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        self.box = np.asarray(box, dtype=float).reshape(self.dim, 2)
        if not np.all(self.box[:, 1] >= self.box[:, 0]):
            raise ValueError("box must satisfy hi >= lo on every axis")
        self.z = float(z)
        if self.z <= 0:
            raise ValueError("activity z must be positive")
        self.density = as_field(density) if density is not None else const_field(1.0)

    def contains(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return np.all((pts >= self.box[:, 0]) & (pts <= self.box[:, 1]), axis=1)

    def ground(self, points) -> GroundConfiguration:
        return make_ground(points, space=self)

    def window(self, sub_box=None) -> np.ndarray:
        """Clip an optional sub-box against the phase-space box."""
        if sub_box is None:
            return self.box.copy()
        w = np.asarray(sub_box, dtype=float).reshape(self.dim, 2)
        lo = np.maximum(w[:, 0], self.box[:, 0])
        hi = np.minimum(w[:, 1], self.box[:, 1])
        return np.stack([lo, np.maximum(hi, lo)], axis=1)

    def mass(self, window=None, tol: float = 1e-10) -> float:
        """Reference mass of a window: integral of the density over it."""
        from .quadrature import box_integral

        return box_integral(self.density, self.window(window), tol=tol)

    def __repr__(self):
        return f"PhaseSpace(dim={self.dim}, z={self.z})"


def space_from_json(obj) -> PhaseSpace:
    """Build a PhaseSpace from {"dim", "box", "z", "density"?}."""
    dim = int(obj["dim"])
    density = obj.get("density")
    return PhaseSpace(
        dim=dim,
        box=obj["box"],
        z=obj.get("z", 1.0),
        density=parse_field(density, dim) if density is not None else None,
    )
