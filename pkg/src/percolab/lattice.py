"""Geometry of Z^2: vertices, bonds, the dual lattice, rectangular regions and
strip-wise density profiles.

Dual vertices live on Z^2 + (1/2, 1/2).  They are stored with doubled integer
coordinates (both odd) so that every geometric test stays exact.
"""
from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, NamedTuple

import numpy as np

HORIZONTAL = 0
VERTICAL = 1


class Vertex(NamedTuple):
    x: int
    y: int


class DualVertex(NamedTuple):
    """Dual vertex stored as doubled coordinates; ``(1, 1)`` is (1/2, 1/2)."""

    x2: int
    y2: int

    @classmethod
    def at(cls, x: float, y: float) -> "DualVertex":
        x2, y2 = round(2 * x), round(2 * y)
        if x2 % 2 != 1 or y2 % 2 != 1 or x2 != 2 * x or y2 != 2 * y:
            raise ValueError(f"({x}, {y}) is not a dual vertex")
        return cls(x2, y2)

    @property
    def x(self) -> float:
        return self.x2 / 2

    @property
    def y(self) -> float:
        return self.y2 / 2


@dataclass(frozen=True, order=True)
class Bond:
    """Nearest-neighbour bond, anchored at its lower-left endpoint.

    ``orient`` is HORIZONTAL for {(x, y), (x+1, y)} and VERTICAL for
    {(x, y), (x, y+1)}.  Construct from arbitrary endpoints with
    :meth:`between`; equality is therefore orientation free.
    """

    x: int
    y: int
    orient: int

    def __post_init__(self):
        if self.orient not in (HORIZONTAL, VERTICAL):
            raise ValueError(f"bad orientation {self.orient!r}")

    @classmethod
    def between(cls, u, v) -> "Bond":
        (ux, uy), (vx, vy) = u, v
        if abs(ux - vx) + abs(uy - vy) != 1:
            raise ValueError(f"{u} and {v} are not nearest neighbours")
        if uy == vy:
            return cls(min(ux, vx), uy, HORIZONTAL)
        return cls(ux, min(uy, vy), VERTICAL)

    @property
    def endpoints(self) -> tuple[Vertex, Vertex]:
        if self.orient == HORIZONTAL:
            return Vertex(self.x, self.y), Vertex(self.x + 1, self.y)
        return Vertex(self.x, self.y), Vertex(self.x, self.y + 1)

    @property
    def X(self) -> int:
        """Smaller first coordinate of the two endpoints."""
        return self.x


@dataclass(frozen=True)
class DualBond:
    u: DualVertex
    v: DualVertex

    def __post_init__(self):
        (ax, ay), (bx, by) = self.u, self.v
        if abs(ax - bx) + abs(ay - by) != 2 or (ax != bx and ay != by):
            raise ValueError("dual endpoints must differ by one unit in one coordinate")
        if (bx, by) < (ax, ay):
            object.__setattr__(self, "u", DualVertex(bx, by))
            object.__setattr__(self, "v", DualVertex(ax, ay))

    @classmethod
    def between(cls, u, v) -> "DualBond":
        return cls(DualVertex.at(*u), DualVertex.at(*v))

    @property
    def endpoints(self) -> tuple[tuple[float, float], tuple[float, float]]:
        return (self.u.x, self.u.y), (self.v.x, self.v.y)


def dual(b: Bond) -> DualBond:
    """The dual bond crossing ``b``."""
    if b.orient == HORIZONTAL:
        return DualBond(DualVertex(2 * b.x + 1, 2 * b.y - 1), DualVertex(2 * b.x + 1, 2 * b.y + 1))
    return DualBond(DualVertex(2 * b.x - 1, 2 * b.y + 1), DualVertex(2 * b.x + 1, 2 * b.y + 1))


def primal(d: DualBond) -> Bond:
    """Inverse of :func:`dual`."""
    if d.u.x2 == d.v.x2:
        return Bond((d.u.x2 - 1) // 2, (d.u.y2 + 1) // 2, HORIZONTAL)
    return Bond((d.u.x2 + 1) // 2, (d.u.y2 - 1) // 2, VERTICAL)


@dataclass(frozen=True)
class Region:
    """Axis-aligned window of vertices ``[x_min, x_max] x [y_min, y_max]``.

    ``y_max=None`` marks an upward-unbounded semi-cylinder.  Bonds are those
    with both endpoints inside.  They are indexed row-major by (y, x) with the
    horizontal bond before the vertical one at each vertex, so the index of a
    bond is an O(1) formula.
    """

    x_min: int
    x_max: int
    y_min: int
    y_max: int | None

    def __post_init__(self):
        if self.x_min > self.x_max:
            raise ValueError("x_min > x_max")
        if self.y_max is not None and self.y_min > self.y_max:
            raise ValueError("y_min > y_max")

    @classmethod
    def semi_cylinder(cls, N: int) -> "Region":
        return cls(1, N, 0, None)

    @property
    def bounded(self) -> bool:
        return self.y_max is not None

    @property
    def width(self) -> int:
        return self.x_max - self.x_min + 1

    @property
    def height(self) -> int:
        if self.y_max is None:
            raise ValueError("unbounded region has no height")
        return self.y_max - self.y_min + 1

    def capped(self, y_max: int) -> "Region":
        return Region(self.x_min, self.x_max, self.y_min, y_max)

    def _resolve(self, cap: int | None) -> "Region":
        if self.bounded:
            return self
        if cap is None:
            raise ValueError("unbounded region needs a height cap for bond enumeration")
        return self.capped(cap)

    @property
    def n_bonds(self) -> int:
        W, H = self.width, self.height
        return (W - 1) * H + W * (H - 1)

    @property
    def row_stride(self) -> int:
        return 2 * self.width - 1

    def contains(self, v) -> bool:
        x, y = v
        return (self.x_min <= x <= self.x_max and self.y_min <= y
                and (self.y_max is None or y <= self.y_max))

    def contains_bond(self, b: Bond) -> bool:
        return all(self.contains(v) for v in b.endpoints)

    def index(self, b: Bond) -> int:
        if not self.contains_bond(b):
            raise KeyError(f"{b} not in {self}")
        i, j = b.x - self.x_min, b.y - self.y_min
        if self.y_max is not None and b.y == self.y_max:
            return j * self.row_stride + i
        if b.orient == HORIZONTAL:
            return j * self.row_stride + 2 * i
        if i == self.width - 1:
            return j * self.row_stride + 2 * i
        return j * self.row_stride + 2 * i + 1

    def bond_at(self, idx: int) -> Bond:
        j, r = divmod(idx, self.row_stride)
        if self.y_max is not None and self.y_min + j == self.y_max:
            if r >= self.width - 1:
                raise IndexError(idx)
            return Bond(self.x_min + r, self.y_max, HORIZONTAL)
        if r == 2 * self.width - 2:
            return Bond(self.x_max, self.y_min + j, VERTICAL)
        i, o = divmod(r, 2)
        return Bond(self.x_min + i, self.y_min + j, o)

    def bonds(self, cap: int | None = None) -> Iterator[Bond]:
        r = self._resolve(cap)
        for y in range(r.y_min, r.y_max + 1):
            for x in range(r.x_min, r.x_max + 1):
                if x < r.x_max:
                    yield Bond(x, y, HORIZONTAL)
                if y < r.y_max:
                    yield Bond(x, y, VERTICAL)

    def vertices(self, cap: int | None = None) -> Iterator[Vertex]:
        r = self._resolve(cap)
        for y in range(r.y_min, r.y_max + 1):
            for x in range(r.x_min, r.x_max + 1):
                yield Vertex(x, y)


def enumerate_bonds(r: Region, cap: int | None = None) -> list[Bond]:
    """All bonds of ``r`` in index order.  Unbounded regions need ``cap``."""
    return list(r.bonds(cap))


def _ceil_exact(v: float) -> int:
    # cumulative float sums like 0.1+0.2 must not push an integer boundary up
    return math.ceil(round(v, 9))


# Named profile functions rho: [0, 1] -> (1/2, 1).
RHO_PRESETS: dict[str, Callable[[float], float]] = {
    "linear": lambda u: 0.7 + 0.2 * u,
    "sine": lambda u: 0.75 + 0.1 * math.sin(math.pi * u),
    "valley": lambda u: 0.85 - 0.15 * math.sin(math.pi * u),
}


def rho_function(name: str, p: float | None = None) -> Callable[[float], float]:
    if name == "constant":
        if p is None:
            raise ValueError("constant rho needs 'p'")
        return lambda u: p
    try:
        return RHO_PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown rho preset {name!r}; known: constant, {', '.join(RHO_PRESETS)}") from None


def strip_count(N: int, m: int = 2) -> int:
    """Default strip-count rule K_N = ceil(N^(1/(m+1)))."""
    if m < 2:
        raise ValueError("m must be >= 2")
    K = max(1, round(N ** (1.0 / (m + 1))))
    while K ** (m + 1) < N:
        K += 1
    while K > 1 and (K - 1) ** (m + 1) >= N:
        K -= 1
    return K


@dataclass(frozen=True)
class DensityProfile:
    """Piecewise-constant densities over vertical strips.

    ``k`` are the relative strip widths, ``p`` the densities.  A profile built
    from a profile function carries ``rho`` (preset name) and ``m`` and is
    resolved for a given N by :meth:`at`.
    """

    k: tuple[float, ...]
    p: tuple[float, ...]
    rho: str | None = None
    m: int | None = None
    rho_p: float | None = None
    _bounds_cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "k", tuple(float(v) for v in self.k))
        object.__setattr__(self, "p", tuple(float(v) for v in self.p))
        if len(self.k) != len(self.p) or not self.k:
            raise ValueError("k and p must be non-empty and of equal length")
        if any(v <= 0 for v in self.k):
            raise ValueError("strip weights must be positive")
        if abs(sum(self.k) - 1.0) > 1e-12:
            raise ValueError(f"strip weights sum to {sum(self.k)!r}, not 1")
        if any(not 0.0 <= v <= 1.0 for v in self.p):
            raise ValueError("densities must lie in [0, 1]")

    @classmethod
    def homogeneous(cls, p: float) -> "DensityProfile":
        return cls((1.0,), (p,))

    @classmethod
    def from_rho(cls, name: str, N: int, m: int = 2, K: int | None = None,
                 p: float | None = None) -> "DensityProfile":
        f = rho_function(name, p)
        K = strip_count(N, m) if K is None else K
        dens = [f(i / K) for i in range(1, K + 1)]
        if any(not 0.5 < v < 1.0 for v in dens):
            raise ValueError(f"rho preset {name!r} leaves (1/2, 1)")
        return cls((1.0 / K,) * (K - 1) + (1.0 - (K - 1) / K,), dens, rho=name, m=m, rho_p=p)

    @property
    def K(self) -> int:
        return len(self.k)

    @property
    def cumulative(self) -> tuple[float, ...]:
        """Strip boundaries l_0 = 0 < l_1 < ... < l_K = 1."""
        out, s = [0.0], 0.0
        for v in self.k:
            s += v
            out.append(s)
        out[-1] = 1.0
        return tuple(out)

    @property
    def interior(self) -> bool:
        """All densities strictly inside (0, 1), as bounded energy requires."""
        return all(0.0 < v < 1.0 for v in self.p)

    def boundaries(self, N: int) -> list[int]:
        """Integer strip starts ceil(l_i N) for i = 1..K-1."""
        if N not in self._bounds_cache:
            self._bounds_cache[N] = [_ceil_exact(l * N) for l in self.cumulative[1:-1]]
        return self._bounds_cache[N]

    def strip_of_column(self, X: int, N: int) -> int:
        return bisect.bisect_right(self.boundaries(N), X) + 1

    def column_densities(self, N: int, x_lo: int, x_hi: int) -> np.ndarray:
        """Density of bonds with X(b) = x for x in [x_lo, x_hi]."""
        p = np.asarray(self.p)
        return np.array([p[self.strip_of_column(x, N) - 1] for x in range(x_lo, x_hi + 1)],
                        dtype=np.float64)

    def to_json(self) -> dict:
        if self.rho is not None:
            d = {"rho": self.rho, "m": self.m}
            if self.rho_p is not None:
                d["p"] = self.rho_p
            return d
        return {"k": list(self.k), "p": list(self.p)}

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, d: dict, N: int | None = None) -> "DensityProfile":
        """Parse ``{"k": [...], "p": [...]}`` or ``{"rho": name, "m": int}``.

        A rho profile depends on N through its strip count and needs ``N``.
        """
        if "rho" in d:
            if N is None:
                raise ValueError("rho profiles are resolved per N")
            return cls.from_rho(d["rho"], N, int(d.get("m", 2)), d.get("K"), d.get("p"))
        return cls(tuple(d["k"]), tuple(d["p"]))


def strip_of(b: Bond, prof: DensityProfile, N: int) -> int:
    """1-based strip owning bond ``b`` in the width-N geometry.

    Strip i covers X(b) in [ceil(l_{i-1} N), ceil(l_i N)); the last strip is
    closed on the right and everything outside [0, N] is clamped to the first
    or last strip.
    """
    return prof.strip_of_column(b.X, N)
