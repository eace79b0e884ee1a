"""Points, boxes, and finite point configurations.

A configuration is a finite set of pairwise distinct points in R^d.
Equality and hashing use set semantics, but insertion order is retained so
ordered telescoped products over a configuration are reproducible run to
run. Two-species states pair a "plus" and a "minus" configuration; overlap
between the species is representable (it carries zero probability for
every law sampled here) and is reported by :func:`check_disjoint` rather
than forbidden at construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .errors import DuplicatePoint


@dataclass(frozen=True, slots=True)
class Point:
    """A point in R^d. Compared by exact coordinate equality."""

    coords: tuple[float, ...]

    def __post_init__(self):
        coords = tuple(float(c) for c in self.coords)
        if not coords:
            raise ValueError("a point needs at least one coordinate")
        if not all(math.isfinite(c) for c in coords):
            raise ValueError(f"non-finite coordinates: {coords!r}")
        object.__setattr__(self, "coords", coords)

    @property
    def dim(self) -> int:
        return len(self.coords)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.coords, dtype=float)


def pt(*coords: float) -> Point:
    """Shorthand: ``pt(0.2, 0.3) == Point((0.2, 0.3))``."""
    return Point(tuple(coords))


@dataclass(frozen=True, slots=True)
class Window:
    """Axis-aligned closed box with lower[i] < upper[i] on every axis."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self):
        lower = tuple(float(c) for c in self.lower)
        upper = tuple(float(c) for c in self.upper)
        if not lower or len(lower) != len(upper):
            raise ValueError("lower and upper must have the same nonzero length")
        if not all(math.isfinite(c) for c in lower + upper):
            raise ValueError("window corners must be finite")
        bad = [i for i, (lo, hi) in enumerate(zip(lower, upper)) if not lo < hi]
        if bad:
            raise ValueError(f"window is degenerate on axes {bad}: {lower}..{upper}")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def volume(self) -> float:
        return float(np.prod([hi - lo for lo, hi in zip(self.lower, self.upper)]))

    def contains(self, p: Point) -> bool:
        # Closed-box membership: boundary points count as inside.
        if p.dim != self.dim:
            raise ValueError(f"point dim {p.dim} != window dim {self.dim}")
        return all(lo <= c <= hi for c, lo, hi in zip(p.coords, self.lower, self.upper))

    def contains_coords(self, arr: np.ndarray) -> np.ndarray:
        """Vectorized closed-box membership for an (..., d) coordinate array."""
        arr = np.asarray(arr, dtype=float)
        lo = np.asarray(self.lower)
        hi = np.asarray(self.upper)
        return np.logical_and(arr >= lo, arr <= hi).all(axis=-1)

    def contains_window(self, other: "Window") -> bool:
        if other.dim != self.dim:
            return False
        return all(so >= lo for so, lo in zip(other.lower, self.lower)) and all(
            su <= hi for su, hi in zip(other.upper, self.upper)
        )


class Configuration:
    """Finite set of distinct points. Iteration follows insertion order."""

    __slots__ = ("_points", "_pointset", "_coords")

    def __init__(self, points: Iterable[Point] = ()):
        pts = tuple(points)
        for p in pts:
            if not isinstance(p, Point):
                raise TypeError(f"expected Point, got {type(p).__name__}")
        if pts:
            d = pts[0].dim
            if any(p.dim != d for p in pts):
                raise ValueError("points of one configuration must share a dimension")
        pointset = frozenset(pts)
        if len(pointset) != len(pts):
            raise DuplicatePoint("configuration contains a repeated point")
        self._points = pts
        self._pointset = pointset
        self._coords: np.ndarray | None = None

    @classmethod
    def from_coords(cls, coords: Iterable[Iterable[float]]) -> "Configuration":
        return cls(Point(tuple(c)) for c in coords)

    def to_coords(self) -> list[list[float]]:
        return [list(p.coords) for p in self._points]

    @property
    def points(self) -> tuple[Point, ...]:
        return self._points

    @property
    def dim(self) -> int | None:
        """Spatial dimension, or None for the empty configuration."""
        return self._points[0].dim if self._points else None

    def coords_array(self) -> np.ndarray:
        """(n, d) float array of coordinates; (0, 0) when empty. Cached."""
        if self._coords is None:
            if self._points:
                self._coords = np.array([p.coords for p in self._points], dtype=float)
            else:
                self._coords = np.empty((0, 0), dtype=float)
        return self._coords

    def without(self, p: Point) -> "Configuration":
        if p not in self._pointset:
            raise KeyError(f"{p!r} not in configuration")
        return Configuration(q for q in self._points if q != p)

    def __len__(self) -> int:
        return len(self._points)

    def __iter__(self) -> Iterator[Point]:
        return iter(self._points)

    def __contains__(self, p: object) -> bool:
        return p in self._pointset

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Configuration):
            return NotImplemented
        return self._pointset == other._pointset

    def __hash__(self) -> int:
        return hash(self._pointset)

    def __repr__(self) -> str:
        inner = ", ".join(repr(p.coords) for p in self._points)
        return f"Configuration([{inner}])"


@dataclass(frozen=True, slots=True)
class TwoComponentConfiguration:
    """A pair of configurations, one per species."""

    plus: Configuration
    minus: Configuration

    def __post_init__(self):
        dp, dm = self.plus.dim, self.minus.dim
        if dp is not None and dm is not None and dp != dm:
            raise ValueError("plus and minus configurations live in different dimensions")

    @property
    def total_points(self) -> int:
        return len(self.plus) + len(self.minus)

    def to_dict(self) -> dict:
        return {"plus": self.plus.to_coords(), "minus": self.minus.to_coords()}

    @classmethod
    def from_dict(cls, obj: dict) -> "TwoComponentConfiguration":
        return cls(
            Configuration.from_coords(obj["plus"]),
            Configuration.from_coords(obj["minus"]),
        )


def empty_two_component() -> TwoComponentConfiguration:
    return TwoComponentConfiguration(Configuration(), Configuration())


def project(c: Configuration, w: Window) -> Configuration:
    """Points of ``c`` inside the closed box ``w``, in their original order.

    Idempotent: projecting the result onto ``w`` again is a no-op.
    """
    return Configuration(p for p in c if w.contains(p))


def union_disjoint(c: Configuration, p: Point) -> Configuration:
    """Append ``p`` to ``c``. Raises DuplicatePoint if already present."""
    if p in c:
        raise DuplicatePoint(f"{p.coords!r} already in configuration")
    return Configuration(c.points + (p,))


def check_disjoint(t: TwoComponentConfiguration) -> bool:
    """True iff no exact coordinate coincidence between the two species."""
    return not (t.plus._pointset & t.minus._pointset)
