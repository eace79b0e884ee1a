"""Reference intensity measures and Poisson sampling on a window.

The reference measure is z times Lebesgue measure, optionally modulated by
a bounded density. That family covers the homogeneous case used by every
concrete interacting model here while still allowing inhomogeneity tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ValidationError
from .geometry import Configuration, Point, Window
from .randomness import RngState

# Named density presets accepted by the config layer. None means the
# constant density 1.
DENSITY_PRESETS: dict[str, Callable[[np.ndarray], np.ndarray] | None] = {
    "constant": None,
    "linear-x1": lambda arr: np.asarray(arr, dtype=float)[..., 0],
}


@dataclass(frozen=True)
class IntensityMeasure:
    """Intensity z per unit volume, optionally modulated by ``density``.

    ``density`` maps an (..., d) coordinate array to nonnegative values and
    must be bounded by ``density_max`` (needed for thinning). ``quadrature_cells``
    is the per-axis midpoint grid resolution used for deterministic mass
    integrals of modulated densities.
    """

    z: float
    density: Callable[[np.ndarray], np.ndarray] | None = None
    density_max: float = 1.0
    quadrature_cells: int = 256

    def __post_init__(self):
        if not self.z > 0:
            raise ValidationError([f"intensity.z must be > 0, got {self.z}"])
        if not self.density_max > 0:
            raise ValidationError([f"density_max must be > 0, got {self.density_max}"])
        if self.quadrature_cells < 1:
            raise ValidationError(["quadrature_cells must be >= 1"])

    def density_at(self, coords: np.ndarray) -> np.ndarray:
        """Density values for an (..., d) coordinate array."""
        coords = np.asarray(coords, dtype=float)
        if self.density is None:
            return np.ones(coords.shape[:-1], dtype=float)
        vals = np.asarray(self.density(coords), dtype=float)
        if np.any(vals < 0):
            raise ValidationError(["density returned a negative value"])
        if np.any(vals > self.density_max * (1 + 1e-12)):
            raise ValidationError(
                [f"density exceeds declared density_max={self.density_max}"]
            )
        return vals


def mass(m: IntensityMeasure, w: Window) -> float:
    """Total intensity mass of the window, z * integral of the density.

    Constant densities are exact; modulated ones use midpoint quadrature on
    a fixed grid so the result is deterministic.
    """
    if m.density is None:
        return m.z * w.volume
    centers_1d = [
        lo + (hi - lo) * (np.arange(m.quadrature_cells) + 0.5) / m.quadrature_cells
        for lo, hi in zip(w.lower, w.upper)
    ]
    mesh = np.meshgrid(*centers_1d, indexing="ij")
    grid = np.stack([g.ravel() for g in mesh], axis=-1)
    return m.z * w.volume * float(np.mean(m.density_at(grid)))


def sample_poisson(m: IntensityMeasure, w: Window, rng: RngState) -> Configuration:
    """One Poisson configuration on ``w`` with intensity measure ``m``.

    Homogeneous proposal at rate z * density_max, thinned by
    density / density_max; the retained count has mean ``mass(m, w)``.
    """
    while True:
        n = rng.poisson(m.z * w.volume * (1.0 if m.density is None else m.density_max))
        coords = rng.uniform_in(w, n)
        if m.density is not None and n > 0:
            keep = rng.random(n) < m.density_at(coords) / m.density_max
            coords = coords[keep]
        # exact duplicate coordinates have probability zero; redraw if the
        # generator ever produces one so configurations stay well-formed
        pts = [Point(tuple(c)) for c in coords]
        if len(set(pts)) == len(pts):
            return Configuration(pts)


def draw_sigma_point(m: IntensityMeasure, w: Window, rng: RngState) -> tuple[Point, float]:
    """One importance point for integrals against the intensity measure.

    Returns x uniform on ``w`` with weight z * volume * density(x), so
    averaging f(x) * weight over draws estimates the measure integral of f
    without bias.
    """
    coords = rng.uniform_in(w, 1)[0]
    weight = m.z * w.volume * float(m.density_at(coords))
    return Point(tuple(coords)), weight
