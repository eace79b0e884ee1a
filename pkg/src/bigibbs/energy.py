"""Pair potentials and the insertion-cost calculus for two-species states.

The model is built from three symmetric, isotropic pair potentials: a
cross potential acting between species and one self potential per species.
The cost of inserting a plus point x into the state (gplus, gminus) is

    r_plus = exp{ -sum_{y in gminus} phi_cross(x, y)
                  -sum_{x' in gplus} phi_self_plus(x, x') }

and symmetrically for the minus species. Inserting one point of each
species at once costs

    r_full(g, x, y) = r_plus(gplus, gminus + y, x) * r_minus(g, y)
                    = r_minus(gplus + x, gminus, y) * r_plus(g, x),

and inserting whole finite configurations costs the telescoped products
R_plus / R_minus / R_full. The telescoping is well defined (independent of
insertion order) because the single-point costs satisfy cocycle and
balance identities; the public functions evaluate the alternative
factorizations independently and fail loudly if they ever disagree.

Everything is carried in log domain. A log value of -inf encodes density
zero from a hard-core violation; products of many Boltzmann factors would
underflow in linear domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CoincidentPoint
from .geometry import (
    Configuration,
    Point,
    TwoComponentConfiguration,
    Window,
    union_disjoint,
)
from .intensity import IntensityMeasure

POTENTIAL_KINDS = ("none", "step", "hardcore", "soft-core-power")

# Exact algebraic identities hold up to float rounding only; these bounds
# cover accumulation across the longest products exercised here.
FACTORIZATION_TOL = 1e-12


@dataclass(frozen=True)
class PairPotential:
    """Symmetric isotropic pair potential, a function of |x - y| only.

    kind "none": identically 0.
    kind "step": amplitude inside the interaction radius, 0 beyond.
    kind "hardcore": +inf inside the radius (forbidden), 0 beyond.
    kind "soft-core-power": amplitude * (radius/dist)^exponent inside the
    radius, 0 beyond.
    """

    kind: str
    amplitude: float = 0.0
    radius: float = 1.0
    exponent: float = 1.0

    def __post_init__(self):
        if self.kind not in POTENTIAL_KINDS:
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if self.kind != "none" and not self.radius > 0:
            raise ValueError("interaction radius must be > 0")
        if self.kind in ("step", "soft-core-power") and not math.isfinite(self.amplitude):
            raise ValueError(f"{self.kind} potential needs a finite amplitude")
        if self.kind == "soft-core-power" and not self.exponent > 0:
            raise ValueError("soft-core exponent must be > 0")

    def values(self, dists: np.ndarray) -> np.ndarray:
        """Potential values for an array of pair distances (may contain +inf)."""
        d = np.asarray(dists, dtype=float)
        if self.kind == "none":
            return np.zeros_like(d)
        inside = d <= self.radius
        if self.kind == "step":
            return np.where(inside, self.amplitude, 0.0)
        if self.kind == "hardcore":
            return np.where(inside, np.inf, 0.0)
        # soft-core power: diverges as d -> 0, which is the intended
        # strong-repulsion limit; overflow to +inf is acceptable there
        with np.errstate(divide="ignore", over="ignore"):
            core = self.amplitude * (self.radius / d) ** self.exponent
        return np.where(inside, core, 0.0)

    def value(self, x: Point, y: Point) -> float:
        if x == y:
            raise CoincidentPoint("pair potential evaluated at coincident points")
        return float(self.values(np.linalg.norm(x.as_array() - y.as_array())))

    @property
    def is_nonnegative(self) -> bool:
        # hardcore contributes +inf, which counts as nonnegative repulsion
        return self.kind in ("none", "hardcore") or self.amplitude >= 0

    @property
    def has_hard_core(self) -> bool:
        return self.kind == "hardcore"


def no_interaction() -> PairPotential:
    return PairPotential("none")


def step_potential(amplitude: float, radius: float) -> PairPotential:
    return PairPotential("step", amplitude=amplitude, radius=radius)


def hard_core(radius: float) -> PairPotential:
    return PairPotential("hardcore", amplitude=math.inf, radius=radius)


def soft_core(amplitude: float, radius: float, exponent: float) -> PairPotential:
    return PairPotential("soft-core-power", amplitude=amplitude, radius=radius, exponent=exponent)


@dataclass(frozen=True)
class PotentialModel:
    """Cross and self potentials plus the reference intensity measure."""

    cross: PairPotential
    self_plus: PairPotential
    self_minus: PairPotential
    intensity: IntensityMeasure

    @property
    def is_nonnegative(self) -> bool:
        """True when every amplitude is >= 0 (enables the rejection oracle)."""
        return (
            self.cross.is_nonnegative
            and self.self_plus.is_nonnegative
            and self.self_minus.is_nonnegative
        )


@dataclass(frozen=True)
class LogDensity:
    """A density value carried as its logarithm; -inf encodes density 0."""

    log_value: float

    @property
    def value(self) -> float:
        return math.exp(self.log_value)

    @property
    def is_zero(self) -> bool:
        return self.log_value == -math.inf

    def __float__(self) -> float:
        return self.log_value


def phi_sum(p: PairPotential, x: Point, c: Configuration) -> float:
    """Sum of p(x, y) over y in c; +inf if any hard-core pair is in range."""
    if x in c:
        raise CoincidentPoint(f"{x.coords!r} coincides with a configuration point")
    if len(c) == 0 or p.kind == "none":
        return 0.0
    d = np.linalg.norm(c.coords_array() - x.as_array(), axis=1)
    if p.kind == "hardcore":
        return math.inf if bool(np.any(d <= p.radius)) else 0.0
    return float(np.sum(p.values(d)))


class CellList:
    """Uniform-grid index over a configuration for finite-range pair sums.

    Valid for potentials whose radius does not exceed the cell size: every
    point outside the 3^d neighboring cells is then farther than the radius
    and contributes exactly zero. Summation order differs from the direct
    loop, so totals agree only up to float rounding.
    """

    def __init__(self, c: Configuration, w: Window, cell_size: float):
        if not cell_size > 0:
            raise ValueError("cell size must be > 0")
        self.window = w
        self.cell_size = float(cell_size)
        self._shape = tuple(
            max(1, int(math.ceil((hi - lo) / cell_size)))
            for lo, hi in zip(w.lower, w.upper)
        )
        self._cells: dict[tuple[int, ...], list[Point]] = {}
        for p in c:
            self._cells.setdefault(self._cell_of(p.coords), []).append(p)

    def _cell_of(self, coords) -> tuple[int, ...]:
        idx = []
        for c, lo, n in zip(coords, self.window.lower, self._shape):
            i = int((c - lo) / self.cell_size)
            idx.append(min(max(i, 0), n - 1))
        return tuple(idx)

    def _neighborhood(self, coords) -> list[Point]:
        center = self._cell_of(coords)
        found: list[Point] = []
        ranges = [
            range(max(0, i - 1), min(n, i + 2)) for i, n in zip(center, self._shape)
        ]
        for cell in _product_tuples(ranges):
            found.extend(self._cells.get(cell, ()))
        return found

    def phi_sum(self, p: PairPotential, x: Point) -> float:
        if p.kind != "none" and p.radius > self.cell_size:
            raise ValueError("potential radius exceeds the cell size")
        near = self._neighborhood(x.coords)
        if any(q == x for q in near):
            raise CoincidentPoint(f"{x.coords!r} coincides with an indexed point")
        if not near or p.kind == "none":
            return 0.0
        arr = np.array([q.coords for q in near], dtype=float)
        d = np.linalg.norm(arr - x.as_array(), axis=1)
        if p.kind == "hardcore":
            return math.inf if bool(np.any(d <= p.radius)) else 0.0
        return float(np.sum(p.values(d)))


def _product_tuples(ranges):
    if not ranges:
        yield ()
        return
    head, *tail = ranges
    for i in head:
        for rest in _product_tuples(tail):
            yield (i,) + rest


# -- single-point insertion costs -------------------------------------------


def _log_r_plus(m: PotentialModel, gplus: Configuration, gminus: Configuration, x: Point) -> float:
    return -(phi_sum(m.cross, x, gminus) + phi_sum(m.self_plus, x, gplus))


def _log_r_minus(m: PotentialModel, gplus: Configuration, gminus: Configuration, y: Point) -> float:
    return -(phi_sum(m.cross, y, gplus) + phi_sum(m.self_minus, y, gminus))


def log_insertion_cost(
    m: PotentialModel,
    g: TwoComponentConfiguration,
    species: str,
    x: Point,
    boundary: TwoComponentConfiguration | None = None,
) -> float:
    """Log single-point insertion cost, optionally conditioned on a boundary.

    Pair sums are additive over point sets, so the boundary contribution is
    added separately instead of materializing union configurations.
    """
    if species == "plus":
        s = phi_sum(m.cross, x, g.minus) + phi_sum(m.self_plus, x, g.plus)
        if boundary is not None and boundary.total_points:
            s += phi_sum(m.cross, x, boundary.minus) + phi_sum(m.self_plus, x, boundary.plus)
    elif species == "minus":
        s = phi_sum(m.cross, x, g.plus) + phi_sum(m.self_minus, x, g.minus)
        if boundary is not None and boundary.total_points:
            s += phi_sum(m.cross, x, boundary.plus) + phi_sum(m.self_minus, x, boundary.minus)
    else:
        raise ValueError(f"species must be 'plus' or 'minus', got {species!r}")
    return -s


def r_plus(m: PotentialModel, g: TwoComponentConfiguration, x: Point) -> LogDensity:
    """Log insertion cost of one plus point x given the state g."""
    return LogDensity(_log_r_plus(m, g.plus, g.minus, x))


def r_minus(m: PotentialModel, g: TwoComponentConfiguration, y: Point) -> LogDensity:
    """Log insertion cost of one minus point y given the state g."""
    return LogDensity(_log_r_minus(m, g.plus, g.minus, y))


def log_close(a: float, b: float, tol: float = FACTORIZATION_TOL) -> bool:
    """Compare log values, treating -inf as an exact zero-density match."""
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= tol


def _require_consistent(a: float, b: float, what: str) -> None:
    if not log_close(a, b):
        raise ArithmeticError(
            f"{what} disagree: {a!r} vs {b!r}; "
            "the insertion-cost algebra has been violated"
        )


def _check_joint_args(g: TwoComponentConfiguration, pts: tuple[Point, ...]) -> None:
    seen = set()
    for p in pts:
        if p in g.plus or p in g.minus or p in seen:
            raise CoincidentPoint(f"{p.coords!r} coincides with another argument point")
        seen.add(p)


def _log_r_joint(
    m: PotentialModel,
    gplus: Configuration,
    gminus: Configuration,
    x: Point,
    y: Point,
) -> float:
    # single-factorization form; callers cross-check orders where required
    return _log_r_plus(m, gplus, Configuration(gminus.points + (y,)), x) + _log_r_minus(
        m, gplus, gminus, y
    )


def r_full(m: PotentialModel, g: TwoComponentConfiguration, x: Point, y: Point) -> LogDensity:
    """Log cost of inserting the pair (x plus, y minus) simultaneously.

    Both insertion orders are evaluated; they must agree up to rounding or
    the call fails, since their equality is what makes the joint cost well
    defined.
    """
    _check_joint_args(g, (x, y))
    first = _log_r_joint(m, g.plus, g.minus, x, y)
    second = _log_r_minus(m, union_disjoint(g.plus, x), g.minus, y) + _log_r_plus(
        m, g.plus, g.minus, x
    )
    _require_consistent(first, second, "joint insertion factorizations")
    return LogDensity(first)


# -- telescoped multi-point costs -------------------------------------------


def _log_R_plus(
    m: PotentialModel, gplus: Configuration, gminus: Configuration, eta: Configuration
) -> float:
    total = 0.0
    grown = gplus
    for x in eta:
        total += _log_r_plus(m, grown, gminus, x)
        if total == -math.inf:
            return total
        grown = Configuration(grown.points + (x,))
    return total


def _log_R_minus(
    m: PotentialModel, gplus: Configuration, gminus: Configuration, eta: Configuration
) -> float:
    total = 0.0
    grown = gminus
    for y in eta:
        total += _log_r_minus(m, gplus, grown, y)
        if total == -math.inf:
            return total
        grown = Configuration(grown.points + (y,))
    return total


def R_plus(m: PotentialModel, g: TwoComponentConfiguration, eta: Configuration) -> LogDensity:
    """Log cost of inserting the whole plus configuration eta into g.

    Telescopes single insertions in eta's stored order; the value is
    order-independent, and R_plus of the empty configuration is 1.
    """
    _check_joint_args(g, eta.points)
    return LogDensity(_log_R_plus(m, g.plus, g.minus, eta))


def R_minus(m: PotentialModel, g: TwoComponentConfiguration, eta: Configuration) -> LogDensity:
    """Mirror of :func:`R_plus` for the minus species."""
    _check_joint_args(g, eta.points)
    return LogDensity(_log_R_minus(m, g.plus, g.minus, eta))


def _log_R_full(
    m: PotentialModel,
    gplus: Configuration,
    gminus: Configuration,
    eta_plus: Configuration,
    eta_minus: Configuration,
) -> float:
    gminus_aug = Configuration(gminus.points + eta_minus.points)
    return _log_R_plus(m, gplus, gminus_aug, eta_plus) + _log_R_minus(
        m, gplus, gminus, eta_minus
    )


def R_full(
    m: PotentialModel,
    g: TwoComponentConfiguration,
    eta_plus: Configuration,
    eta_minus: Configuration,
) -> LogDensity:
    """Log cost of inserting eta_plus and eta_minus jointly into g.

    Evaluates both species orders, and additionally the stepwise
    pair-insertion product when the two configurations have equal size;
    all routes must agree up to rounding.
    """
    _check_joint_args(g, eta_plus.points + eta_minus.points)
    first = _log_R_full(m, g.plus, g.minus, eta_plus, eta_minus)
    gplus_aug = Configuration(g.plus.points + eta_plus.points)
    second = _log_R_minus(m, gplus_aug, g.minus, eta_minus) + _log_R_plus(
        m, g.plus, g.minus, eta_plus
    )
    _require_consistent(first, second, "joint multi-insertion factorizations")
    if len(eta_plus) == len(eta_minus) and len(eta_plus) > 0:
        stepwise = 0.0
        gp, gm = g.plus, g.minus
        for x, y in zip(eta_plus, eta_minus):
            stepwise += _log_r_joint(m, gp, gm, x, y)
            if stepwise == -math.inf:
                break
            gp = Configuration(gp.points + (x,))
            gm = Configuration(gm.points + (y,))
        _require_consistent(first, stepwise, "pairwise multi-insertion product")
    return LogDensity(first)
