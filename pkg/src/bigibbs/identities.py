"""Randomized self-consistency checks for the insertion-cost algebra.

For pair-potential models the single-point costs satisfy exact algebraic
identities (cocycle, balance, and their joint and multi-point forms), and
the telescoped configuration costs factor and commute accordingly. Each
check here evaluates the two sides of one identity through independent
code routes and reports the worst log-domain gap over randomized models,
configurations, and points. Hard-core zeros must occur on both sides
together; a finite/zero mismatch counts as an infinite gap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations

from .energy import (
    PairPotential,
    PotentialModel,
    _log_r_joint,
    _log_r_minus,
    _log_r_plus,
    _log_R_full,
    _log_R_minus,
    _log_R_plus,
)
from .geometry import Configuration, Point, Window
from .intensity import IntensityMeasure
from .randomness import RngState

IDENTITY_NAMES = (
    "cocycle-plus",
    "cocycle-minus",
    "balance",
    "joint-cocycle",
    "joint-factorization",
    "order-invariance",
    "composition",
    "multi-balance",
    "pair-product",
)

DEFAULT_TOL = 1e-11


@dataclass
class IdentityCheckResult:
    name: str
    instances: int = 0
    exact_matches: int = 0  # sides agreed to the last bit (incl. matched hard-core zeros)
    max_gap: float = 0.0
    failures: int = 0

    def record(self, gap: float, tol: float) -> None:
        self.instances += 1
        if gap == 0.0:
            self.exact_matches += 1
        self.max_gap = max(self.max_gap, gap)
        if not gap <= tol:
            self.failures += 1

    @property
    def passed(self) -> bool:
        return self.failures == 0


def _gap(a: float, b: float) -> float:
    if math.isinf(a) or math.isinf(b):
        return 0.0 if a == b else math.inf
    return abs(a - b)


def _extend(c: Configuration, pts) -> Configuration:
    return Configuration(c.points + tuple(pts))


# -- randomized inputs -------------------------------------------------------


def _random_potential(rng: RngState) -> PairPotential:
    u = rng.random()
    radius = 0.05 + 0.3 * rng.random()
    if u < 0.2:
        return PairPotential("none")
    if u < 0.55:
        return PairPotential("step", amplitude=-2.0 + 5.0 * rng.random(), radius=radius)
    if u < 0.75:
        return PairPotential("hardcore", amplitude=math.inf, radius=radius)
    return PairPotential(
        "soft-core-power",
        amplitude=-1.0 + 3.0 * rng.random(),
        radius=radius,
        exponent=0.5 + 2.5 * rng.random(),
    )


def _random_model(rng: RngState) -> PotentialModel:
    return PotentialModel(
        cross=_random_potential(rng),
        self_plus=_random_potential(rng),
        self_minus=_random_potential(rng),
        intensity=IntensityMeasure(z=1.0),
    )


def _random_points(rng: RngState, w: Window, n: int, taken: set[Point]) -> list[Point]:
    out: list[Point] = []
    while len(out) < n:
        p = Point(tuple(rng.uniform_in(w, 1)[0]))
        if p not in taken:
            taken.add(p)
            out.append(p)
    return out


# -- individual identity checks ---------------------------------------------


def cocycle_plus_gap(m, gp, gm, x, x2) -> float:
    lhs = _log_r_plus(m, _extend(gp, [x2]), gm, x) + _log_r_plus(m, gp, gm, x2)
    rhs = _log_r_plus(m, _extend(gp, [x]), gm, x2) + _log_r_plus(m, gp, gm, x)
    return _gap(lhs, rhs)


def cocycle_minus_gap(m, gp, gm, y, y2) -> float:
    lhs = _log_r_minus(m, gp, _extend(gm, [y2]), y) + _log_r_minus(m, gp, gm, y2)
    rhs = _log_r_minus(m, gp, _extend(gm, [y]), y2) + _log_r_minus(m, gp, gm, y)
    return _gap(lhs, rhs)


def balance_gap(m, gp, gm, x, y) -> float:
    lhs = _log_r_plus(m, gp, _extend(gm, [y]), x) + _log_r_minus(m, gp, gm, y)
    rhs = _log_r_minus(m, _extend(gp, [x]), gm, y) + _log_r_plus(m, gp, gm, x)
    return _gap(lhs, rhs)


def joint_factorization_gap(m, gp, gm, x, y) -> float:
    # plus-first versus minus-first evaluation of the pair-insertion cost
    first = _log_r_joint(m, gp, gm, x, y)
    second = _log_r_minus(m, _extend(gp, [x]), gm, y) + _log_r_plus(m, gp, gm, x)
    return _gap(first, second)


def joint_cocycle_gap(m, gp, gm, x, y, x2, y2) -> float:
    lhs = _log_r_joint(m, _extend(gp, [x2]), _extend(gm, [y2]), x, y) + _log_r_joint(
        m, gp, gm, x2, y2
    )
    rhs = _log_r_joint(m, _extend(gp, [x]), _extend(gm, [y]), x2, y2) + _log_r_joint(
        m, gp, gm, x, y
    )
    return _gap(lhs, rhs)


def order_invariance_gap(m, gp, gm, eta_p, eta_m, rng: RngState) -> float:
    """R values must not depend on the stored order of the inserted points."""
    worst = 0.0
    for eta, logR in ((eta_p, _log_R_plus), (eta_m, _log_R_minus)):
        if len(eta) < 2:
            continue
        base = logR(m, gp, gm, eta)
        perms = (
            list(permutations(eta.points))
            if len(eta) <= 3
            else [_shuffled(rng, eta.points) for _ in range(8)]
        )
        for perm in perms:
            worst = max(worst, _gap(base, logR(m, gp, gm, Configuration(perm))))
    if len(eta_p) >= 1 and len(eta_m) >= 1:
        base = _log_R_full(m, gp, gm, eta_p, eta_m)
        for _ in range(4):
            pp = Configuration(_shuffled(rng, eta_p.points))
            mm = Configuration(_shuffled(rng, eta_m.points))
            worst = max(worst, _gap(base, _log_R_full(m, gp, gm, pp, mm)))
    return worst


def _shuffled(rng: RngState, pts: tuple) -> tuple:
    idx = list(range(len(pts)))
    for i in range(len(idx) - 1, 0, -1):
        j = rng.integer(i + 1)
        idx[i], idx[j] = idx[j], idx[i]
    return tuple(pts[i] for i in idx)


def composition_gap(m, gp, gm, e1p, e2p, e1m, e2m) -> float:
    """Splitting the inserted configurations factors the total cost."""
    worst = _gap(
        _log_R_plus(m, gp, gm, _extend(e1p, e2p.points)),
        _log_R_plus(m, gp, gm, e1p) + _log_R_plus(m, _extend(gp, e1p.points), gm, e2p),
    )
    worst = max(
        worst,
        _gap(
            _log_R_minus(m, gp, gm, _extend(e1m, e2m.points)),
            _log_R_minus(m, gp, gm, e1m)
            + _log_R_minus(m, gp, _extend(gm, e1m.points), e2m),
        ),
    )
    worst = max(
        worst,
        _gap(
            _log_R_full(m, gp, gm, _extend(e1p, e2p.points), e1m),
            _log_R_full(m, _extend(gp, e2p.points), gm, e1p, e1m)
            + _log_R_plus(m, gp, gm, e2p),
        ),
    )
    worst = max(
        worst,
        _gap(
            _log_R_full(m, gp, gm, e1p, _extend(e1m, e2m.points)),
            _log_R_full(m, gp, _extend(gm, e2m.points), e1p, e1m)
            + _log_R_minus(m, gp, gm, e2m),
        ),
    )
    worst = max(
        worst,
        _gap(
            _log_R_full(m, gp, gm, _extend(e1p, e2p.points), _extend(e1m, e2m.points)),
            _log_R_full(m, _extend(gp, e2p.points), _extend(gm, e2m.points), e1p, e1m)
            + _log_R_full(m, gp, gm, e2p, e2m),
        ),
    )
    return worst


def multi_balance_gap(m, gp, gm, eta_p, eta_m) -> float:
    lhs = _log_R_plus(m, gp, _extend(gm, eta_m.points), eta_p) + _log_R_minus(
        m, gp, gm, eta_m
    )
    rhs = _log_R_minus(m, _extend(gp, eta_p.points), gm, eta_m) + _log_R_plus(
        m, gp, gm, eta_p
    )
    return _gap(lhs, rhs)


def pair_product_gap(m, gp, gm, eta_p, eta_m) -> float:
    """Equal-size insertions telescope as a product of pair-insertion costs."""
    assert len(eta_p) == len(eta_m)
    lhs = _log_R_full(m, gp, gm, eta_p, eta_m)
    rhs = 0.0
    cp, cm = gp, gm
    for x, y in zip(eta_p, eta_m):
        rhs += _log_r_joint(m, cp, cm, x, y)
        if rhs == -math.inf:
            break
        cp = _extend(cp, [x])
        cm = _extend(cm, [y])
    return _gap(lhs, rhs)


# -- the randomized suite ----------------------------------------------------


def run_identity_suite(
    instances: int = 500,
    seed: int = 0,
    max_points: int = 8,
    tol: float = DEFAULT_TOL,
    window: Window | None = None,
) -> dict[str, IdentityCheckResult]:
    """Check all identities on ``instances`` random models and states."""
    w = window or Window((0.0, 0.0), (1.0, 1.0))
    rng = RngState(seed, stream=771)
    results = {name: IdentityCheckResult(name) for name in IDENTITY_NAMES}

    for _ in range(instances):
        m = _random_model(rng)
        taken: set[Point] = set()
        gp = Configuration(_random_points(rng, w, rng.integer(max_points + 1), taken))
        gm = Configuration(_random_points(rng, w, rng.integer(max_points + 1), taken))
        x, x2, y, y2 = _random_points(rng, w, 4, taken)
        k = 1 + rng.integer(3)
        eta_p = Configuration(_random_points(rng, w, k, taken))
        eta_m = Configuration(_random_points(rng, w, k, taken))
        e2p = Configuration(_random_points(rng, w, rng.integer(3), taken))
        e2m = Configuration(_random_points(rng, w, rng.integer(3), taken))

        results["cocycle-plus"].record(cocycle_plus_gap(m, gp, gm, x, x2), tol)
        results["cocycle-minus"].record(cocycle_minus_gap(m, gp, gm, y, y2), tol)
        results["balance"].record(balance_gap(m, gp, gm, x, y), tol)
        results["joint-cocycle"].record(joint_cocycle_gap(m, gp, gm, x, y, x2, y2), tol)
        results["joint-factorization"].record(joint_factorization_gap(m, gp, gm, x, y), tol)
        results["order-invariance"].record(
            order_invariance_gap(m, gp, gm, eta_p, eta_m, rng), tol
        )
        results["composition"].record(
            composition_gap(m, gp, gm, eta_p, e2p, eta_m, e2m), tol
        )
        results["multi-balance"].record(
            multi_balance_gap(m, gp, gm, _extend(eta_p, e2p.points), _extend(eta_m, e2m.points)),
            tol,
        )
        results["pair-product"].record(pair_product_gap(m, gp, gm, eta_p, eta_m), tol)

    return results
