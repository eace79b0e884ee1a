"""Monte Carlo verification of the defining integral identities.

The finite-volume two-species law is characterized by integral equations
that balance a sum over the points of a sampled state against an
intensity-measure integral weighted by the insertion cost. Given samples
from any sampler claiming to target that law, the verifiers here estimate
both sides of one such equation and report a pooled z score. These are
statistical acceptance checks, not proofs: a violated identity shows up as
a large |z|, while a pass bounds the violation at the Monte Carlo scale.

Test functions come from a declared catalogue of nonnegative, bounded
shapes so that every estimator has finite variance and a failure is
attributable to the identity rather than to a pathological integrand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .energy import PotentialModel, R_full, R_plus, log_insertion_cost
from .errors import (
    CoincidentPoint,
    NotNonnegativeModel,
    SubwindowNotContained,
    WrongArity,
)
from .geometry import (
    Configuration,
    Point,
    TwoComponentConfiguration,
    Window,
    empty_two_component,
)
from .intensity import draw_sigma_point, mass, sample_poisson
from .randomness import RngState

Z_THRESHOLD = 3.0


@dataclass(frozen=True)
class TestFunction:
    """A catalogued nonnegative test function of declared arity."""

    id: str
    arity: str  # "point", "pair", or "config"
    fn: Callable = field(compare=False)

    def __call__(self, *args) -> float:
        return float(self.fn(*args))


@dataclass(frozen=True)
class EstimateWithError:
    estimate: float
    std_err: float
    n_samples: int

    @classmethod
    def from_values(cls, values: Sequence[float]) -> "EstimateWithError":
        arr = np.asarray(values, dtype=float)
        n = arr.size
        if n == 0:
            raise ValueError("cannot estimate from zero samples")
        se = float(arr.std(ddof=1)) / math.sqrt(n) if n >= 2 else 0.0
        return cls(float(arr.mean()), se, n)

    def to_dict(self) -> dict:
        return {
            "estimate": self.estimate,
            "std_err": self.std_err,
            "n_samples": self.n_samples,
        }


@dataclass(frozen=True)
class IdentityReport:
    lhs: EstimateWithError
    rhs: EstimateWithError
    z_score: float
    passed: bool
    flags: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "lhs": self.lhs.to_dict(),
            "rhs": self.rhs.to_dict(),
            "z": self.z_score,
            "pass": self.passed,
            "flags": list(self.flags),
        }


def pooled_z_score(lhs: EstimateWithError, rhs: EstimateWithError) -> float:
    """(lhs - rhs) / sqrt(se_lhs^2 + se_rhs^2); zero when both sides are exact."""
    diff = lhs.estimate - rhs.estimate
    pooled = math.hypot(lhs.std_err, rhs.std_err)
    if pooled == 0.0:
        return 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
    return diff / pooled


def _report(lhs_vals, rhs_vals) -> IdentityReport:
    lhs = EstimateWithError.from_values(lhs_vals)
    rhs = EstimateWithError.from_values(rhs_vals)
    flags = ("n-samples-too-small",) if lhs.n_samples < 2 else ()
    z = pooled_z_score(lhs, rhs)
    return IdentityReport(lhs, rhs, z, abs(z) < Z_THRESHOLD, flags)


def _coincides(x: Point, g: TwoComponentConfiguration, b: TwoComponentConfiguration) -> bool:
    return x in g.plus or x in g.minus or x in b.plus or x in b.minus


def _adjoin(g: TwoComponentConfiguration, b: TwoComponentConfiguration) -> TwoComponentConfiguration:
    if not b.total_points:
        return g
    return TwoComponentConfiguration(
        Configuration(g.plus.points + b.plus.points),
        Configuration(g.minus.points + b.minus.points),
    )


# -- one-species sum/integral balance -----------------------------------------


def _verify_cm_one_species(
    samples, model, window, h, n_sigma_points, rng, boundary, species
) -> IdentityReport:
    if h.arity != "point":
        raise WrongArity(f"{h.id} has arity {h.arity!r}, need 'point'")
    b = boundary if boundary is not None else empty_two_component()
    lhs_vals = []
    rhs_vals = []
    for g in samples:
        own = g.plus if species == "plus" else g.minus
        lhs_vals.append(sum(h(g, x) for x in own))
        acc = 0.0
        k = 0
        while k < n_sigma_points:
            x, weight = draw_sigma_point(model.intensity, window, rng)
            if _coincides(x, g, b):
                continue  # zero-probability collision, redraw
            k += 1
            lr = log_insertion_cost(model, g, species, x, b)
            if lr == -math.inf:
                continue  # forbidden insertion contributes exactly zero
            if species == "plus":
                g_aug = TwoComponentConfiguration(
                    Configuration(g.plus.points + (x,)), g.minus
                )
            else:
                g_aug = TwoComponentConfiguration(
                    g.plus, Configuration(g.minus.points + (x,))
                )
            acc += weight * h(g_aug, x) * math.exp(lr)
        rhs_vals.append(acc / n_sigma_points)
    return _report(lhs_vals, rhs_vals)


def verify_cm_plus(
    samples: Sequence[TwoComponentConfiguration],
    model: PotentialModel,
    window: Window,
    h: TestFunction,
    n_sigma_points: int,
    rng: RngState,
    boundary: TwoComponentConfiguration | None = None,
) -> IdentityReport:
    """Balance the sum of h over plus points against its weighted integral.

    The left side averages sum_{x in plus} h(state, x) over samples; the
    right side averages a fresh importance-sampled integral of
    h(state + x, x) * exp(insertion cost) per sample. Fresh draws per
    sample keep the two sides' Monte Carlo noise uncorrelated.
    """
    return _verify_cm_one_species(
        samples, model, window, h, n_sigma_points, rng, boundary, "plus"
    )


def verify_cm_minus(
    samples: Sequence[TwoComponentConfiguration],
    model: PotentialModel,
    window: Window,
    h: TestFunction,
    n_sigma_points: int,
    rng: RngState,
    boundary: TwoComponentConfiguration | None = None,
) -> IdentityReport:
    """Mirror of :func:`verify_cm_plus` for the minus species."""
    return _verify_cm_one_species(
        samples, model, window, h, n_sigma_points, rng, boundary, "minus"
    )


def verify_cm_full(
    samples: Sequence[TwoComponentConfiguration],
    model: PotentialModel,
    window: Window,
    h: TestFunction,
    n_sigma_points: int,
    rng: RngState,
    boundary: TwoComponentConfiguration | None = None,
) -> IdentityReport:
    """Two-species version: double point sum against a double integral.

    The right side inserts one point of each species simultaneously,
    weighting by the joint insertion cost.
    """
    if h.arity != "pair":
        raise WrongArity(f"{h.id} has arity {h.arity!r}, need 'pair'")
    b = boundary if boundary is not None else empty_two_component()
    lhs_vals = []
    rhs_vals = []
    for g in samples:
        lhs_vals.append(sum(h(g, x, y) for x in g.plus for y in g.minus))
        acc = 0.0
        k = 0
        while k < n_sigma_points:
            x, wx = draw_sigma_point(model.intensity, window, rng)
            y, wy = draw_sigma_point(model.intensity, window, rng)
            if x == y or _coincides(x, g, b) or _coincides(y, g, b):
                continue
            k += 1
            g_plus_y = TwoComponentConfiguration(
                g.plus, Configuration(g.minus.points + (y,))
            )
            lr = log_insertion_cost(model, g_plus_y, "plus", x, b) + log_insertion_cost(
                model, g, "minus", y, b
            )
            if lr == -math.inf:
                continue
            g_aug = TwoComponentConfiguration(
                Configuration(g.plus.points + (x,)),
                Configuration(g.minus.points + (y,)),
            )
            acc += wx * wy * h(g_aug, x, y) * math.exp(lr)
        rhs_vals.append(acc / n_sigma_points)
    return _report(lhs_vals, rhs_vals)


# -- window decomposition ------------------------------------------------------


def verify_ruelle(
    samples: Sequence[TwoComponentConfiguration],
    model: PotentialModel,
    window: Window,
    sub_plus: Window,
    sub_minus: Window,
    F: TestFunction,
    rng: RngState,
    n_eta_draws: int = 4,
    boundary: TwoComponentConfiguration | None = None,
) -> IdentityReport:
    """Check the subwindow decomposition of the sampled law.

    The law restricted to the event that the subwindows are empty, filled
    back in with weighted Poisson draws inside them, must reproduce every
    statistic F of the full law. Samples with occupied subwindows
    contribute exactly zero to the right side; the exp(mass) prefactor
    restores normalization.
    """
    if F.arity != "config":
        raise WrongArity(f"{F.id} has arity {F.arity!r}, need 'config'")
    for sub in (sub_plus, sub_minus):
        if not window.contains_window(sub):
            raise SubwindowNotContained(f"{sub} is not inside {window}")
    b = boundary if boundary is not None else empty_two_component()
    scale = math.exp(mass(model.intensity, sub_plus) + mass(model.intensity, sub_minus))
    lhs_vals = []
    rhs_vals = []
    for g in samples:
        lhs_vals.append(F(g))
        occupied = any(sub_plus.contains(p) for p in g.plus) or any(
            sub_minus.contains(p) for p in g.minus
        )
        if occupied:
            rhs_vals.append(0.0)
            continue
        g_cond = _adjoin(g, b)
        acc = 0.0
        k = 0
        while k < n_eta_draws:
            eta_p = sample_poisson(model.intensity, sub_plus, rng)
            eta_m = sample_poisson(model.intensity, sub_minus, rng)
            try:
                logw = R_full(model, g_cond, eta_p, eta_m).log_value
            except CoincidentPoint:
                continue  # zero-probability collision with the state, redraw
            k += 1
            if logw == -math.inf:
                continue
            filled = TwoComponentConfiguration(
                Configuration(g.plus.points + eta_p.points),
                Configuration(g.minus.points + eta_m.points),
            )
            acc += F(filled) * math.exp(logw)
        rhs_vals.append(scale * acc / n_eta_draws)
    return _report(lhs_vals, rhs_vals)


# -- correlation estimators ----------------------------------------------------


def estimate_correlation(
    samples: Sequence[TwoComponentConfiguration],
    model: PotentialModel,
    eta_plus: Configuration,
    eta_minus: Configuration,
    boundary: TwoComponentConfiguration | None = None,
) -> EstimateWithError:
    """Mean insertion cost of (eta_plus, eta_minus) over the sampled states.

    This is the correlation value at those arguments; the empty pair gives
    exactly one with zero spread.
    """
    if set(eta_plus) & set(eta_minus):
        raise CoincidentPoint("a point appears in both correlation arguments")
    b = boundary if boundary is not None else empty_two_component()
    vals = [
        math.exp(R_full(model, _adjoin(g, b), eta_plus, eta_minus).log_value)
        for g in samples
    ]
    return EstimateWithError.from_values(vals)


def estimate_marginal_correlation(
    samples: Sequence[TwoComponentConfiguration],
    model: PotentialModel,
    eta_plus: Configuration,
    boundary: TwoComponentConfiguration | None = None,
) -> EstimateWithError:
    """One-species correlation; per-sample identical to the two-species
    estimate with an empty minus argument."""
    b = boundary if boundary is not None else empty_two_component()
    vals = [
        math.exp(R_plus(model, _adjoin(g, b), eta_plus).log_value) for g in samples
    ]
    return EstimateWithError.from_values(vals)


@dataclass(frozen=True)
class RuelleBoundEntry:
    eta_id: str
    n_plus: int
    n_minus: int
    estimate: float
    std_err: float
    bound: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "eta_id": self.eta_id,
            "n_plus": self.n_plus,
            "n_minus": self.n_minus,
            "estimate": self.estimate,
            "std_err": self.std_err,
            "bound": self.bound,
            "pass": self.passed,
        }


@dataclass(frozen=True)
class RuelleBoundReport:
    entries: tuple[RuelleBoundEntry, ...]
    passed: bool

    def to_dict(self) -> dict:
        return {"entries": [e.to_dict() for e in self.entries], "pass": self.passed}


def check_ruelle_bound(
    samples: Sequence[TwoComponentConfiguration],
    model: PotentialModel,
    window: Window,
    eta_catalogue: Sequence[tuple[Configuration, Configuration]],
    boundary: TwoComponentConfiguration | None = None,
) -> RuelleBoundReport:
    """Exponential envelope on estimated correlation values.

    With nonnegative potentials every insertion cost is at most one, so
    each correlation value is bounded by exp(mass) per species with a unit
    per-point constant; the check allows three standard errors of slack.
    """
    if not model.is_nonnegative:
        raise NotNonnegativeModel("the unit-constant envelope needs nonnegative potentials")
    bound = math.exp(2.0 * mass(model.intensity, window))
    entries = []
    for i, (eta_p, eta_m) in enumerate(eta_catalogue):
        est = estimate_correlation(samples, model, eta_p, eta_m, boundary)
        ok = est.estimate <= bound + Z_THRESHOLD * est.std_err
        entries.append(
            RuelleBoundEntry(
                f"eta-{i}", len(eta_p), len(eta_m), est.estimate, est.std_err, bound, ok
            )
        )
    return RuelleBoundReport(tuple(entries), all(e.passed for e in entries))


# -- summary statistics ----------------------------------------------------------


def cross_pair_count(g: TwoComponentConfiguration, radius: float) -> int:
    """Number of plus/minus pairs within the given distance."""
    if not len(g.plus) or not len(g.minus):
        return 0
    d = np.linalg.norm(
        g.plus.coords_array()[:, None, :] - g.minus.coords_array()[None, :, :], axis=-1
    )
    return int(np.sum(d <= radius))
