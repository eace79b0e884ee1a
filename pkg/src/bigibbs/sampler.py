"""Birth-death Metropolis chain for the two-species finite-volume measure.

The target law on a window has unnormalized density R_full(boundary, ., .)
relative to the product of two Poisson processes; a frozen configuration
outside the window conditions the law through the insertion costs. Each
step picks a species fairly, then proposes either the birth of a uniform
point or the death of a uniformly chosen existing point. Acceptance uses
the single-point insertion cost, so the chain is reversible for the target
and never visits hard-core violating states: infeasible births carry an
acceptance probability of exactly zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .energy import PotentialModel, R_full, log_insertion_cost
from .errors import InfeasibleBoundary, ValidationError
from .geometry import (
    Configuration,
    Point,
    TwoComponentConfiguration,
    Window,
    empty_two_component,
)
from .randomness import RngState

MOVE_KEYS = ("birth_plus", "death_plus", "birth_minus", "death_minus")


@dataclass(frozen=True)
class ChainSpec:
    """Immutable description of one chain run."""

    model: PotentialModel
    window: Window
    steps: int
    burnin: int = 0
    thin: int = 1
    boundary: TwoComponentConfiguration = field(default_factory=empty_two_component)
    seed: int = 0
    stream: int = 0

    def __post_init__(self):
        problems = []
        if self.burnin < 0:
            problems.append(f"burnin must be >= 0, got {self.burnin}")
        if self.steps <= self.burnin:
            problems.append(f"steps ({self.steps}) must exceed burnin ({self.burnin})")
        if self.thin < 1:
            problems.append(f"thin must be >= 1, got {self.thin}")
        for label, conf in (("plus", self.boundary.plus), ("minus", self.boundary.minus)):
            for p in conf:
                if self.window.contains(p):
                    problems.append(
                        f"boundary {label} point {p.coords!r} lies inside the window"
                    )
        if problems:
            raise ValidationError(problems)


@dataclass
class ChainState:
    """Mutable state of a running chain; single-owner, like its rng."""

    current: TwoComponentConfiguration
    step_index: int
    rng: RngState
    counters: dict[str, dict[str, int]]
    log_density: float = 0.0


def _fresh_counters() -> dict[str, dict[str, int]]:
    return {k: {"proposed": 0, "accepted": 0} for k in MOVE_KEYS}


def init(spec: ChainSpec) -> ChainState:
    """Start a chain at the empty state, which is always feasible."""
    b = spec.boundary
    if b.total_points:
        if R_full(spec.model, empty_two_component(), b.plus, b.minus).is_zero:
            raise InfeasibleBoundary(
                "boundary configuration violates a hard-core constraint"
            )
    return ChainState(
        current=empty_two_component(),
        step_index=0,
        rng=RngState(spec.seed, spec.stream),
        counters=_fresh_counters(),
        log_density=0.0,
    )


def _accept(rng: RngState, log_ratio: float) -> bool:
    if log_ratio >= 0.0:
        return True
    if log_ratio == -math.inf:
        return False
    return rng.random() < math.exp(log_ratio)


def step(state: ChainState, spec: ChainSpec) -> ChainState:
    """Advance the chain by one birth or death proposal. Mutates ``state``."""
    rng = state.rng
    g = state.current
    species = "plus" if rng.random() < 0.5 else "minus"
    own = g.plus if species == "plus" else g.minus
    other = g.minus if species == "plus" else g.plus
    intensity = spec.model.intensity

    if rng.random() < 0.5:
        move = state.counters[f"birth_{species}"]
        move["proposed"] += 1
        coords = rng.uniform_in(spec.window, 1)[0]
        x = Point(tuple(coords))
        clash = (
            x in g.plus
            or x in g.minus
            or x in spec.boundary.plus
            or x in spec.boundary.minus
        )
        if not clash:
            weight = intensity.z * spec.window.volume * float(intensity.density_at(coords))
            lr = log_insertion_cost(spec.model, g, species, x, spec.boundary)
            log_ratio = math.log(weight) - math.log(len(own) + 1) + lr
            if _accept(rng, log_ratio):
                move["accepted"] += 1
                grown = Configuration(own.points + (x,))
                state.current = (
                    TwoComponentConfiguration(grown, other)
                    if species == "plus"
                    else TwoComponentConfiguration(other, grown)
                )
                state.log_density += lr
    else:
        move = state.counters[f"death_{species}"]
        move["proposed"] += 1
        n = len(own)
        if n > 0:
            x = own.points[rng.integer(n)]
            reduced = own.without(x)
            g_reduced = (
                TwoComponentConfiguration(reduced, other)
                if species == "plus"
                else TwoComponentConfiguration(other, reduced)
            )
            weight = (
                intensity.z
                * spec.window.volume
                * float(intensity.density_at(x.as_array()))
            )
            lr = log_insertion_cost(spec.model, g_reduced, species, x, spec.boundary)
            # lr can only be -inf out of an infeasible state; removal is
            # then certain, matching a log ratio of +inf
            log_ratio = math.log(n) - math.log(weight) - lr
            if _accept(rng, log_ratio):
                move["accepted"] += 1
                state.current = g_reduced
                state.log_density -= lr

    state.step_index += 1
    return state


def run_detailed(spec: ChainSpec) -> tuple[list[TwoComponentConfiguration], ChainState]:
    """Run a full chain; returns the thinned samples and the final state."""
    state = init(spec)
    samples: list[TwoComponentConfiguration] = []
    for i in range(1, spec.steps + 1):
        step(state, spec)
        if i > spec.burnin and (i - spec.burnin) % spec.thin == 0:
            samples.append(state.current)
    return samples, state


def run(spec: ChainSpec) -> list[TwoComponentConfiguration]:
    """Thinned post-burnin samples, (steps - burnin) // thin of them."""
    return run_detailed(spec)[0]


def acceptance_rates(state: ChainState) -> dict[str, float]:
    """Accepted fraction per move type; nan where nothing was proposed."""
    out = {}
    for key, c in state.counters.items():
        out[key] = c["accepted"] / c["proposed"] if c["proposed"] else math.nan
    return out
