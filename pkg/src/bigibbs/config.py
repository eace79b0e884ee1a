"""Experiment configuration: parsing, validation, and lossless echo.

Two input syntaxes are accepted: an INI-style text with sections and
key=value lines (the human-editable default) and a JSON object with the
same structure. Validation collects every problem before failing, and the
echoed form makes all defaults explicit so that re-parsing the echo
reproduces the configuration exactly.
"""

from __future__ import annotations

import configparser
import json
import math
from dataclasses import dataclass, field

from .energy import PairPotential, PotentialModel
from .errors import ParseError, ValidationError
from .geometry import Window
from .intensity import DENSITY_PRESETS, IntensityMeasure
from .oracle import SeriesTruncation

_POTENTIAL_SLOTS = ("cross", "self_plus", "self_minus")
_VALID_KINDS = ("none", "step", "hardcore", "soft-core-power")


@dataclass(frozen=True)
class PotentialSpec:
    kind: str = "none"
    amplitude: float = 0.0
    range: float = 1.0
    exponent: float = 1.0

    def build(self) -> PairPotential:
        if self.kind == "hardcore":
            return PairPotential("hardcore", amplitude=math.inf, radius=self.range)
        return PairPotential(
            self.kind, amplitude=self.amplitude, radius=self.range, exponent=self.exponent
        )

    def echo(self) -> dict:
        amp = "inf" if math.isinf(self.amplitude) else self.amplitude
        return {
            "kind": self.kind,
            "amplitude": amp,
            "range": self.range,
            "exponent": self.exponent,
        }


@dataclass(frozen=True)
class ExperimentConfig:
    dimension: int = 2
    seed: int = 0
    window_lower: tuple[float, ...] = (0.0, 0.0)
    window_upper: tuple[float, ...] = (1.0, 1.0)
    z: float = 1.0
    density: str = "constant"
    cross: PotentialSpec = field(default_factory=PotentialSpec)
    self_plus: PotentialSpec = field(default_factory=PotentialSpec)
    self_minus: PotentialSpec = field(default_factory=PotentialSpec)
    steps: int = 100_000
    burnin: int | None = None
    thin: int = 50
    chains: int = 1
    nmax: int = 6
    mc_per_term: int = 20_000
    n_sigma_points: int = 8
    n_eta_draws: int = 4
    h: str | None = None
    sub_lower: tuple[float, ...] | None = None
    sub_upper: tuple[float, ...] | None = None

    # -- derived objects -----------------------------------------------------

    def window(self) -> Window:
        return Window(self.window_lower, self.window_upper)

    def intensity_measure(self) -> IntensityMeasure:
        return IntensityMeasure(z=self.z, density=DENSITY_PRESETS[self.density])

    def model(self) -> PotentialModel:
        return PotentialModel(
            cross=self.cross.build(),
            self_plus=self.self_plus.build(),
            self_minus=self.self_minus.build(),
            intensity=self.intensity_measure(),
        )

    def truncation(self) -> SeriesTruncation:
        return SeriesTruncation(self.nmax, self.mc_per_term)

    def resolved_burnin(self) -> int:
        """Explicit burnin, or the heuristic 1000 * expected points, capped."""
        if self.burnin is not None:
            return self.burnin
        expected = self.z * self.window().volume
        return min(int(round(1000.0 * expected)), self.steps // 2)

    def subwindow(self) -> Window | None:
        if self.sub_lower is None or self.sub_upper is None:
            return None
        return Window(self.sub_lower, self.sub_upper)

    def echo(self) -> dict:
        """All settings, defaults made explicit; re-parsing reproduces them."""
        return {
            "dimension": self.dimension,
            "seed": self.seed,
            "window": {"lower": list(self.window_lower), "upper": list(self.window_upper)},
            "intensity": {"z": self.z, "density": self.density},
            "potential": {
                "cross": self.cross.echo(),
                "self_plus": self.self_plus.echo(),
                "self_minus": self.self_minus.echo(),
            },
            "sampler": {
                "steps": self.steps,
                "burnin": self.resolved_burnin(),
                "thin": self.thin,
                "chains": self.chains,
            },
            "oracle": {"nmax": self.nmax, "mc_per_term": self.mc_per_term},
            "verify": {
                "n_sigma_points": self.n_sigma_points,
                "n_eta_draws": self.n_eta_draws,
                "h": self.h,
                "sub_lower": list(self.sub_lower) if self.sub_lower else None,
                "sub_upper": list(self.sub_upper) if self.sub_upper else None,
            },
        }


# -- parsing -------------------------------------------------------------------


def parse_config(text: str) -> ExperimentConfig:
    """Parse INI or JSON configuration text; validation reports all errors."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        tree = _parse_json(text)
    else:
        tree = _parse_ini(text)
    return _build(tree)


def load_config(path: str) -> ExperimentConfig:
    with open(path) as fh:
        return parse_config(fh.read())


def _parse_json(text: str) -> dict:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"line {e.lineno}: {e.msg}") from e
    if not isinstance(obj, dict):
        raise ParseError("top-level JSON value must be an object")
    return obj


def _parse_ini(text: str) -> dict:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as e:
        raise ParseError(str(e)) from e
    tree: dict = {}
    for section in parser.sections():
        body = dict(parser[section])
        if section == "space":
            tree.update(body)
        elif section.startswith("potential."):
            tree.setdefault("potential", {})[section.split(".", 1)[1]] = body
        else:
            tree[section] = body
    return tree


class _Collector:
    """Typed field extraction that accumulates problems instead of raising."""

    def __init__(self):
        self.problems: list[str] = []

    def fail(self, msg: str) -> None:
        self.problems.append(msg)

    def take(self, mapping: dict, key: str, where: str, convert, default):
        if key not in mapping:
            return default
        raw = mapping.pop(key)
        if raw is None:
            return default
        try:
            return convert(raw)
        except (TypeError, ValueError) as e:
            self.fail(f"{where}.{key}: {e}")
            return default

    def leftovers(self, mapping: dict, where: str) -> None:
        for key in mapping:
            self.fail(f"{where}.{key}: unknown key")


def _to_int(raw) -> int:
    if isinstance(raw, bool):
        raise ValueError("expected an integer")
    if isinstance(raw, int):
        return raw
    return int(str(raw).strip())


def _to_float(raw) -> float:
    v = float(str(raw).strip()) if not isinstance(raw, (int, float)) else float(raw)
    if math.isnan(v):
        raise ValueError("nan is not allowed")
    return v


def _to_amplitude(raw) -> float:
    if isinstance(raw, str) and raw.strip().lower() in ("inf", "+inf", "infinity"):
        return math.inf
    return _to_float(raw)


def _to_vector(raw) -> tuple[float, ...]:
    if isinstance(raw, (list, tuple)):
        return tuple(float(v) for v in raw)
    parts = [p for p in str(raw).replace(";", ",").split(",") if p.strip()]
    if not parts:
        raise ValueError("empty vector")
    return tuple(float(p) for p in parts)


def _to_str(raw) -> str:
    return str(raw).strip()


def _build(tree: dict) -> ExperimentConfig:
    c = _Collector()
    tree = dict(tree)

    dimension = c.take(tree, "dimension", "space", _to_int, 2)
    seed = c.take(tree, "seed", "space", _to_int, 0)

    window = dict(tree.pop("window", {}) or {})
    lower = c.take(window, "lower", "window", _to_vector, tuple(0.0 for _ in range(dimension)))
    upper = c.take(window, "upper", "window", _to_vector, tuple(1.0 for _ in range(dimension)))
    c.leftovers(window, "window")

    intensity = dict(tree.pop("intensity", {}) or {})
    z = c.take(intensity, "z", "intensity", _to_float, 1.0)
    density = c.take(intensity, "density", "intensity", _to_str, "constant")
    c.leftovers(intensity, "intensity")

    potential = dict(tree.pop("potential", {}) or {})
    specs = {}
    for slot in _POTENTIAL_SLOTS:
        body = dict(potential.pop(slot, {}) or {})
        where = f"potential.{slot}"
        kind = c.take(body, "kind", where, _to_str, "none")
        amplitude = c.take(body, "amplitude", where, _to_amplitude, 0.0)
        rng_ = c.take(body, "range", where, _to_float, 1.0)
        exponent = c.take(body, "exponent", where, _to_float, 1.0)
        c.leftovers(body, where)
        if kind not in _VALID_KINDS:
            c.fail(f"{where}.kind: unknown kind {kind!r}")
            kind = "none"
        if kind in ("step", "soft-core-power") and math.isinf(amplitude):
            c.fail(f"{where}.amplitude: 'inf' is only valid for kind hardcore")
            amplitude = 0.0
        if kind != "none" and not rng_ > 0:
            c.fail(f"{where}.range: must be > 0, got {rng_}")
            rng_ = 1.0
        if kind == "soft-core-power" and not exponent > 0:
            c.fail(f"{where}.exponent: must be > 0, got {exponent}")
            exponent = 1.0
        if kind == "hardcore":
            amplitude = math.inf
        specs[slot] = PotentialSpec(kind, amplitude, rng_, exponent)
    c.leftovers(potential, "potential")

    samp = dict(tree.pop("sampler", {}) or {})
    steps = c.take(samp, "steps", "sampler", _to_int, 100_000)
    burnin = c.take(samp, "burnin", "sampler", _to_int, None)
    thin = c.take(samp, "thin", "sampler", _to_int, 50)
    chains = c.take(samp, "chains", "sampler", _to_int, 1)
    c.leftovers(samp, "sampler")

    orc = dict(tree.pop("oracle", {}) or {})
    nmax = c.take(orc, "nmax", "oracle", _to_int, 6)
    mc_per_term = c.take(orc, "mc_per_term", "oracle", _to_int, 20_000)
    c.leftovers(orc, "oracle")

    ver = dict(tree.pop("verify", {}) or {})
    n_sigma_points = c.take(ver, "n_sigma_points", "verify", _to_int, 8)
    n_eta_draws = c.take(ver, "n_eta_draws", "verify", _to_int, 4)
    h = c.take(ver, "h", "verify", _to_str, None)
    sub_lower = c.take(ver, "sub_lower", "verify", _to_vector, None)
    sub_upper = c.take(ver, "sub_upper", "verify", _to_vector, None)
    c.leftovers(ver, "verify")

    c.leftovers(tree, "config")

    # -- semantic validation, all problems reported together ----------------

    if dimension < 1:
        c.fail(f"space.dimension: must be >= 1, got {dimension}")
    if len(lower) != dimension:
        c.fail(f"window.lower: expected {dimension} coordinates, got {len(lower)}")
    if len(upper) != dimension:
        c.fail(f"window.upper: expected {dimension} coordinates, got {len(upper)}")
    if len(lower) == len(upper):
        for i, (lo, hi) in enumerate(zip(lower, upper)):
            if not lo < hi:
                c.fail(f"window: lower[{i}]={lo} must be < upper[{i}]={hi}")
    if not z > 0:
        c.fail(f"intensity.z: must be > 0, got {z}")
    if density not in DENSITY_PRESETS:
        c.fail(
            f"intensity.density: unknown preset {density!r}; "
            f"known: {sorted(DENSITY_PRESETS)}"
        )
    if steps < 1:
        c.fail(f"sampler.steps: must be >= 1, got {steps}")
    if burnin is not None and burnin < 0:
        c.fail(f"sampler.burnin: must be >= 0, got {burnin}")
    if burnin is not None and steps <= burnin:
        c.fail(f"sampler.steps ({steps}) must exceed burnin ({burnin})")
    if thin < 1:
        c.fail(f"sampler.thin: must be >= 1, got {thin}")
    if chains < 1:
        c.fail(f"sampler.chains: must be >= 1, got {chains}")
    if nmax < 0:
        c.fail(f"oracle.nmax: must be >= 0, got {nmax}")
    if mc_per_term < 2:
        c.fail(f"oracle.mc_per_term: must be >= 2, got {mc_per_term}")
    if n_sigma_points < 1:
        c.fail(f"verify.n_sigma_points: must be >= 1, got {n_sigma_points}")
    if n_eta_draws < 1:
        c.fail(f"verify.n_eta_draws: must be >= 1, got {n_eta_draws}")
    if (sub_lower is None) != (sub_upper is None):
        c.fail("verify: sub_lower and sub_upper must be given together")
    if sub_lower is not None and sub_upper is not None:
        if len(sub_lower) != dimension or len(sub_upper) != dimension:
            c.fail(f"verify: subwindow corners must have {dimension} coordinates")
        elif not all(lo < hi for lo, hi in zip(sub_lower, sub_upper)):
            c.fail("verify: sub_lower must be strictly below sub_upper")

    if c.problems:
        raise ValidationError(c.problems)

    return ExperimentConfig(
        dimension=dimension,
        seed=seed,
        window_lower=lower,
        window_upper=upper,
        z=z,
        density=density,
        cross=specs["cross"],
        self_plus=specs["self_plus"],
        self_minus=specs["self_minus"],
        steps=steps,
        burnin=burnin,
        thin=thin,
        chains=chains,
        nmax=nmax,
        mc_per_term=mc_per_term,
        n_sigma_points=n_sigma_points,
        n_eta_draws=n_eta_draws,
        h=h,
        sub_lower=sub_lower,
        sub_upper=sub_upper,
    )
