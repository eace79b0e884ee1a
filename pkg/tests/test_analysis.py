import math

import numpy as np
import pytest

from bigibbs.analysis import (
    EstimateWithError,
    check_ruelle_bound,
    cross_pair_count,
    estimate_correlation,
    estimate_marginal_correlation,
    pooled_z_score,
    verify_cm_full,
    verify_cm_minus,
    verify_cm_plus,
    verify_ruelle,
)
from bigibbs.catalog import (
    build_model,
    build_test_function,
    central_subwindow,
    eta_catalogue,
)
from bigibbs.energy import PotentialModel, no_interaction, step_potential
from bigibbs.errors import (
    CoincidentPoint,
    NotNonnegativeModel,
    SubwindowNotContained,
    WrongArity,
)
from bigibbs.geometry import Configuration, Window, empty_two_component
from bigibbs.intensity import IntensityMeasure
from bigibbs.oracle import SeriesTruncation, exact_correlation
from bigibbs.randomness import RngState
from bigibbs.sampler import ChainSpec, run

from conftest import conf, two

UNIT = Window((0.0, 0.0), (1.0, 1.0))


@pytest.fixture(scope="module")
def free_samples():
    return run(ChainSpec(model=build_model("free"), window=UNIT, steps=80_000, burnin=1000, thin=10, seed=81))


@pytest.fixture(scope="module")
def cross_step_samples():
    return run(
        ChainSpec(model=build_model("cross-step"), window=UNIT, steps=80_000, burnin=1000, thin=10, seed=82)
    )


def test_estimate_with_error_basics():
    e = EstimateWithError.from_values([1.0, 2.0, 3.0])
    assert e.estimate == 2.0 and e.n_samples == 3
    assert e.std_err == pytest.approx(1.0 / math.sqrt(3))
    single = EstimateWithError.from_values([5.0])
    assert single.std_err == 0.0
    with pytest.raises(ValueError):
        EstimateWithError.from_values([])


def test_pooled_z_conventions():
    zero = EstimateWithError(0.0, 0.0, 10)
    assert pooled_z_score(zero, zero) == 0.0
    other = EstimateWithError(1.0, 0.0, 10)
    assert pooled_z_score(other, zero) == math.inf


def test_wrong_arity_raises(free_samples):
    h_pair = build_test_function("q-one", UNIT)
    with pytest.raises(WrongArity):
        verify_cm_plus(free_samples[:10], build_model("free"), UNIT, h_pair, 2, RngState(0))
    h_point = build_test_function("p-one", UNIT)
    with pytest.raises(WrongArity):
        verify_cm_full(free_samples[:10], build_model("free"), UNIT, h_point, 2, RngState(0))
    with pytest.raises(WrongArity):
        verify_ruelle(
            free_samples[:10], build_model("free"), UNIT,
            central_subwindow(UNIT), central_subwindow(UNIT), h_point, RngState(0),
        )


def test_cm_plus_free_model(free_samples):
    # unit intensity: both sides estimate the expected point count, one
    h = build_test_function("p-one", UNIT)
    rep = verify_cm_plus(free_samples, build_model("free"), UNIT, h, 4, RngState(1, 1))
    assert rep.rhs.estimate == pytest.approx(1.0)  # constant integrand
    assert rep.passed and abs(rep.z_score) < 3


def test_cm_minus_free_model(free_samples):
    h = build_test_function("p-left-half", UNIT)
    rep = verify_cm_minus(free_samples, build_model("free"), UNIT, h, 4, RngState(1, 2))
    assert rep.passed
    assert rep.lhs.estimate == pytest.approx(0.5, abs=0.05)


def test_cm_plus_single_sample_flagged():
    h = build_test_function("p-one", UNIT)
    rep = verify_cm_plus([empty_two_component()], build_model("free"), UNIT, h, 4, RngState(2))
    assert "n-samples-too-small" in rep.flags
    assert rep.lhs.estimate == 0.0
    assert rep.rhs.estimate >= 0.0


def test_cm_plus_hard_core_annihilates_both_sides():
    model = build_model("cross-hardcore")
    # h only sees forbidden cross pairs, which never occur in samples and
    # are never accepted by the insertion weight
    def forbidden(g, x):
        return float(any(math.dist(x.coords, y.coords) <= 0.2 for y in g.minus))

    from bigibbs.analysis import TestFunction

    h = TestFunction("forbidden-pair", "point", forbidden)
    samples = run(ChainSpec(model=model, window=UNIT, steps=20_000, burnin=500, thin=10, seed=83))
    rep = verify_cm_plus(samples, model, UNIT, h, 4, RngState(3))
    assert rep.lhs.estimate == 0.0 and rep.rhs.estimate == 0.0
    assert rep.z_score == 0.0 and rep.passed


def test_cm_full_free_model(free_samples):
    h = build_test_function("q-one", UNIT)
    rep = verify_cm_full(free_samples, build_model("free"), UNIT, h, 4, RngState(1, 3))
    assert rep.rhs.estimate == pytest.approx(1.0)  # sigma mass squared
    assert rep.passed


def test_cm_full_interacting_model(cross_step_samples):
    h = build_test_function("q-exp-dist", UNIT)
    rep = verify_cm_full(cross_step_samples, build_model("cross-step"), UNIT, h, 6, RngState(1, 4))
    assert rep.passed, rep.to_dict()


def test_cm_plus_detects_wrong_model(free_samples):
    # claiming triple the true intensity must blow the balance apart
    wrong = PotentialModel(
        no_interaction(), no_interaction(), no_interaction(), IntensityMeasure(z=3.0)
    )
    h = build_test_function("p-one", UNIT)
    rep = verify_cm_plus(free_samples, wrong, UNIT, h, 4, RngState(4))
    assert not rep.passed and abs(rep.z_score) > 10


def test_ruelle_identity_free_and_interacting(free_samples, cross_step_samples):
    F1 = build_test_function("f-one", UNIT)
    Fc = build_test_function("f-count-sub", UNIT)
    sub = central_subwindow(UNIT, 0.5)
    cases = [
        (free_samples, build_model("free"), 5),
        (cross_step_samples, build_model("cross-step"), 6),
    ]
    for samples, model, stream in cases:
        rep1 = verify_ruelle(samples, model, UNIT, sub, sub, F1, RngState(5, stream))
        assert rep1.lhs.estimate == 1.0 and rep1.lhs.std_err == 0.0
        assert rep1.passed, rep1.to_dict()
        rep2 = verify_ruelle(samples, model, UNIT, sub, sub, Fc, RngState(6, stream))
        assert rep2.passed, rep2.to_dict()


def test_ruelle_subwindow_equals_window_boundary_case(cross_step_samples):
    # filling the whole window reduces the right side to the expansion form
    F1 = build_test_function("f-one", UNIT)
    model = build_model("cross-step")
    rep = verify_ruelle(cross_step_samples, model, UNIT, UNIT, UNIT, F1, RngState(7, 1), n_eta_draws=8)
    assert rep.passed, rep.to_dict()


def test_ruelle_rejects_outside_subwindow(free_samples):
    F1 = build_test_function("f-one", UNIT)
    bad = Window((0.5, 0.5), (1.5, 1.5))
    with pytest.raises(SubwindowNotContained):
        verify_ruelle(free_samples[:10], build_model("free"), UNIT, bad, bad, F1, RngState(8))


def test_correlation_empty_is_exactly_one(cross_step_samples):
    est = estimate_correlation(cross_step_samples, build_model("cross-step"), Configuration(), Configuration())
    assert est.estimate == 1.0 and est.std_err == 0.0


def test_correlation_free_model_is_one(free_samples):
    est = estimate_correlation(free_samples, build_model("free"), conf((0.3, 0.3)), conf((0.6, 0.6)))
    assert est.estimate == pytest.approx(1.0)
    assert est.std_err == 0.0  # free insertion cost is identically one


def test_marginal_equals_two_species_with_empty_minus(cross_step_samples):
    model = build_model("cross-step")
    for eta_p in (conf((0.4, 0.4)), conf((0.2, 0.8), (0.7, 0.3))):
        a = estimate_marginal_correlation(cross_step_samples, model, eta_p)
        b = estimate_correlation(cross_step_samples, model, eta_p, Configuration())
        assert a == b  # identical summands, bit for bit


def test_marginal_empty_is_one(cross_step_samples):
    est = estimate_marginal_correlation(cross_step_samples, build_model("cross-step"), Configuration())
    assert est.estimate == 1.0 and est.std_err == 0.0


def test_correlation_rejects_coincident_eta(cross_step_samples):
    with pytest.raises(CoincidentPoint):
        estimate_correlation(
            cross_step_samples, build_model("cross-step"), conf((0.5, 0.5)), conf((0.5, 0.5))
        )


def test_correlation_matches_series_oracle(cross_step_samples):
    model = build_model("cross-step")
    eta_p, eta_m = conf((0.5, 0.5)), conf((0.6, 0.5))
    mc = estimate_correlation(cross_step_samples, model, eta_p, eta_m)
    reference = exact_correlation(model, UNIT, eta_p, eta_m, SeriesTruncation(6, 20_000), RngState(9))
    gap = abs(mc.estimate - reference.value)
    # inflate the chain stderr for residual autocorrelation
    tol = 3 * math.hypot(2.0 * mc.std_err, reference.mc_stderr) + reference.truncation_bound
    assert gap <= tol, (mc.estimate, reference.value, tol)


def test_ruelle_bound_free_and_repulsive(free_samples, cross_step_samples):
    etas = eta_catalogue(UNIT, 10)
    rep = check_ruelle_bound(free_samples, build_model("free"), UNIT, etas)
    assert rep.passed and len(rep.entries) == 10
    rep2 = check_ruelle_bound(cross_step_samples, build_model("cross-step"), UNIT, etas)
    assert rep2.passed


def test_ruelle_bound_requires_nonnegative(free_samples):
    attractive = PotentialModel(
        step_potential(-1.0, 0.2), no_interaction(), no_interaction(), IntensityMeasure(z=1.0)
    )
    with pytest.raises(NotNonnegativeModel):
        check_ruelle_bound(free_samples, attractive, UNIT, eta_catalogue(UNIT, 3))


def test_estimators_seed_deterministic(free_samples):
    h = build_test_function("p-one", UNIT)
    model = build_model("free")
    a = verify_cm_plus(free_samples, model, UNIT, h, 4, RngState(10, 3))
    b = verify_cm_plus(free_samples, model, UNIT, h, 4, RngState(10, 3))
    assert a == b and a.to_dict() == b.to_dict()


def test_cross_pair_count():
    g = two([(0.1, 0.1), (0.9, 0.9)], [(0.15, 0.1), (0.5, 0.5)])
    assert cross_pair_count(g, 0.1) == 1
    assert cross_pair_count(g, 1.0) == 3
    assert cross_pair_count(two([], [(0.1, 0.1)]), 0.5) == 0
