import numpy as np
import pytest
from scipy import stats

from bigibbs.geometry import Window
from bigibbs.randomness import POISSON_INVERSION_CUTOFF, RngState


def test_same_seed_same_stream_reproduces():
    a = RngState(123, 4)
    b = RngState(123, 4)
    assert np.array_equal(a.random(100), b.random(100))
    assert [a.poisson(3.0) for _ in range(50)] == [b.poisson(3.0) for _ in range(50)]


def test_streams_differ():
    a = RngState(123, 0)
    b = RngState(123, 1)
    assert not np.array_equal(a.random(100), b.random(100))


def test_fork_is_deterministic_and_distinct():
    base = RngState(9, 2)
    f1 = base.fork(0)
    f2 = base.fork(1)
    again = RngState(9, 2).fork(0)
    assert np.array_equal(f1.random(10), again.random(10))
    assert f1.stream != f2.stream != base.stream


def test_uniform_in_window_bounds():
    w = Window((1.0, -2.0), (2.0, 3.0))
    pts = RngState(0).uniform_in(w, 1000)
    assert pts.shape == (1000, 2)
    assert pts[:, 0].min() >= 1.0 and pts[:, 0].max() <= 2.0
    assert pts[:, 1].min() >= -2.0 and pts[:, 1].max() <= 3.0


@pytest.mark.parametrize("lam", [0.3, 3.0, 12.0, 29.5, 45.0, 120.0])
def test_poisson_mean_and_variance(lam):
    rng = RngState(77)
    n = 40_000
    draws = np.array([rng.poisson(lam) for _ in range(n)])
    se_mean = np.sqrt(lam / n)
    assert abs(draws.mean() - lam) < 4 * se_mean
    assert 0.9 < draws.var(ddof=1) / lam < 1.1


def test_poisson_zero_mean():
    rng = RngState(1)
    assert rng.poisson(0.0) == 0


def test_poisson_gof_small_mean():
    # inversion branch, full distribution check against the exact pmf
    lam = 4.0
    assert lam < POISSON_INVERSION_CUTOFF
    rng = RngState(555)
    n = 100_000
    draws = np.array([rng.poisson(lam) for _ in range(n)])
    kmax = 13
    observed = np.bincount(np.minimum(draws, kmax), minlength=kmax + 1)
    probs = stats.poisson.pmf(np.arange(kmax), lam)
    probs = np.append(probs, 1.0 - probs.sum())
    _, p = stats.chisquare(observed, probs * n)
    assert p > 0.001


def test_poisson_gof_large_mean():
    # transformed-rejection branch
    lam = 60.0
    rng = RngState(556)
    n = 50_000
    draws = np.array([rng.poisson(lam) for _ in range(n)])
    edges = stats.poisson.ppf(np.linspace(0.02, 0.98, 25), lam)
    edges = np.unique(edges)
    observed, _ = np.histogram(draws, bins=np.concatenate([[-0.5], edges + 0.5, [np.inf]]))
    cdf = stats.poisson.cdf(np.concatenate([edges, [np.inf]]), lam)
    expected = np.diff(np.concatenate([[0.0], cdf])) * n
    keep = expected > 5
    _, p = stats.chisquare(observed[keep], expected[keep] * observed[keep].sum() / expected[keep].sum())
    assert p > 0.001
