"""Price-model tests: quantile/cdf consistency, truncated moments against
quadrature and elementary integrals, seeded sampling, spec parsing."""

import math

import numpy as np
import pytest

from soc_auction import (E_INV, Exponential, InfiniteMomentError, LogNormal,
                         ModelSpecError, Pareto, SeedSpec, Truncated, Uniform,
                         critical_price, ks_critical_value, ks_statistic,
                         parse_model, poisson_arrival_times, quantile, sample,
                         tail_mean, tail_moment2, tail_moment_quad,
                         uniform_stream)

ALL_MODELS = [
    Exponential(1.0),
    Exponential(0.4),
    LogNormal(0.0, 0.3),
    LogNormal(1.0, 1.0),
    Uniform(0.0, 1.0),
    Uniform(0.5, 4.0),
    Pareto(1.0, 2.5),
    Pareto(2.0, 4.5),
    Truncated(1.0, Exponential(1.0)),
    Truncated(1.0, LogNormal(0.0, 0.3)),
    Truncated(2.0, Truncated(1.0, Exponential(0.7))),
]


def bisect_quantile(model, p, lo=1e-12, hi=1e9, iters=200):
    """Independent quantile oracle: bisection on the cdf."""
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if model.cdf(mid) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# =====================================================================
# quantile / cdf
# =====================================================================

@pytest.mark.parametrize("model", ALL_MODELS, ids=lambda m: m.spec_string())
def test_quantile_cdf_round_trip(model):
    ps = np.linspace(0.0, 0.999, 1000)
    xs = quantile(model, ps)
    back = np.asarray(model.cdf(xs))
    assert np.max(np.abs(back - ps)) <= 1e-12


def test_quantile_domain_errors():
    m = Uniform(0, 1)
    for bad in (-0.1, 1.0, 1.5):
        with pytest.raises(ValueError):
            quantile(m, bad)
    with pytest.raises(ValueError):
        quantile(m, np.array([0.2, 1.0]))


def test_quantile_scalar_and_array():
    m = Exponential(1.0)
    v = quantile(m, 0.5)
    assert isinstance(v, float)
    arr = quantile(m, np.array([0.1, 0.5]))
    assert arr.shape == (2,)


def test_uniform_quantile_is_identity():
    assert quantile(Uniform(0, 1), E_INV) == pytest.approx(E_INV, abs=1e-15)


def test_lognormal_critical_price_reference_value():
    xc = critical_price(LogNormal(0, 0.3), E_INV)
    assert xc == pytest.approx(0.90371, abs=1e-5)


def test_exponential_critical_price_closed_form_and_bisection():
    m = Exponential(1.0)
    xc = critical_price(m, E_INV)
    closed = -math.log(1.0 - E_INV)
    assert xc == pytest.approx(closed, rel=1e-12)
    assert xc == pytest.approx(0.4586751, abs=1e-7)
    assert xc == pytest.approx(bisect_quantile(m, E_INV, hi=50.0), rel=1e-9)


def test_critical_price_domain():
    with pytest.raises(ValueError):
        critical_price(Uniform(0, 1), 0.0)
    with pytest.raises(ValueError):
        critical_price(Uniform(0, 1), 1.0)


def test_truncated_critical_price_at_least_base():
    m = LogNormal(0, 0.3)
    base = 2.0 * critical_price(m, E_INV)
    t = Truncated(base, m)
    assert critical_price(t, E_INV) >= base


# =====================================================================
# truncated moments
# =====================================================================

def test_lognormal_tail_mean_reference_value():
    m = LogNormal(0, 0.3)
    xc = critical_price(m, E_INV)
    assert tail_mean(m, xc) == pytest.approx(0.7720651, abs=1e-5)


def test_exponential_tail_mean_closed_form():
    m = Exponential(1.0)
    xc = -math.log(1.0 - E_INV)
    expected = (xc + 1.0) * math.exp(-xc)
    assert tail_mean(m, xc) == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(0.9220585, abs=1e-6)
    assert tail_mean(m, xc) == pytest.approx(tail_moment_quad(m, xc, 1), rel=1e-9)


def test_uniform_tail_moments_elementary():
    m = Uniform(0, 1)
    c = E_INV
    assert tail_mean(m, c) == pytest.approx((1 - math.exp(-2)) / 2, rel=1e-12)
    assert tail_mean(m, c) == pytest.approx(0.4323324, abs=1e-7)
    assert tail_moment2(m, c) == pytest.approx((1 - math.exp(-3)) / 3, rel=1e-12)
    assert tail_moment2(m, c) == pytest.approx(tail_moment_quad(m, c, 2), rel=1e-9)


@pytest.mark.parametrize("model", ALL_MODELS, ids=lambda m: m.spec_string())
def test_tail_mean_at_zero_is_mean(model):
    assert tail_mean(model, 0.0) == pytest.approx(model.mean(), rel=1e-12)


@pytest.mark.parametrize("model", ALL_MODELS, ids=lambda m: m.spec_string())
def test_tail_mean_non_increasing(model):
    lo, _ = model.support()
    cs = np.linspace(lo, quantile(model, 0.99), 25)
    vals = [tail_mean(model, float(c)) for c in cs]
    assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))


def test_closed_forms_match_quadrature_on_random_parameters():
    rng = np.random.default_rng(101)
    checked = 0
    while checked < 100:
        kind = checked % 5
        if kind == 0:
            m = Exponential(rate=float(rng.uniform(0.2, 3.0)))
        elif kind == 1:
            m = LogNormal(mu=float(rng.uniform(-1, 1)), sigma=float(rng.uniform(0.1, 1.2)))
        elif kind == 2:
            m = Uniform(lo=float(rng.uniform(0, 1)), hi=float(rng.uniform(1.5, 5)))
        elif kind == 3:
            m = Pareto(xmin=float(rng.uniform(0.5, 2)), alpha=float(rng.uniform(3.2, 6)))
        else:
            m = Truncated(float(rng.uniform(0.5, 1.5)), Exponential(float(rng.uniform(0.3, 2))))
        c = float(quantile(m, float(rng.uniform(0.05, 0.9))))
        assert tail_mean(m, c) == pytest.approx(tail_moment_quad(m, c, 1), rel=1e-9)
        assert tail_moment2(m, c) == pytest.approx(tail_moment_quad(m, c, 2), rel=1e-9)
        checked += 1


def test_pareto_infinite_moments():
    with pytest.raises(InfiniteMomentError):
        tail_mean(Pareto(1.0, 1.5), 2.0)
    with pytest.raises(InfiniteMomentError):
        tail_moment2(Pareto(1.0, 2.5), 2.0)
    # a finite-mean heavy tail still integrates
    assert tail_mean(Pareto(1.0, 2.5), 2.0) > 0
    with pytest.raises(InfiniteMomentError):
        tail_mean(Truncated(2.0, Pareto(1.0, 1.5)), 0.0)


def test_pareto_density_exponent_convention():
    # survival decays with exponent alpha-1
    m = Pareto(1.0, 2.5)
    x = 10.0
    assert 1.0 - m.cdf(x) == pytest.approx(x ** -1.5, rel=1e-12)
    assert m.mean() == pytest.approx(1.5 / 0.5, rel=1e-12)


# =====================================================================
# sampling
# =====================================================================

def test_sampling_determinism_bit_identical():
    m = LogNormal(0, 0.3)
    a = sample(m, SeedSpec(42, 3), 5000)
    b = sample(m, SeedSpec(42, 3), 5000)
    assert np.array_equal(a, b)
    c = sample(m, SeedSpec(42, 4), 5000)
    assert not np.array_equal(a, c)


def test_uniform_stream_matches_sample_transform():
    m = Exponential(2.0)
    u = uniform_stream(SeedSpec(5, 1), 1000)
    drawn = sample(m, SeedSpec(5, 1), 1000)
    assert np.allclose(drawn, quantile(m, u), rtol=0, atol=0)


def test_sample_support_and_positivity():
    xs = sample(Uniform(0, 1), SeedSpec(1, 0), 3)
    assert ((xs > 0) & (xs < 1)).all()
    xs = sample(Truncated(1.0, Exponential(1.0)), SeedSpec(1, 0), 10_000)
    assert (xs >= 1.0).all()
    assert len(sample(Uniform(0, 1), SeedSpec(1, 0), 0)) == 0


def test_lognormal_sample_mean_against_closed_form():
    m = LogNormal(0, 0.3)
    n = 1_000_000
    xs = sample(m, SeedSpec(2024, 0), n)
    true_mean = math.exp(0.045)
    true_sd = math.sqrt((math.exp(0.09) - 1) * math.exp(0.09))
    se = true_sd / math.sqrt(n)
    assert abs(xs.mean() - true_mean) < 3 * se


def test_truncated_sampling_ks_below_critical():
    t = Truncated(1.0, Exponential(1.0))
    xs = sample(t, SeedSpec(77, 0), 100_000)
    stat = ks_statistic(xs, t.cdf)
    assert stat < ks_critical_value(len(xs), 0.01)


def test_poisson_arrival_times():
    ts = poisson_arrival_times(50_000, rate=4.0, seed=SeedSpec(9, 0))
    assert len(ts) == 50_000
    assert (np.diff(ts) > 0).all()
    mean_gap = ts[-1] / len(ts)
    se = (1 / 4.0) / math.sqrt(len(ts))
    assert abs(mean_gap - 0.25) < 4 * se
    with pytest.raises(ValueError):
        poisson_arrival_times(10, rate=0.0, seed=SeedSpec(9, 0))


# =====================================================================
# model construction and parsing
# =====================================================================

def test_constructor_validation():
    with pytest.raises(ValueError, match="rate"):
        Exponential(0.0)
    with pytest.raises(ValueError, match="sigma"):
        LogNormal(0, -0.3)
    with pytest.raises(ValueError, match="hi"):
        Uniform(1.0, 1.0)
    with pytest.raises(ValueError, match="lo"):
        Uniform(-1.0, 1.0)
    with pytest.raises(ValueError, match="alpha"):
        Pareto(1.0, 1.0)
    with pytest.raises(ValueError, match="xmin"):
        Pareto(0.0, 2.5)
    with pytest.raises(ValueError, match="base_price"):
        Truncated(0.0, Exponential(1.0))
    with pytest.raises(ValueError, match="mass"):
        Truncated(2.0, Uniform(0.0, 1.0))


def test_parse_model_families():
    assert parse_model("exponential:rate=1.0") == Exponential(1.0)
    assert parse_model("lognormal:mu=0,sigma=0.3") == LogNormal(0.0, 0.3)
    assert parse_model("uniform:lo=0,hi=1") == Uniform(0.0, 1.0)
    assert parse_model("pareto:xmin=1,alpha=2.5") == Pareto(1.0, 2.5)
    t = parse_model("truncated:base=1.0,inner=lognormal:mu=0,sigma=0.3")
    assert t == Truncated(1.0, LogNormal(0.0, 0.3))


def test_parse_model_nested_truncation():
    t = parse_model("truncated:base=2.0,inner=truncated:base=1.0,inner=exponential:rate=0.7")
    assert t == Truncated(2.0, Truncated(1.0, Exponential(0.7)))
    assert parse_model(t.spec_string()) == t


@pytest.mark.parametrize("model", ALL_MODELS, ids=lambda m: m.spec_string())
def test_spec_string_round_trip(model):
    assert parse_model(model.spec_string()) == model


def test_parse_model_errors_name_the_field():
    with pytest.raises(ModelSpecError, match="weibull"):
        parse_model("weibull:k=2")
    with pytest.raises(ModelSpecError, match="sigma"):
        parse_model("lognormal:mu=0")
    with pytest.raises(ModelSpecError, match="sigma"):
        parse_model("lognormal:mu=0,sigma=abc")
    with pytest.raises(ModelSpecError, match="foo"):
        parse_model("uniform:lo=0,hi=1,foo=2")
    with pytest.raises(ModelSpecError, match="rate"):
        parse_model("exponential:rate=1,rate=2")
    with pytest.raises(ModelSpecError, match="inner"):
        parse_model("truncated:base=1.0")
    with pytest.raises(ModelSpecError, match="base"):
        parse_model("truncated:inner=exponential:rate=1")
    with pytest.raises(ModelSpecError, match="rate"):
        parse_model("exponential:rate=-2")
    with pytest.raises(ModelSpecError, match="field=value"):
        parse_model("exponential:rate")


def test_models_are_immutable_and_hashable():
    m = LogNormal(0, 0.3)
    with pytest.raises(Exception):
        m.sigma = 0.5
    assert hash(m) == hash(LogNormal(0, 0.3))
