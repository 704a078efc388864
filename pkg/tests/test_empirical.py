import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cartanlab.catalog import CAT_MAP, EXAMPLE_A, cat_action
from cartanlab.empirical import (
    CircleMap,
    CocycleSample,
    EntropyReport,
    IdentityMap,
    OrbitSample,
    ShearMeasureSpec,
    ToralMap,
    bernoulli_orbit,
    birkhoff_average,
    brin_katok_entropy,
    digits_to_points,
    entropy_inequality_report,
    lebesgue_orbit,
    operator_norms,
    partition_entropy_profile,
    partition_entropy_rate,
    periodic_orbit,
    qr_oseledec,
    rank_one_family,
    shear_probe,
    sqrt_expansion,
    subadditive_sequence,
    subexp_growth_probe,
    top_lyapunov_estimate,
)
from cartanlab.toral import TorusPoint

CAT = ToralMap(CAT_MAP)
CAT_H = math.log((3 + math.sqrt(5)) / 2)
A_LOGS = tuple(math.log(r) for r in (5.048917339522305, 0.6431041321077906, 0.30797852836990414))


def binary_entropy(p):
    return -p * math.log(p) - (1 - p) * math.log(1 - p)


def rotations(n, rng, d=3):
    qs = []
    for _ in range(n):
        q, r = np.linalg.qr(rng.normal(size=(d, d)))
        qs.append(q * np.sign(np.diag(r)))
    return CocycleSample(np.array(qs))


@pytest.fixture(scope="module")
def cat_orbit():
    return lebesgue_orbit(CAT, 100_000, seed=0)


# ---------------------------------------------------------------------------
# samples


def test_lebesgue_orbit_relation(cat_orbit):
    assert cat_orbit.relation_defect(CAT) < 1e-10
    assert np.all((cat_orbit.points >= 0) & (cat_orbit.points < 1))


def test_circle_orbits_relation():
    for a in (2, 3, 5):
        o = lebesgue_orbit(CircleMap(a), 5000, seed=a)
        assert o.relation_defect(CircleMap(a)) < 1e-10
    o = bernoulli_orbit(2, 0.9, 5000, seed=1)
    assert o.relation_defect(CircleMap(2)) < 1e-10


def test_orbits_are_seeded():
    a = lebesgue_orbit(CAT, 100, seed=4).points
    assert np.array_equal(a, lebesgue_orbit(CAT, 100, seed=4).points)
    assert not np.array_equal(a, lebesgue_orbit(CAT, 100, seed=5).points)


def test_orbit_sample_needs_two_points():
    with pytest.raises(ValueError):
        OrbitSample(np.zeros((1, 2)), {})


def test_digit_expansion_of_sqrt2():
    e = sqrt_expansion(2, 2, 200)
    assert abs(e.points(1)[0] - (math.sqrt(2) - 1)) < 1e-15
    e3 = sqrt_expansion(2, 3, 200)
    assert abs(e3.points(1)[0] - (math.sqrt(2) - 1)) < 1e-15
    pts = digits_to_points(np.array([1, 0] * 60), 2, 2)
    assert pts[0] == pytest.approx(2 / 3) and pts[1] == pytest.approx(1 / 3)


def test_periodic_orbit_repeats():
    o = periodic_orbit(CAT, TorusPoint((Fraction(1, 7), Fraction(3, 7))), 30)
    assert np.array_equal(o.points[:8], o.points[8:16])
    assert o.relation_defect(CAT) < 1e-10


# ---------------------------------------------------------------------------
# Birkhoff averages


def test_birkhoff_doubling_equidistributes():
    x0 = sqrt_expansion(2, 2, 10**6 + 60)
    assert abs(birkhoff_average(CircleMap(2), lambda x: x, x0, 10**6) - 0.5) < 0.01


def test_birkhoff_constant_and_fixed_point():
    assert birkhoff_average(CircleMap(2), lambda x: np.full_like(x, 3.25), 0.123, 50) == 3.25
    assert birkhoff_average(CircleMap(2), lambda x: np.cos(x), Fraction(0), 40) == 1.0
    assert birkhoff_average(IdentityMap(1), lambda x: x**2, 0.5, 7) == 0.25
    with pytest.raises(ValueError):
        birkhoff_average(CircleMap(2), lambda x: x, 0.1, 0)


def test_birkhoff_exact_rational_cycle():
    # 1/7 -> 2/7 -> 4/7 under doubling: average of x is exactly 1/3
    assert birkhoff_average(CircleMap(2), lambda x: x, Fraction(1, 7), 300) == pytest.approx(1 / 3, abs=1e-12)


def test_birkhoff_on_torus_sample(cat_orbit):
    assert abs(birkhoff_average(CAT, lambda p: np.cos(2 * np.pi * p[:, 0]), cat_orbit, 100_000)) < 0.02


# ---------------------------------------------------------------------------
# Lyapunov exponents


def test_top_exponent_constant():
    assert abs(top_lyapunov_estimate(CocycleSample.constant(EXAMPLE_A, 10_000)) - 1.6193) < 1e-3
    assert abs(top_lyapunov_estimate(CocycleSample.constant(EXAMPLE_A, 10_000)) - A_LOGS[0]) < 1e-3
    assert top_lyapunov_estimate(CocycleSample.constant(np.eye(3), 100)) == 0.0
    with pytest.raises(ValueError):
        top_lyapunov_estimate(CocycleSample.constant(np.eye(2), 1))


def test_top_exponent_rotations():
    assert abs(top_lyapunov_estimate(rotations(2000, np.random.default_rng(0)))) < 1e-3


def test_subadditive_sequence_decreases_to_limit():
    seq = subadditive_sequence(CocycleSample.constant(EXAMPLE_A, 2000))
    assert np.all(np.diff(seq) <= 1e-12)
    assert seq[-1] >= A_LOGS[0] - 1e-12


def test_singular_product_is_an_error():
    with pytest.raises(ValueError, match="singular"):
        top_lyapunov_estimate(CocycleSample.constant(np.zeros((2, 2)), 5))
    with pytest.raises(ValueError, match="breakdown"):
        qr_oseledec(CocycleSample.constant(np.diag([1.0, 0.0]), 5))


def test_qr_oseledec_constant():
    ex = qr_oseledec(CocycleSample.constant(EXAMPLE_A, 10_000))
    assert np.allclose(ex, (1.6193, -0.4418, -1.1777), atol=1e-3)
    assert np.allclose(ex, A_LOGS, atol=1e-3)
    assert abs(ex.sum()) < 1e-6
    d = qr_oseledec(CocycleSample.constant(np.diag([2.0, 0.5]), 50))
    assert np.allclose(d, (math.log(2), -math.log(2)), atol=1e-12, rtol=0)


def test_qr_oseledec_orthogonal():
    assert np.all(np.abs(qr_oseledec(rotations(500, np.random.default_rng(1)))) < 1e-3)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_qr_sum_equals_mean_log_det(seed):
    rng = np.random.default_rng(seed)
    coc = CocycleSample(rng.normal(size=(200, 3, 3)) + 2 * np.eye(3))
    assert abs(qr_oseledec(coc).sum() - coc.mean_log_det()) < 1e-6


def test_inverse_cocycle_negates_exponents():
    coc = CocycleSample.constant(EXAMPLE_A, 3000)
    fwd, back = qr_oseledec(coc), qr_oseledec(coc.inverse())
    assert np.allclose(back, -fwd[::-1], atol=2e-3)


# ---------------------------------------------------------------------------
# entropy


def test_brin_katok_cat(cat_orbit):
    rep = brin_katok_entropy(CAT, cat_orbit)
    assert abs(rep.estimate - CAT_H) / CAT_H < 0.10
    assert rep.method == "brin-katok"
    assert set(rep.details["radii"]) == {"0.01", "0.02", "0.05", "0.1"}


def test_brin_katok_stationary_under_restarts(cat_orbit):
    ests = [brin_katok_entropy(CAT, cat_orbit.shifted(k * 997)).estimate for k in range(5)]
    assert max(ests) - min(ests) < 0.05
    assert all(abs(e - CAT_H) / CAT_H < 0.10 for e in ests)


def test_brin_katok_doubling():
    rep = brin_katok_entropy(CircleMap(2), lebesgue_orbit(CircleMap(2), 100_000, seed=2))
    assert abs(rep.estimate - math.log(2)) / math.log(2) < 0.05


def test_brin_katok_periodic_is_zero():
    o = periodic_orbit(CAT, TorusPoint((Fraction(1, 7), Fraction(3, 7))), 20_000)
    assert brin_katok_entropy(CAT, o).estimate < 1e-3


def test_brin_katok_widening_warning(cat_orbit):
    rep = brin_katok_entropy(CAT, cat_orbit.shifted(80_000))
    assert rep.warnings and "widened" in rep.warnings[0]


def test_brin_katok_needs_samples():
    with pytest.raises(ValueError):
        brin_katok_entropy(CAT, lebesgue_orbit(CAT, 5000))


def test_brin_katok_threads_match(cat_orbit, monkeypatch):
    base = brin_katok_entropy(CAT, cat_orbit.shifted(50_000)).estimate
    monkeypatch.setenv("CARTANLAB_THREADS", "3")
    assert brin_katok_entropy(CAT, cat_orbit.shifted(50_000)).estimate == base


@pytest.mark.parametrize("a", [2, 3])
def test_partition_rate(a):
    rate = partition_entropy_rate(CircleMap(a), [a], 20)
    assert abs(rate - math.log(a)) / math.log(a) < 0.02


def test_partition_rate_identity_and_errors():
    assert partition_entropy_rate(IdentityMap(1), [2], 5, n=10_000) == 0.0
    with pytest.raises(ValueError):
        partition_entropy_rate(CircleMap(2), [2], 1)


def test_partition_differences_nonincreasing():
    prof = partition_entropy_profile(CircleMap(2), [2], 12, sample=bernoulli_orbit(2, 0.7, 1 << 18, seed=3))
    assert np.all(np.diff(prof.differences) <= 1e-2)
    assert abs(prof.rate - binary_entropy(0.7)) < 0.01


def test_bernoulli_strict_inequality():
    sample = bernoulli_orbit(2, 0.9, 1 << 20, seed=0)
    rate = partition_entropy_rate(CircleMap(2), [2], 20, sample=sample)
    assert abs(rate - binary_entropy(0.9)) < 0.02
    rep = entropy_inequality_report(EntropyReport(rate, "partition-rate"), rank_one_family(math.log(2)), (1,))
    assert rep.margulis_ruelle_ok and not rep.pesin_equality and rep.strict_inequality


def test_inequality_report_cases(cat_orbit):
    fam = cat_action().family
    bk = brin_katok_entropy(CAT, cat_orbit)
    rep = entropy_inequality_report(bk, fam, (1,))
    assert rep.pesin_equality and rep.margulis_ruelle_ok
    assert rep.sum_positive_exponents == pytest.approx(CAT_H)
    atomic = entropy_inequality_report(0.0, fam, (1,))
    assert atomic.margulis_ruelle_ok and not atomic.pesin_equality and atomic.strict_inequality


@settings(max_examples=80, deadline=None)
@given(st.floats(0, 5))
def test_pesin_implies_margulis_ruelle(est):
    rep = entropy_inequality_report(est, cat_action().family, (1,))
    assert (not rep.pesin_equality) or rep.margulis_ruelle_ok
    assert rep.slack == max(0.05 * CAT_H, 0.02)


# ---------------------------------------------------------------------------
# shear probes


NU = ShearMeasureSpec.exponential_lattice()


def test_shear_integer_translation():
    res = shear_probe(NU, 1.0, (-5, 5))
    assert res.proportional and abs(res.constant - math.exp(-1)) < 1e-12
    res = shear_probe(NU, -2.0, (-5, 5))
    assert res.proportional and abs(res.constant - math.exp(2)) < 1e-12


def test_shear_non_integer_is_singular():
    assert not shear_probe(NU, 0.5, (-5, 5)).proportional
    rng = np.random.default_rng(9)
    for t in rng.uniform(-4, 4, 20):
        if abs(t - round(t)) > 1e-6:
            assert not shear_probe(NU, float(t), (-5, 5)).proportional


@settings(max_examples=40, deadline=None)
@given(st.floats(-5, 5))
def test_shear_exp_density(t):
    res = shear_probe(ShearMeasureSpec("exp-density", rate=1.0), t, (-5, 5))
    assert res.proportional and abs(res.constant - math.exp(-t)) <= 1e-12 * math.exp(-t)


def test_shear_lebesgue_and_errors():
    assert shear_probe(ShearMeasureSpec("lebesgue"), 0.3).constant == 1.0
    with pytest.raises(ValueError):
        shear_probe(NU, 1.0, (0.1, 0.9))
    with pytest.raises(ValueError):
        shear_probe(NU, 1.0, (1.0, -1.0))
    with pytest.raises(ValueError):
        ShearMeasureSpec("atoms")


def test_shear_explicit_atoms():
    nu = ShearMeasureSpec("atoms", [(k / 2, 3.0) for k in range(-40, 41)])
    assert shear_probe(nu, 0.5, (-5, 5)).constant == 1.0
    assert not shear_probe(nu, 0.25, (-5, 5)).proportional


def test_shear_group_closed_under_addition():
    ts = [t / 4 for t in range(-20, 21)]
    good = {t for t in ts if shear_probe(NU, t, (-5, 5)).proportional}
    assert good == {float(k) for k in range(-5, 6)}
    for s in good:
        for t in good:
            if -5 <= s + t <= 5:
                assert s + t in good


# ---------------------------------------------------------------------------
# growth


def test_growth_probe():
    n = np.arange(1, 101)
    geo = subexp_growth_probe(2.0**n, 0.1)
    assert not geo.subexponential and abs(geo.rate - math.log(2)) < 1e-9
    assert subexp_growth_probe(n.astype(float) ** 2, 0.1).subexponential
    cat = subexp_growth_probe(operator_norms(CAT_MAP, 60), 0.1)
    assert abs(cat.rate - CAT_H) < 1e-3
    with pytest.raises(ValueError):
        subexp_growth_probe([1.0] * 5, 0.1)
    with pytest.raises(ValueError):
        subexp_growth_probe([1.0] * 9 + [0.0], 0.1)
