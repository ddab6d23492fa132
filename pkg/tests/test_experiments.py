import itertools
import math

import numpy as np
import pytest

from geonum.enumeration import Ball, Box, count_form_values
from geonum.experiments import (ExperimentRecord, dilate_counts, dilates_check, dilates_experiment,
                                error_term_experiment, fit_loglog, form_counts, geometric_grid, looks_summable,
                                min_heights, records_csv, sequence_violations, sequences_experiment,
                                small_values_experiment)
from geonum.forms import random_form, standard_form
from geonum.lattice import LatticeSampler, standard
from geonum.siegel import symmetrization_radius
from geonum.volume import c_q_estimate


def test_fit_loglog_exact_power():
    f = fit_loglog([(x, x**2) for x in (1, 2, 4, 8)])
    assert f.slope == pytest.approx(2) and f.r_squared == pytest.approx(1) and f.points_used == 4


def test_fit_loglog_constant():
    assert fit_loglog([(x, 5.0) for x in (1, 2, 3)]).slope == pytest.approx(0, abs=1e-12)


def test_fit_loglog_noisy():
    rng = np.random.default_rng(0)
    xs = np.geomspace(1, 1000, 20)
    ys = 3 * xs**1.5 * (1 + 0.01 * rng.standard_normal(20))
    assert 1.45 <= fit_loglog(zip(xs, ys)).slope <= 1.55


def test_fit_loglog_errors():
    with pytest.raises(ValueError):
        fit_loglog([(1, 1), (2, 2)])
    with pytest.raises(ValueError):
        fit_loglog([(1, 1), (2, 0), (3, 3)])
    with pytest.raises(ValueError):
        fit_loglog([(2, 1), (2, 2), (2, 3)])


def test_record_residual_exact():
    r = ExperimentRecord(10.0, 33.0, 31.4, 7)
    assert r.residual == 33.0 - 31.4
    assert records_csv([r]) == "parameter,observed,reference,residual,seed\n10,33,31.4," + repr(33.0 - 31.4) + ",7\n"


# --- small values -----------------------------------------------------------


def test_small_values_heights_monotone_and_reference():
    Q = random_form(2, 1, 1)
    res = small_values_experiment(Q, 8, seed=1)
    hs = [r.observed for r in res.records]
    assert all(a <= b for a, b in zip(hs, hs[1:]))
    for j, r in enumerate(res.records, start=1):
        assert r.parameter == 2.0**-j
        assert r.reference == (2.0**-j) ** -1.0  # eps^(-1/(n-2)) with n = 3
    assert res.fit is not None and res.censored == []


def test_small_values_positive_side_dominates():
    Q = random_form(2, 1, 6)
    two = small_values_experiment(Q, 8, "two_sided")
    pos = small_values_experiment(Q, 8, "positive_side")
    for a, b in zip(two.records, pos.records):
        assert b.observed >= a.observed


def test_small_values_censoring():
    Q = random_form(2, 1, 2)
    res = small_values_experiment(Q, 12, T_max=6)
    assert res.censored and all(math.isnan(res.records[j - 1].observed) for j in res.censored)
    assert res.fit is None or res.fit.points_used == 12 - len(res.censored)


def test_min_heights_agree_with_single_searches():
    from geonum.enumeration import min_height_solution
    Q = random_form(3, 1, 3)
    eps = [2.0**-j for j in range(1, 7)]
    found = min_heights(Q, eps)
    for i, e in enumerate(eps):
        assert np.linalg.norm(found[i]) == pytest.approx(min_height_solution(Q, e).height)


def test_small_values_slope_n3_median():
    slopes = [small_values_experiment(random_form(2, 1, s), 10, T_max=4000).fit.slope for s in range(10)]
    assert 0.6 <= float(np.median(slopes)) <= 1.2


def test_small_values_slope_n4_median():
    slopes = [small_values_experiment(random_form(3, 1, s), 12, T_max=1000).fit.slope for s in range(10)]
    assert float(np.median(slopes)) <= 0.7


def test_small_values_precondition():
    with pytest.raises(ValueError):
        small_values_experiment(random_form(2, 1, 0), 5)


# --- error term -------------------------------------------------------------


def test_form_counts_match_direct_counts():
    Q = random_form(2, 1, 3)
    grid = [5.0, 8.0, 12.0]
    assert form_counts(Q, 0, 1, grid) == [count_form_values(Q, 0, 1, T) for T in grid]


def test_error_term_records_and_main_term():
    Q = random_form(2, 1, 0)
    grid = geometric_grid(10, 80, 7)
    c = c_q_estimate(Q, 0, 1, grid, 10**6, 0).c_q
    res = error_term_experiment(Q, 0, 1, grid, c, seed=0)
    for r, T in zip(res.records, grid):
        assert r.reference == c * T
        assert r.residual == r.observed - c * T
        assert r.observed == count_form_values(Q, 0, 1, T)
    last = res.records[-1]
    assert 0.8 <= last.observed / last.reference <= 1.2


def test_error_term_median_exponent():
    grid = geometric_grid(10, 80, 7)
    slopes = []
    for s in range(10):
        Q = random_form(2, 1, 100 + s)
        c = c_q_estimate(Q, 0, 1, grid, 10**6, s).c_q
        res = error_term_experiment(Q, 0, 1, grid, c, s)
        if res.fit is not None:
            slopes.append(res.fit.slope)
    assert float(np.median(slopes)) <= 1.5


def test_error_term_preconditions():
    Q = standard_form(2, 1)
    with pytest.raises(ValueError):
        error_term_experiment(Q, 1, 0, geometric_grid(10, 80, 7), 1.0)
    with pytest.raises(ValueError):
        error_term_experiment(Q, 0, 1, [10, 20, 40], 1.0)


# --- dilates ----------------------------------------------------------------


def test_dilates_integer_lattice_unit_cube():
    ts = [11, 15, 19, 23]
    counts = dilate_counts(standard(4), Box([1.0] * 4), ts)
    # odd t: the cube [-t/2, t/2]^4 contains exactly t^4 integer points, none on the boundary
    assert counts == [t**4 - 1 for t in ts]
    assert all(abs(N - t**4) < t ** (8 / 3 + 0.5) for t, N in zip(ts, counts))
    assert dilates_check(counts, ts, 4, 0.5)


def test_dilate_counts_against_direct_box_scan():
    ts = [2.0, 3.5]
    counts = dilate_counts(standard(4), Box([1.0, 1.0, 1.0, 1.0]), ts)
    for t, N in zip(ts, counts):
        r = int(t // 2)
        pts = [x for x in itertools.product(range(-r, r + 1), repeat=4) if any(x) and max(map(abs, x)) <= t / 2]
        assert N == len(pts)


def test_dilates_sampled_lattices_small():
    res = dilates_experiment(LatticeSampler("gm", 4), Box([1.0] * 4), [5, 9, 13, 17], 0.5, 10, 1)
    assert res.pass_fraction >= 0.9
    assert all(r.reference == r.parameter**4 for r in res.records)
    assert len(res.records) == 40


def test_dilates_preconditions():
    with pytest.raises(ValueError):
        dilates_experiment(LatticeSampler("gm", 3), Box([1.0] * 3), [5, 9], 0.5, 2, 0)
    with pytest.raises(ValueError):
        dilates_experiment(LatticeSampler("gm", 4), Box([2.0] * 4), [5, 9], 0.5, 2, 0)


# --- sequences --------------------------------------------------------------


def ball_k(k, n=3):
    return Ball(n, symmetrization_radius(k, n))


def test_sequences_summability_check():
    assert looks_summable(lambda k: k)
    assert looks_summable(lambda k: math.sqrt(k) * math.log(k))
    assert not looks_summable(lambda k: 5.0)
    assert not looks_summable(lambda k: math.sqrt(k))
    with pytest.raises(ValueError):
        sequences_experiment(LatticeSampler("gm", 3), ball_k, lambda k: 3.0, 10, 5)


def test_sequences_integer_lattice_exact():
    kmax = 30
    regions = [ball_k(k) for k in range(1, kmax + 1)]
    recs, last = sequence_violations(standard(3), regions, list(range(1, kmax + 1)), lambda k: k)
    for k, r in enumerate(recs, start=1):
        rad2 = symmetrization_radius(k, 3) ** 2
        m = int(math.isqrt(int(rad2)))
        direct = sum(1 for x in itertools.product(range(-m, m + 1), repeat=3) if any(x) and sum(v * v for v in x) <= rad2)
        assert r.observed == direct
    expected_last = max([k for k, r in enumerate(recs, 1) if abs(r.observed - k) >= math.sqrt(k) * k], default=0)
    assert last == expected_last


def test_sequences_random_lattices():
    res = sequences_experiment(LatticeSampler("gm", 3), ball_k, lambda k: k, 40, 100, 3)
    assert res.fraction_clean_from(10) >= 0.95
    assert len(res.records) == 40 * 100


# --- determinism ------------------------------------------------------------


def test_experiments_independent_of_threads():
    S = LatticeSampler("gm", 4)
    a = dilates_experiment(S, Box([1.0] * 4), [5, 7, 9], 0.5, 6, 9, threads=1)
    b = dilates_experiment(S, Box([1.0] * 4), [5, 7, 9], 0.5, 6, 9, threads=3)
    assert records_csv(a.records) == records_csv(b.records)
    S3 = LatticeSampler("gm", 3)
    a = sequences_experiment(S3, ball_k, lambda k: k, 8, 10, 2, threads=1)
    b = sequences_experiment(S3, ball_k, lambda k: k, 8, 10, 2, threads=4)
    assert records_csv(a.records) == records_csv(b.records)
