"""Exit criteria, one test per criterion, each at its fixed tolerance."""

import math
import time

import mpmath
import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from geonum.cli import main
from geonum.enumeration import Ball, Box, QuadShell, brute_force_points, count_region, points_in_ball
from geonum.experiments import error_term_ensemble, geometric_grid, small_values_ensemble, dilates_experiment
from geonum.forms import standard_form
from geonum.lattice import LatticeSampler, gaussian_unimodular, goldstein_mayer, standard
from geonum.siegel import SampleStats, binomial_stderr, c_n, sample_counts, symmetrization_radius

MASTER = 2024
GM3 = LatticeSampler("gm", 3, 1_000_003)


def report(k, ok, detail):
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {k}: {detail}")
    assert ok, detail


@pytest.fixture(scope="module")
def siegel_ensemble():
    t0 = time.perf_counter()
    _, counts = sample_counts(GM3, Ball(3, symmetrization_radius(20, 3)), 2000, MASTER)
    return SampleStats.from_values(counts), counts, time.perf_counter() - t0


def test_01_siegel_mean(siegel_ensemble):
    st, _, secs = siegel_ensemble
    report(1, abs(st.mean - 20) <= 1.5 and secs < 120,
           f"Siegel mean {st.mean:.3f} in 20 +- 1.5 (2000 gm lattices, {secs:.1f}s < 120s)")


def test_02_rogers_variance(siegel_ensemble):
    st, _, _ = siegel_ensemble
    c3 = c_n(3)
    exact = 8 * mpmath.zeta(2) / mpmath.zeta(3)
    ok = abs(c3 - float(exact)) < 1e-12 and st.variance <= 1.25 * c3 * 20
    report(2, ok, f"variance {st.variance:.2f} <= 1.25*C3*20 = {1.25 * c3 * 20:.2f} (C3 = {c3:.12f})")


def test_03_random_minkowski():
    trials = 1000
    _, counts = sample_counts(GM3, Ball(3, symmetrization_radius(50, 3)), trials, MASTER + 3)
    frac = float(np.mean(counts == 0))
    bound = c_n(3) / 50
    thr = bound + 3 * binomial_stderr(bound, trials)
    report(3, frac <= thr, f"hole fraction {frac:.4f} <= C3/50 + 3 se = {thr:.4f}")


def test_04_chebyshev(siegel_ensemble):
    _, counts, _ = siegel_ensemble
    trials = len(counts)
    tail = float(np.mean(np.abs(counts - 20) > 10 * math.sqrt(20)))
    bound = c_n(3) / 100
    thr = bound + 3 * binomial_stderr(bound, trials)
    report(4, tail <= thr, f"tail fraction {tail:.4f} <= C3/100 + 3 se = {thr:.4f}")


def test_05_height_exponent():
    t0 = time.perf_counter()
    r4 = small_values_ensemble(4, 10, 12, MASTER, T_max=1000)
    r3 = small_values_ensemble(3, 10, 10, MASTER, T_max=4000)
    secs = time.perf_counter() - t0
    m4 = float(np.median([r.fit.slope for r in r4]))
    m3 = float(np.median([r.fit.slope for r in r3]))
    report(5, m4 <= 0.7 and m3 <= 1.2 and secs < 600,
           f"median height slope n=4 {m4:.3f} <= 0.7, n=3 {m3:.3f} <= 1.2 ({secs:.0f}s < 600s)")


@pytest.fixture(scope="module")
def error_runs():
    grid = geometric_grid(10, 80, 7)
    return error_term_ensemble(3, 10, 0.0, 1.0, grid, MASTER, samples=10**6)


def test_06_main_term(error_runs):
    last = error_runs[0].records[-1]
    ratio = last.observed / last.reference
    report(6, 0.8 <= ratio <= 1.2,
           f"N/(c_Q T) at T=80 = {ratio:.3f} in [0.8, 1.2] (c_Q = {error_runs[0].c_q:.4f}, N = {last.observed:.0f})")


def test_07_error_exponent(error_runs):
    slopes = [r.fit.slope for r in error_runs if r.fit is not None]
    med = float(np.median(slopes))
    report(7, len(slopes) == 10 and med <= 1.5, f"median |residual| growth exponent {med:.3f} <= 1.5")


def test_08_dilates():
    t0 = time.perf_counter()
    res = dilates_experiment(LatticeSampler("gm", 4), Box([1.0] * 4), list(range(5, 26, 2)), 0.5, 100, MASTER)
    report(8, res.pass_fraction >= 0.9,
           f"dilates pass fraction {res.pass_fraction:.2f} >= 0.90 ({time.perf_counter() - t0:.0f}s)")


def test_09_oracle_equivalence():
    key = lambda P: set(map(tuple, np.round(P, 9) + 0.0))
    mismatches = 0
    for i in range(50):
        n = 3 + i % 3
        L = goldstein_mayer(n, 1009, MASTER + i) if i % 2 else gaussian_unimodular(n, MASTER + i)
        T = 2.0 + 2.0 * (i % 5) / 4
        if key(points_in_ball(L, T)) != key(brute_force_points(L.reduced_basis, T)):
            mismatches += 1
    cone = count_region(standard(3), QuadShell(standard_form(2, 1), -0.5, 0.5, 2.5))
    report(9, mismatches == 0 and cone == 8,
           f"enumeration = box scan on 50 lattices ({mismatches} mismatches); Z^3 cone shell count {cone} == 8")


EXPERIMENTS = [
    ["small-values-exp", "--n", "3", "--forms", "3", "--jmax", "7", "--seed", "5"],
    ["error-term-exp", "--n", "3", "--forms", "3", "--tgrid", "5,7,10,14,20,28", "--samples", "50000", "--seed", "5"],
    ["dilates-exp", "--n", "4", "--trials", "4", "--tgrid", "3,5,7,9", "--seed", "5"],
    ["sequences-exp", "--n", "3", "--trials", "6", "--kmax", "12", "--seed", "5"],
]


def test_10_determinism(tmp_path):
    same = []
    for argv in EXPERIMENTS:
        outs = []
        for k, threads in enumerate(("1", "3", "1")):
            d = tmp_path / f"{argv[0]}-{k}"
            assert main(argv + ["--threads", threads, "--output", str(d)]) == 0
            outs.append((d / "records.csv").read_bytes())
        same.append(outs[0] == outs[1] == outs[2])
    report(10, all(same), f"records.csv byte-identical across reruns and --threads for {len(same)} experiments")
