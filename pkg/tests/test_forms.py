import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from geonum.forms import (QuadraticForm, deform, evaluate, gradient, random_form, random_unimodular,
                          standard_form)


def test_evaluate_examples():
    Q = QuadraticForm(np.diag([1.0, 1.0, -1.0]))
    assert evaluate(Q, [1, 1, 1]) == 1
    assert evaluate(Q, [0, 0, 0]) == 0
    assert evaluate(QuadraticForm(np.diag([1.0, 2, -1, -2])), [1, 1, 1, 1]) == 0


def test_evaluate_vectorized_and_dim_mismatch():
    Q = standard_form(2, 1)
    X = np.array([[1, 0, 0], [1, 1, 1], [0, 0, 2]])
    np.testing.assert_array_equal(evaluate(Q, X), [1, 1, -4])
    with pytest.raises(ValueError):
        evaluate(Q, [1, 2])
    with pytest.raises(ValueError):
        gradient(Q, [1, 2, 3, 4])


def test_gradient_examples():
    Q = standard_form(2, 1)
    np.testing.assert_array_equal(gradient(Q, [1, 0, 0]), [2, 0, 0])
    np.testing.assert_array_equal(gradient(Q, [1, 1, 1]), [2, 2, -2])


@pytest.mark.parametrize("seed", range(5))
def test_gradient_central_difference(seed):
    Q = random_form(2, 2, seed)
    x = np.random.default_rng(seed).standard_normal(4)
    h = 1e-5
    fd = [(evaluate(Q, x + h * e) - evaluate(Q, x - h * e)) / (2 * h) for e in np.eye(4)]
    np.testing.assert_allclose(gradient(Q, x), fd, rtol=1e-6, atol=1e-6)
    # Euler identity for a homogeneous quadratic
    assert np.dot(gradient(Q, x), x) == pytest.approx(2 * evaluate(Q, x))


@pytest.mark.parametrize("p,q,diag", [(2, 1, [1, 1, -1]), (2, 2, [1, 1, -1, -1]), (3, 1, [1, 1, 1, -1])])
def test_standard_form(p, q, diag):
    Q = standard_form(p, q)
    np.testing.assert_array_equal(Q.gram, np.diag(diag))
    assert Q.signature == (p, q)


@pytest.mark.parametrize("p,q", [(3, 0), (0, 3), (1, 1)])
def test_standard_form_rejects(p, q):
    with pytest.raises(ValueError):
        standard_form(p, q)


def test_construction_invariants():
    with pytest.raises(ValueError):
        QuadraticForm([[1, 0.5, 0], [0, 1, 0], [0, 0, -1]])
    with pytest.raises(ValueError):
        QuadraticForm(np.diag([1.0, 0.0, -1.0]))
    with pytest.raises(ValueError):
        QuadraticForm(np.eye(2))
    Q = QuadraticForm(np.diag([3.0, -1, -2, 5]))
    assert Q.signature == (2, 2)
    assert Q.dim == 4


def test_deform_identity_and_non_unimodular():
    Q0 = standard_form(2, 1)
    np.testing.assert_array_equal(deform(Q0, np.eye(3)).gram, Q0.gram)
    with pytest.raises(ValueError):
        deform(Q0, 2 * np.eye(3))


def test_deform_matches_double_evaluation():
    rng = np.random.default_rng(1)
    for _ in range(100):
        Q0 = standard_form(2, 2)
        g = random_unimodular(4, rng)
        x = rng.standard_normal(4)
        Q = deform(Q0, g)
        assert evaluate(Q, x) == pytest.approx(evaluate(Q0, g @ x), rel=1e-10, abs=1e-10)
        assert Q.signature == Q0.signature


def test_deform_composition():
    rng = np.random.default_rng(2)
    Q0 = standard_form(3, 1)
    for _ in range(20):
        g, h = random_unimodular(4, rng), random_unimodular(4, rng)
        a = deform(deform(Q0, g), h).gram
        b = deform(Q0, g @ h).gram
        np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-10 * np.max(np.abs(b)))


def test_random_form_deterministic_and_signature():
    a, b = random_form(2, 1, 99), random_form(2, 1, 99)
    np.testing.assert_array_equal(a.gram, b.gram)
    assert a.signature == (2, 1)
    assert not np.array_equal(a.gram, random_form(2, 1, 100).gram)


@pytest.mark.parametrize("seed", range(20))
def test_random_form_has_no_small_integer_zero(seed):
    Q = random_form(2, 1, seed)
    r = np.arange(-5, 6)
    X = np.stack(np.meshgrid(r, r, r, indexing="ij"), -1).reshape(-1, 3)
    X = X[(np.einsum("ij,ij->i", X, X) <= 25) & np.any(X != 0, axis=1)]
    assert np.all(evaluate(Q, X.astype(float)) != 0.0)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=3), st.integers(0, 2**32))
def test_form_is_even(x, seed):
    Q = random_form(2, 1, seed)
    x = np.array(x)
    assert evaluate(Q, -x) == evaluate(Q, x)


def test_json_roundtrip_and_csv():
    Q = random_form(3, 1, 4)
    d = json.loads(Q.to_json())
    assert d["dim"] == 4 and len(d["gram"]) == 16
    np.testing.assert_array_equal(QuadraticForm.from_json(Q.to_json()).gram, Q.gram)
    rows = Q.to_csv().splitlines()
    assert len(rows) == 4 and all(len(r.split(",")) == 4 for r in rows)
