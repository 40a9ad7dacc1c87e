import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from noetherlab import catalog, exprcore
from noetherlab.errors import ConfigurationError, DomainError
from noetherlab.exprcore import eval_jet, evaluate, fd_jet, parse_expression
from noetherlab.geometry import PhasePoint

LEAVES = st.sampled_from(['t', 'q1', 'p1', 'q2', 'p2', '0.5', '2'])
TREES = st.recursive(
    LEAVES,
    lambda children: st.one_of(
        st.tuples(children, st.sampled_from(['+', '-', '*']), children).map(lambda x: f"({x[0]} {x[1]} {x[2]})"),
        st.tuples(st.sampled_from(['sin', 'cos']), children).map(lambda x: f"{x[0]}({x[1]})"),
    ),
    max_leaves=8,
)
POINTS = st.lists(st.floats(-1.0, 1.0), min_size=5, max_size=5).map(np.array)


def test_kepler_hamiltonian_at_the_reference_point(kepler, x_star):
    jet = eval_jet(kepler.hamiltonian, x_star, kepler.params)
    assert jet.value == -0.5
    assert jet.dq[0] == 1.0
    assert jet.dp[1] == 1.0
    assert jet.dt == 0.0


def test_time_is_linear():
    jet = eval_jet(parse_expression("t", 1), [1.5, 2.0, 3.0], order=2)
    assert jet.value == 1.5
    assert jet.gradient.tolist() == [1.0, 0.0, 0.0]
    assert not jet.hessian.any()


def test_bilinear_form():
    jet = eval_jet(parse_expression("q1*p1", 1), PhasePoint(0, (2,), (3,)), order=2)
    assert jet.value == 6.0
    assert jet.dq[0] == 3.0
    assert jet.dp[0] == 2.0
    assert jet.hessian[1, 2] == jet.hessian[2, 1] == 1.0
    assert jet.hessian[1, 1] == jet.hessian[2, 2] == 0.0


def test_absent_orders_are_zero_filled():
    jet = eval_jet(parse_expression("q1*p1", 1), [0, 2, 3], order=0)
    assert jet.order == 0
    assert jet.value == 6.0
    assert jet.gradient.shape == (3,)
    assert jet.hessian.shape == (3, 3)
    assert not jet.gradient.any()
    assert not jet.hessian.any()


def test_variable_exponent():
    jet = eval_jet(parse_expression("q1^p1", 1), [0, 2, 3])
    assert jet.value == pytest.approx(8.0, rel=1e-15)
    assert jet.dq[0] == pytest.approx(12.0, rel=1e-15)
    assert jet.dp[0] == pytest.approx(8.0 * math.log(2.0), rel=1e-15)


def test_parameters_bind_at_evaluation():
    expr = parse_expression("k*q1^2/2", 1, {'k'})
    assert evaluate(expr, [0, 2, 0], {'k': 1.0}) == 2.0
    assert evaluate(expr, [0, 2, 0], {'k': 3.0}) == 6.0


def test_missing_parameters():
    expr = parse_expression("k*q1", 1, {'k'})
    with pytest.raises(ConfigurationError, match=r"Missing parameters: k"):
        evaluate(expr, [0, 1, 0])


def test_mismatching_point():
    with pytest.raises(ConfigurationError):
        evaluate(parse_expression("q1", 1), [0, 1, 0, 0, 1])


def test_invalid_order():
    with pytest.raises(ConfigurationError):
        eval_jet(parse_expression("q1", 1), [0, 1, 0], order=3)


@pytest.mark.parametrize('text, point, subtree', [
    ("log(q1)", [0, 0, 1], "log(q1)"),
    ("log(q1)", [0, -1, 1], "log(q1)"),
    ("sqrt(q1)", [0, -1, 1], "sqrt(q1)"),
    ("1/q1", [0, 0, 1], "(1.0 / q1)"),
    ("q1^-1", [0, 0, 1], "(q1 ^ (-1.0))"),
    ("q1^0.5", [0, -1, 1], "(q1 ^ 0.5)"),
    ("exp(exp(exp(p1)))", [0, 0, 10], "exp(exp(p1))"),
])
def test_domain_errors_report_the_subtree(text, point, subtree):
    with pytest.raises(DomainError) as err:
        eval_jet(parse_expression(text, 1), point)
    assert err.value.subtree == subtree
    assert err.value.index is None
    assert isinstance(err.value, ArithmeticError)


def test_sqrt_at_zero_has_a_value_but_no_derivatives():
    expr = parse_expression("sqrt(q1)", 1)
    assert evaluate(expr, [0, 0, 0]) == 0.0
    with pytest.raises(DomainError):
        eval_jet(expr, [0, 0, 0], order=1)


def test_fd_of_a_quadratic():
    jet = fd_jet(parse_expression("p1^2/2", 1), [0, 0, 3], h=1e-5)
    assert abs(jet.dp[0] - 3.0) <= 1e-9


def test_fd_of_a_sine():
    jet = fd_jet(parse_expression("sin(t)", 1), [0, 0, 0], h=1e-5)
    assert abs(jet.dt - 1.0) <= 1e-10


def test_fd_of_kepler_matches_ad(kepler, x_star):
    ad = eval_jet(kepler.hamiltonian, x_star, kepler.params)
    fd = fd_jet(kepler.hamiltonian, x_star, kepler.params)
    assert np.max(np.abs(ad.gradient - fd.gradient)) <= 1e-8 * (1 + np.max(np.abs(ad.gradient)))


def test_fd_step_must_be_positive():
    with pytest.raises(ConfigurationError):
        fd_jet(parse_expression("q1", 1), [0, 0, 0], h=0)


@pytest.mark.parametrize('name', catalog.names())
def test_ad_matches_fd_on_catalog(name):
    entry = catalog.builtin(name)
    spec = entry.spec
    points = entry.sample(100, seed=1)
    for expr in [spec.hamiltonian, *spec.integrals.values()]:
        for x in points:
            ad = eval_jet(expr, x, spec.params)
            fd = fd_jet(expr, x, spec.params)
            grad_scale = 1 + np.max(np.abs(ad.gradient))
            hess_scale = 1 + np.max(np.abs(ad.hessian))
            assert np.max(np.abs(ad.gradient - fd.gradient)) <= 1e-6 * grad_scale
            assert np.max(np.abs(ad.hessian - fd.hessian)) <= 1e-4 * hess_scale


@settings(derandomize=True, max_examples=60, deadline=None)
@given(a=TREES, b=TREES, x=POINTS)
def test_sums_and_products_obey_linearity_and_leibniz(a, b, x):
    ja = eval_jet(parse_expression(a, 2), x)
    jb = eval_jet(parse_expression(b, 2), x)
    js = eval_jet(parse_expression(f"({a}) + ({b})", 2), x)
    jp = eval_jet(parse_expression(f"({a}) * ({b})", 2), x)
    assert np.array_equal(js.gradient, ja.gradient + jb.gradient)
    assert np.array_equal(js.hessian, ja.hessian + jb.hessian)
    assert np.array_equal(jp.gradient, ja.value * jb.gradient + jb.value * ja.gradient)


@settings(derandomize=True, max_examples=60, deadline=None)
@given(text=TREES, x=POINTS)
def test_hessians_are_exactly_symmetric(text, x):
    jet = eval_jet(parse_expression(text, 2), x)
    assert np.array_equal(jet.hessian, jet.hessian.T)


@settings(derandomize=True, max_examples=60, deadline=None)
@given(text=TREES, x=POINTS)
def test_ad_matches_fd_on_random_trees(text, x):
    expr = parse_expression(text, 2)
    ad = eval_jet(expr, x)
    fd = fd_jet(expr, x)
    scale = 1 + abs(ad.value) + np.max(np.abs(ad.gradient))
    assert np.max(np.abs(ad.gradient - fd.gradient)) <= 1e-6 * scale


def test_constants_module_level():
    assert exprcore.FD_STEP == 1e-5
    assert set(exprcore.FUNCTIONS) == {'sin', 'cos', 'tan', 'exp', 'log', 'sqrt'}
