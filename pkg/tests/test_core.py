import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from condgrad import ConstantP, HarmonicToOne, NmConfig, PfConfig, Problem, as_vector, inner, norm
from condgrad.errors import DimensionMismatch, NonFiniteValue
from condgrad.lmo import BoxIndicator, SimplexIndicator
from condgrad.smooth import Quadratic

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


def vec_pair(n_max=8):
    return st.integers(1, n_max).flatmap(
        lambda n: st.tuples(arrays(np.float64, n, elements=finite), arrays(np.float64, n, elements=finite))
    )


def test_inner_examples():
    assert inner(np.array([1.0, 2.0]), np.array([3.0, 4.0])) == 11.0
    assert inner(np.array([0.0, 0.0]), np.array([5.0, -7.0])) == 0.0
    a, b = np.array([2.0]), np.array([2.0])
    assert inner(a, b) == inner(b, a) == 4.0


def test_inner_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        inner(np.zeros(2), np.zeros(3))


def test_norm_examples():
    assert norm(np.array([3.0, 4.0])) == 5.0
    assert norm(np.zeros(3)) == 0.0
    assert norm(np.array([-3.0, -4.0])) == 5.0


@given(vec_pair())
def test_inner_symmetric(ab):
    a, b = ab
    assert inner(a, b) == inner(b, a)


@given(vec_pair())
def test_triangle_inequality(ab):
    a, b = ab
    lhs, rhs = norm(a + b), norm(a) + norm(b)
    assert lhs <= rhs * (1 + 1e-12) + 1e-300


@given(vec_pair())
def test_norm_zero_iff_zero_vector(ab):
    a, _ = ab
    assert (norm(a) == 0.0) == (not np.any(a))


def test_as_vector_rejects_nonfinite_and_is_readonly():
    with pytest.raises(NonFiniteValue):
        as_vector([1.0, math.nan])
    v = as_vector([1.0, 2.0])
    with pytest.raises(ValueError):
        v[0] = 3.0


def test_problem_dimension_check():
    with pytest.raises(DimensionMismatch):
        Problem(Quadratic(np.eye(2), np.zeros(2)), SimplexIndicator(3))
    p = Problem(Quadratic(np.eye(2), np.zeros(2)), BoxIndicator([-1, -1], [1, 1]))
    assert p.dim == 2
    assert p.split_value(np.array([1.0, 1.0])) == (1.0, 0.0)


@pytest.mark.parametrize(
    "kwargs",
    [dict(beta=0.0), dict(beta=1.0), dict(sigma=0.0), dict(sigma=1.0), dict(p=0.0), dict(p=1.5), dict(gap_tol=-1.0),
     dict(max_iters=-1), dict(max_backtracks=0)],
)
def test_nm_config_rejects(kwargs):
    with pytest.raises(ValueError):
        NmConfig(**kwargs)


def test_nm_config_defaults():
    c = NmConfig()
    assert (c.beta, c.sigma, c.p, c.gap_tol, c.max_iters, c.max_backtracks) == (0.5, 0.1, 0.5, 1e-6, 100_000, 60)
    assert c.next_p(0) == 0.5


def test_pf_config():
    c = PfConfig()
    assert (c.l_init, c.max_backtracks) == (1.0, 80)
    for bad in (0.0, -1.0, math.inf):
        with pytest.raises(ValueError):
            PfConfig(l_init=bad)


@given(st.floats(0.01, 1.0), st.integers(0, 10**6))
def test_schedules_stay_in_range(p, k):
    assert p <= HarmonicToOne()(k, p) <= 1.0
    assert NmConfig(p=p, pk_schedule=HarmonicToOne()).next_p(k) >= p
    assert NmConfig(p=p, pk_schedule=ConstantP(1.0)).next_p(k) == 1.0


def test_harmonic_values():
    h = HarmonicToOne()
    assert h(0, 0.1) == 0.5
    assert h(1, 0.1) == pytest.approx(1 / 3)
    assert h(100, 0.1) == 0.1


def test_constant_below_p_rejected():
    with pytest.raises(ValueError):
        NmConfig(p=0.5, pk_schedule=ConstantP(0.3)).next_p(0)
