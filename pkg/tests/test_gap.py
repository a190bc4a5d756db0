import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from condgrad import Problem, frank_wolfe_gap
from condgrad.errors import InfeasibleQueryPoint, NegativeGap
from condgrad.lmo import BoxIndicator, ElasticNet, L1BallIndicator, L2BallIndicator, SimplexIndicator
from condgrad.smooth import PPowerResidual, Quadratic
from condgrad.verify import brute_gap

from helpers import feasible_probe


def test_box_examples(box1d):
    g = frank_wolfe_gap(box1d, np.array([0.5]), 0.0)
    assert g.gap == 0.75 and g.v.tolist() == [-1.0] and g.d.tolist() == [-1.5]
    assert frank_wolfe_gap(box1d, np.array([0.0]), 0.0).gap == 0.0
    g = frank_wolfe_gap(box1d, np.array([1.0]), 0.0)
    assert g.gap == 2.0 and g.d.tolist() == [-2.0] and g.dnorm2 == 4.0


def test_infeasible_query(box1d):
    with pytest.raises(InfeasibleQueryPoint):
        frank_wolfe_gap(box1d, np.array([2.0]), math.inf)


def test_negative_gap_detected():
    class BadBox(BoxIndicator):
        def _lmo(self, c):  # returns the worst vertex
            return np.where(c < 0.0, self.lower, self.upper)

    prob = Problem(Quadratic([[1.0]], [0.0]), BadBox([-1.0], [1.0]))
    with pytest.raises(NegativeGap):
        frank_wolfe_gap(prob, np.array([0.5]), 0.0)


def test_small_negative_clamped():
    class Shifted(BoxIndicator):
        def _value(self, x):
            return 0.0 if np.all(np.abs(x) <= 1 + 1e-9) else math.inf

    # gap = <c, x - v> + gx - gv with gx supplied slightly low
    prob = Problem(Quadratic([[1.0]], [0.0]), Shifted([-1.0], [1.0]))
    assert frank_wolfe_gap(prob, np.array([0.0]), -5e-13).gap == 0.0
    with pytest.raises(NegativeGap):
        frank_wolfe_gap(prob, np.array([0.0]), -1e-11)


def test_gap_zero_at_known_stationary_points():
    # unconstrained minimizer inside each set
    b = np.array([0.2, 0.3])
    f = PPowerResidual(np.eye(2), b, 2.0)
    for g in (SimplexIndicator(2, 0.5), L1BallIndicator(2, 1.0), L2BallIndicator(2, 1.0), BoxIndicator([0, 0], [1, 1])):
        p = Problem(f, g)
        assert frank_wolfe_gap(p, b, g.value(b)).gap == 0.0
    # elastic net: 1-D minimizer of (x-3)^2/2 + |x| + x^2/2 is x = 1
    p = Problem(PPowerResidual(np.eye(1), [3.0], 2.0), ElasticNet(1, 1.0, 1.0))
    assert frank_wolfe_gap(p, np.array([1.0]), 1.5).gap == 0.0
    # simplex vertex where gradient favours it
    p = Problem(Quadratic(np.eye(2), np.array([-5.0, 0.0])), SimplexIndicator(2))
    assert frank_wolfe_gap(p, np.array([1.0, 0.0]), 0.0).gap == 0.0


def test_brute_gap_examples(box1d):
    assert brute_gap(box1d, np.array([0.5])) == pytest.approx(0.75, abs=1e-12)
    simp = Problem(Quadratic(np.eye(2), np.zeros(2)), SimplexIndicator(2))
    assert brute_gap(simp, np.array([1.0, 0.0])) == pytest.approx(1.0, abs=1e-12)
    assert frank_wolfe_gap(simp, np.array([1.0, 0.0]), 0.0).gap == 1.0
    assert brute_gap(box1d, np.array([0.0])) == 0.0


@given(st.integers(0, 10_000), st.integers(1, 3), st.integers(0, 4))
def test_brute_gap_agrees(seed, n, which):
    r = np.random.default_rng(seed)
    A = r.standard_normal((n + 2, n))
    f = PPowerResidual(A, r.standard_normal(n + 2), 1.5)
    lo = -r.uniform(0.5, 2, n)
    terms = [SimplexIndicator(n, 1.3), L1BallIndicator(n, 1.1), L2BallIndicator(n, 0.9),
             BoxIndicator(lo, lo + 2), ElasticNet(n, 0.2, 1.5)]
    g = terms[which]
    prob = Problem(f, g)
    x = feasible_probe(g, r)
    gx = g.value(x)
    exact = frank_wolfe_gap(prob, x, gx).gap
    brute = brute_gap(prob, x)
    assert brute <= exact + 1e-10
    if isinstance(g, (SimplexIndicator, L1BallIndicator, BoxIndicator)):
        assert abs(brute - exact) <= 1e-6
    assert exact >= 0.0


def test_brute_gap_dimension_limit():
    from condgrad.errors import DimensionTooLarge

    prob = Problem(Quadratic(np.eye(4), np.zeros(4)), SimplexIndicator(4))
    with pytest.raises(DimensionTooLarge):
        brute_gap(prob, np.full(4, 0.25))
