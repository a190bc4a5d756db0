import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from condgrad.errors import DimensionMismatch, NonFiniteValue
from condgrad.smooth import Logistic, NonHolderWell, PPowerResidual, Quadratic
from condgrad.verify import grad_check

E2 = math.exp(-2.0)


def test_value_examples():
    assert Quadratic(np.eye(2), np.zeros(2)).value(np.array([1.0, 1.0])) == 1.0
    assert PPowerResidual(np.eye(1), [0.0], 1.5).value(np.array([0.0])) == 0.0
    assert NonHolderWell(1, a=E2, m=1.0).value(np.array([0.0])) == 0.0


def test_grad_examples():
    assert Quadratic(np.eye(2), np.zeros(2)).grad(np.array([3.0, -2.0])).tolist() == [3.0, -2.0]
    assert PPowerResidual(np.eye(1), [1.0], 1.5).grad(np.array([0.0])).tolist() == [-1.0]
    assert NonHolderWell(4).grad(np.zeros(4)).tolist() == [0.0] * 4


def test_variant_formulas_against_direct_sums():
    r = np.random.default_rng(1)
    A = r.standard_normal((6, 3))
    b = r.standard_normal(6)
    x = r.standard_normal(3)
    res = A @ x - b
    assert PPowerResidual(A, b, 1.5).value(x) == pytest.approx(np.sum(np.abs(res) ** 1.5) / 1.5, rel=1e-14)
    y = np.array([1, -1, 1, 1, -1, -1.0])
    assert Logistic(A, y).value(x) == pytest.approx(np.sum(np.log1p(np.exp(-y * (A @ x)))), rel=1e-13)
    Q = A.T @ A
    q = r.standard_normal(3)
    assert Quadratic(Q, q).value(x) == pytest.approx(0.5 * x @ Q @ x + q @ x, rel=1e-13)


def test_ppower_two_matches_quadratic():
    r = np.random.default_rng(2)
    A = r.standard_normal((5, 4))
    b = r.standard_normal(5)
    pp = PPowerResidual(A, b, 2.0)
    qd = Quadratic(A.T @ A, -A.T @ b)
    const = 0.5 * b @ b
    for _ in range(20):
        x = r.standard_normal(4)
        assert pp.value(x) == pytest.approx(qd.value(x) + const, rel=1e-12, abs=1e-12)
        np.testing.assert_allclose(pp.grad(x), qd.grad(x), rtol=1e-12, atol=1e-12)


def test_nonholder_profile():
    w = NonHolderWell(1, a=E2, m=1.0)
    t = 1e-3
    assert w.phi(t) == pytest.approx(t / math.log(1 / t), rel=1e-15)
    assert w.dphi(t) == pytest.approx(1 / math.log(1 / t) + 1 / math.log(1 / t) ** 2, rel=1e-15)
    # even, continuous at the knot, quadratic extension beyond
    assert w.phi(-0.3) == w.phi(0.3)
    assert w.dphi(-0.3) == -w.dphi(0.3)
    a = E2
    assert w.phi(a + 1e-12) == pytest.approx(w.phi(a), abs=1e-11)
    assert w.dphi(a + 1e-12) == pytest.approx(w.dphi(a), abs=1e-11)
    phi_a, dphi_a = a / 2.0, 0.5 + 0.25
    assert w.phi(1.0) == pytest.approx(phi_a + dphi_a * (1 - a) + 0.5 * (1 - a) ** 2, rel=1e-14)
    assert w.dphi(1.0) == pytest.approx(dphi_a + (1 - a), rel=1e-14)


def test_nonholder_tiny_arguments_finite():
    w = NonHolderWell(2)
    g = w.grad(np.array([5e-324, -1e-300]))
    assert np.all(np.isfinite(g)) and g[0] > 0 > g[1]


@pytest.mark.parametrize("kwargs", [dict(a=0.0), dict(a=0.2), dict(m=0.0)])
def test_nonholder_rejects(kwargs):
    with pytest.raises(ValueError):
        NonHolderWell(2, **kwargs)


def test_constructor_checks():
    with pytest.raises(ValueError):
        Quadratic([[1.0, 1.0], [0.0, 1.0]], [0.0, 0.0])
    for p in (1.0, 2.5):
        with pytest.raises(ValueError):
            PPowerResidual(np.eye(2), np.zeros(2), p)
    with pytest.raises(ValueError):
        Logistic(np.eye(2), [1.0, 0.0])


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        Quadratic(np.eye(2), np.zeros(2)).value(np.zeros(3))
    with pytest.raises(DimensionMismatch):
        NonHolderWell(2).grad(np.zeros(1))


def test_nonfinite_value_raises():
    f = Quadratic([[1e300]], [0.0])
    with pytest.raises(NonFiniteValue):
        f.value(np.array([1e300]))


def test_logistic_extreme_margins_stay_finite():
    f = Logistic(np.array([[1.0], [1.0]]), [1.0, -1.0])
    for x in (-1e6, 1e6):
        assert math.isfinite(f.value(np.array([x])))
        assert np.all(np.isfinite(f.grad(np.array([x]))))


def _random_oracles(r):
    A = r.standard_normal((8, 4))
    return [
        Quadratic(A.T @ A - 2 * np.eye(4), r.standard_normal(4)),
        PPowerResidual(A, r.standard_normal(8), 1.5),
        Logistic(A, np.where(r.random(8) < 0.5, -1.0, 1.0)),
        NonHolderWell(4),
    ]


def _points_away_from_kinks(oracle, r, n=100):
    pts = []
    while len(pts) < n:
        x = r.uniform(-1.5, 1.5, oracle.dim)
        if isinstance(oracle, NonHolderWell):
            s = np.abs(x)
            if np.any(s < 1e-3) or np.any(np.abs(s - oracle.a) < 1e-3):
                continue
        if isinstance(oracle, PPowerResidual) and np.min(np.abs(oracle.residual(x))) < 1e-2:
            continue
        pts.append(x)
    return pts


def test_grad_check_all_variants():
    r = np.random.default_rng(3)
    for o in _random_oracles(r):
        rep = grad_check(o, _points_away_from_kinks(o, r), h=1e-6)
        assert rep.passed, (type(o).__name__, rep.failures()[:3])
        assert rep.n_passed == 100


def test_grad_check_catches_wrong_gradient():
    class Broken(Quadratic):
        def _grad(self, x):
            return 1.01 * super()._grad(x)

    rep = grad_check(Broken(np.eye(2), np.zeros(2)), [np.array([1.0, 2.0])])
    assert not rep.passed and rep.failures()[0].location == 0


def test_ppower_gradient_holder_sanity():
    r = np.random.default_rng(4)
    A = r.standard_normal((6, 3))
    for pexp in (1.2, 1.5, 2.0):
        f = PPowerResidual(A, r.standard_normal(6), pexp)
        nu = pexp - 1
        ratios = []
        for _ in range(500):
            x, y = (v / max(1.0, np.linalg.norm(v)) for v in r.standard_normal((2, 3)))
            num = np.linalg.norm(f.grad(x) - f.grad(y))
            den = np.linalg.norm(x - y) ** nu
            ratios.append(num / den)
        C = max(ratios)
        # ‖A‖^(1+nu) * rows^(...) bounds the constant; only finiteness and a loose cap matter here
        assert math.isfinite(C) and C < 1e3


NON_HOLDER_TS = (1e-3, 1e-6, 1e-9)


@pytest.mark.parametrize(
    "nu",
    [
        pytest.param(
            0.1,
            marks=pytest.mark.xfail(
                strict=True,
                reason="for nu=0.1 the ratio dips between t=1e-3 and 1e-6 (0.331 -> 0.309) before growing",
            ),
        ),
        0.5,
        1.0,
    ],
)
def test_nonholder_ratio_increases(nu):
    f = NonHolderWell(3)
    ratios = []
    for t in NON_HOLDER_TS:
        x = np.zeros(3)
        x[0] = t
        ratios.append(np.linalg.norm(f.grad(x)) / t**nu)
    assert ratios[0] < ratios[1] < ratios[2], ratios


def test_nonholder_ratio_unbounded_for_small_nu():
    f = NonHolderWell(1)
    nu = 0.1
    r = [float(f.dphi(10.0**-e)) / 10.0 ** (-e * nu) for e in (6, 9, 30, 100, 300)]
    assert all(a < b for a, b in zip(r, r[1:]))


finite_x = arrays(np.float64, 4, elements=st.floats(-3, 3, allow_nan=False))


@given(finite_x)
def test_values_deterministic(x):
    r = np.random.default_rng(5)
    for o in _random_oracles(r):
        assert o.value(x) == o.value(x)
        assert np.array_equal(o.grad(x), o.grad(x))
