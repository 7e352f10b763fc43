import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from folrho.errors import DimensionError, NonvanishingError
from folrho.random import random_trig
from folrho.trigcalc import TPoly, TrigPoly, TrigScalar, certify_lower_bound, integrate_torus

TWO_PI = 2 * math.pi


def f_den(dim=1, axis=0):
    return TrigPoly.constant(dim, 2.0) + TrigPoly.sin(dim, axis)


def close(p, q, tol=1e-12):
    return (p - q).bound() <= tol * max(1.0, p.bound(), q.bound())


# ---------------------------------------------------------------- derivatives


def test_deriv_exponential():
    e = TrigPoly.exp(1, [1])
    assert close(e.deriv(0), e * (2j * math.pi))


def test_deriv_constant():
    assert TrigPoly.constant(3, 5.0).deriv(2).is_zero()


def test_deriv_quotient_rule():
    f = f_den()
    q = TrigScalar(TrigPoly.one(1), f)
    dq = q.deriv(0)
    expected = TrigScalar(TrigPoly.cos(1, 0, amp=-TWO_PI), f * f)
    xs = np.linspace(0, 1, 37)[:, None]
    assert np.max(np.abs(dq.eval(xs) - expected.eval(xs))) < 1e-12


@pytest.mark.parametrize("i,j", [(0, 1), (1, 2), (0, 2)])
def test_mixed_partials_commute(rng, i, j):
    p = random_trig(rng, 3, nterms=6)
    assert p.deriv(i).deriv(j).equals(p.deriv(j).deriv(i))


@pytest.mark.parametrize("seed", range(5))
def test_integral_of_derivative_vanishes(seed):
    p = random_trig(np.random.default_rng(seed), 3, nterms=5)
    for j in range(3):
        assert abs(integrate_torus(p.deriv(j))) < 1e-14


# ---------------------------------------------------------------- integration


def test_integrate_constant():
    assert integrate_torus(TrigPoly.constant(2, 5.0)) == pytest.approx(5.0)


def test_integrate_orthogonality():
    assert integrate_torus(TrigPoly.exp(1, [1])) == 0


def test_integrate_quotient_against_residue_oracle():
    q = TrigScalar(TrigPoly.one(1), f_den())
    value, err = q.integrate(return_error=True)
    assert abs(value - 1 / math.sqrt(3)) < 1e-12
    assert err < 1e-10


def test_quadrature_matches_exact_on_polynomials(rng):
    p = random_trig(rng, 2, nterms=5)
    den = TrigPoly.constant(2, 3.0) + TrigPoly.cos(2, 1)
    q = TrigScalar(p * den, den)
    assert abs(q.integrate() - p.integrate()) < 1e-12


# ---------------------------------------------------------------- ring laws


def test_frequency_cancellation():
    assert (TrigPoly.exp(1, [1]) * TrigPoly.exp(1, [-1])).equals(TrigPoly.one(1))


def test_conj_exponential():
    assert TrigPoly.exp(1, [1]).conj().equals(TrigPoly.exp(1, [-1]))


def test_eval_sin():
    assert TrigPoly.sin(1, 0).eval([0.25]) == pytest.approx(1.0)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_ring_laws(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (random_trig(rng, 2, nterms=4) for _ in range(3))
    assert close((a * b) * c, a * (b * c))
    assert close(a * (b + c), a * b + a * c)
    assert close(a * b, b * a)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_matrix_conj_antihomomorphism(seed):
    rng = np.random.default_rng(seed)
    A = TrigPoly.from_entries([[random_trig(rng, 2, 2) for _ in range(2)] for _ in range(2)])
    B = TrigPoly.from_entries([[random_trig(rng, 2, 2) for _ in range(2)] for _ in range(2)])
    assert A.H().H().equals(A)
    assert close(A.mul(B).H(), B.H().mul(A.H()))
    Sa, Sb = TrigScalar(A, f_den(2)), TrigScalar(B)
    lhs, rhs = Sa.mul(Sb).H(), Sb.H().mul(Sa.H())
    x = np.array([0.3, 0.7])
    assert np.allclose(lhs.eval(x), rhs.eval(x), atol=1e-12)


def test_drop_tolerance():
    p = TrigPoly(1, [[1], [2]], [1.0, 1e-16])
    assert p.nterms == 1


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        TrigPoly.one(1) + TrigPoly.one(2)


# ---------------------------------------------------------------- denominators


def test_certified_lower_bound():
    lb = certify_lower_bound(f_den())
    # a valid lower bound of min|2 + sin| = 1, with a Lipschitz slack
    assert 0.5 < lb <= 1.0


def test_vanishing_denominator_rejected():
    with pytest.raises(NonvanishingError):
        TrigScalar(TrigPoly.one(1), TrigPoly.sin(1, 0))


def test_inverse_roundtrip():
    q = TrigScalar(f_den())
    prod = q.mul(q.inverse())
    xs = np.linspace(0, 1, 11)[:, None]
    assert np.allclose(prod.eval(xs), 1.0, atol=1e-13)


# ---------------------------------------------------------------- json


@pytest.mark.parametrize("seed", range(3))
def test_json_roundtrip(seed):
    p = random_trig(np.random.default_rng(seed), 3)
    assert TrigPoly.from_json(p.to_json(), 3).equals(p)
    q = TrigScalar(p, f_den(3, 1))
    back = TrigScalar.from_json(q.to_json(), 3)
    assert back.num.equals(q.num) and back.den.equals(q.den)


# ---------------------------------------------------------------- TPoly


def test_tpoly_trims_and_integrates():
    p = TPoly([1.0, 0.0, 0.0])
    assert p.degree == 0
    sq = TPoly([-1.0, 2.0]).mul(TPoly([-1.0, 2.0]))
    assert sq.integrate01() == pytest.approx(1 / 3)


def test_tpoly_at_endpoints():
    p = TPoly([1.0, 2.0, 3.0])
    assert p.at(0) == 1.0 and p.at(1) == 6.0
    assert p.deriv().at(1) == pytest.approx(8.0)


@pytest.mark.parametrize("shape", [(), (2, 2)])
def test_grid_values_match_direct_evaluation(shape):
    from folrho.trigcalc import _grid_points, grid_values

    rng = np.random.default_rng(3)
    if shape:
        p = TrigPoly.from_entries([[random_trig(rng, 4, nterms=5, band=7) for _ in range(2)] for _ in range(2)])
    else:
        p = random_trig(rng, 4, nterms=5, band=7)
    axes, counts = [0, 1, 3], [5, 6, 4]
    pts = _grid_points(4, axes, counts, 0.3)
    assert np.abs(grid_values(p, axes, counts, 0.3) - p.eval(pts)).max() < 1e-12
