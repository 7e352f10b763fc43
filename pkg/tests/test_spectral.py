import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from folrho.errors import ValidationError
from folrho.spectral import (
    ArithmeticProgression,
    FinitePerturbation,
    bernoulli,
    dirac_s1_spectrum,
    eta_arith,
    eta_function,
    eta_numeric,
    eta_truncated,
    frac,
    hurwitz_zeta,
    mod1_distance,
    spectrum_from_json,
    xi_of,
)


def test_bernoulli():
    from fractions import Fraction

    assert bernoulli(1) == Fraction(-1, 2)
    assert bernoulli(2) == Fraction(1, 6)
    assert bernoulli(12) == Fraction(-691, 2730)


@pytest.mark.parametrize("s", [-1.5, -0.5, 0.0, 0.5, 2.0, 3.0, 7.5])
@pytest.mark.parametrize("a", [0.05, 0.3, 0.5, 0.99, 1.0])
def test_hurwitz_against_mpmath(s, a):
    ours = hurwitz_zeta(s, a)
    ref = float(mpmath.zeta(s, a))
    assert abs(ours - ref) < 1e-11 * max(1.0, abs(ref))


@pytest.mark.parametrize("a", np.linspace(0.05, 0.95, 7))
def test_hurwitz_at_zero(a):
    assert hurwitz_zeta(0.0, a) == pytest.approx(0.5 - a, abs=1e-14)


def test_hurwitz_pole():
    with pytest.raises(ValidationError):
        hurwitz_zeta(1.0, 0.5)


# ---------------------------------------------------------------- eta


@pytest.mark.parametrize(
    "a,eta0,xi",
    [(0.5, 0.0, 0.0), (0.8, -0.6, 0.7), (0.25, 0.5, 0.25), (1.0, 0.0, 0.5)],
)
def test_eta_arith_examples(a, eta0, xi):
    r = eta_arith(a)
    assert r.eta0 == pytest.approx(eta0, abs=1e-15)
    assert mod1_distance(r.xi, xi) < 1e-12


@pytest.mark.parametrize("a", [0.1 * k for k in range(1, 10)])
def test_numeric_matches_closed_form(a):
    num = eta_numeric(ArithmeticProgression(a))
    assert abs(num.eta0 - eta_arith(a).eta0) < 1e-8
    assert num.method == "zeta-numeric"
    assert set(num.samples) == {2.0, 2.5, 3.0}


@pytest.mark.parametrize("sigma", [1.0, 2 * math.pi, 17.0])
def test_scale_invariance(sigma):
    for a in (0.2, 0.7):
        assert eta_numeric(ArithmeticProgression(a, sigma)).eta0 == pytest.approx(eta_arith(a).eta0, abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 0.99))
def test_reflection(a):
    assert mod1_distance(eta_arith(a).xi + eta_arith(1 - a).xi, 0.0) < 1e-12


def test_perturbation_sign_flip():
    base = ArithmeticProgression(0.3, 2.0)
    lam = 2.0 * 1.3
    p = FinitePerturbation(base, ((lam, -lam),))
    assert eta_numeric(p).eta0 == pytest.approx(eta_arith(0.3).eta0 - 2.0, abs=1e-10)


def test_perturbation_to_zero_adds_kernel():
    base = ArithmeticProgression(0.3)
    p = FinitePerturbation(base, ((1.3, 0.0),))
    r = eta_numeric(p)
    assert r.kernel_dim == 1
    assert r.eta0 == pytest.approx(eta_arith(0.3).eta0 - 1.0, abs=1e-10)


def test_empty_perturbation():
    base = ArithmeticProgression(0.3)
    assert eta_numeric(FinitePerturbation(base, ())).eta0 == eta_numeric(base).eta0


def test_perturbation_rejects_foreign_eigenvalue():
    with pytest.raises(ValidationError):
        FinitePerturbation(ArithmeticProgression(0.3), ((0.5, 1.0),))


@pytest.mark.parametrize("a", [0.15, 0.5, 0.85])
def test_truncated_sum_at_s3(a):
    spec = ArithmeticProgression(a, 1.0)
    direct = eta_truncated(spec, 3.0, 1e4)
    assert abs(direct - eta_function(spec, 3.0)[0]) < 1e-6


def test_domain():
    with pytest.raises(ValidationError):
        ArithmeticProgression(0.0)
    with pytest.raises(ValidationError):
        ArithmeticProgression(0.5, -1.0)


# ---------------------------------------------------------------- circle


def test_s1_bounding_r0():
    r = eta_arith(dirac_s1_spectrum(0.0).a)
    assert r.xi == 0.0 and r.kernel_dim == 0


def test_s1_bounding_r03():
    spec = dirac_s1_spectrum(0.3)
    assert spec.sigma == pytest.approx(2 * math.pi)
    assert mod1_distance(eta_arith(spec.a).xi, 0.7) < 1e-12


def test_s1_nonbounding_kernel():
    spec = dirac_s1_spectrum(0.0, bounding=False)
    r = eta_arith(spec.a, spec.sigma)
    assert r.kernel_dim == 1 and r.xi == pytest.approx(0.5)


def test_xi_formula():
    assert xi_of(-0.6, 0) == pytest.approx(0.7)
    assert frac(-1e-15) == 0.0


def test_spectrum_json():
    spec = spectrum_from_json({"a": 0.3, "sigma": 2.0, "perturbations": [{"old": 2.6, "new": -2.6}]})
    assert isinstance(spec, FinitePerturbation)
    assert isinstance(spectrum_from_json({"a": 0.4}), ArithmeticProgression)
