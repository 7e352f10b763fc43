import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from folrho.connections import (
    CUBIC,
    CodimOneData,
    Connection,
    FramingData,
    HermMetric,
    PartialConnection,
    adjoint,
    bott_connection,
    bott_partial,
    bott_residual,
    extend,
    interpolate,
    is_extension,
    is_unitary,
    unitarize,
)
from folrho.errors import ValidationError, VerificationError
from folrho.forms import Foliation, Form
from folrho.random import random_connection
from folrho.trigcalc import TrigPoly, TrigScalar

TWO_PI = 2 * math.pi


def gv_data(dim=3):
    """kappa = f dz with f = 2 + sin(2 pi x), omega = -(f'/f) dx, N = f^{-1} d_z."""
    f = TrigPoly.constant(dim, 2.0) + TrigPoly.sin(dim, 0)
    fp = TrigPoly.cos(dim, 0, amp=TWO_PI)
    z = dim - 1
    kappa = Form.dx(dim, z, coef=f)
    omega = Form.dx(dim, 0, coef=TrigScalar(-fp, f))
    N = [TrigScalar.zero(dim)] * dim
    N = list(N)
    N[z] = TrigScalar(TrigPoly.one(dim), f)
    return CodimOneData(kappa, omega, N)


# ---------------------------------------------------------------- curvature


def test_curvature_zero():
    assert Connection.trivial(3, 2).curvature().is_exact_zero()


def test_curvature_abelian():
    c = Connection(Form.dx(3, 1, coef=TrigPoly.sin(3, 0)))
    expected = Form.dx(3, 0, 1, coef=TrigPoly.cos(3, 0, amp=TWO_PI))
    assert (c.curvature() - expected).sup() < 1e-12


def test_flat_s1():
    assert Connection.flat_s1(0.3).curvature().is_zero()


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_bianchi(seed):
    c = random_connection(np.random.default_rng(seed), 3, rank=2, nterms=1)
    R, A = c.curvature(), c.A
    assert (R.d() - (R.wedge(A) - A.wedge(R))).sup() < 1e-10


@pytest.mark.parametrize("seed", range(3))
def test_gauge_naturality(seed):
    rng = np.random.default_rng(seed)
    c = random_connection(rng, 3, rank=2, nterms=1)
    g = rng.normal(size=(2, 2)) + 2 * np.eye(2)
    lhs = c.gauge(g).curvature()
    rhs = c.curvature().matmul_const(np.linalg.inv(g), g)
    assert (lhs - rhs).sup() < 1e-10


# ---------------------------------------------------------------- extensions


def test_extension_examples():
    F = Foliation.coordinate(3, [0, 1])
    base = Connection(Form.dx(3, 0, coef=TrigPoly.cos(3, 2)))
    pc = PartialConnection(base, F)
    assert is_extension(base, pc)
    kappa_b = Form.dx(3, 2, coef=TrigPoly.sin(3, 0))
    assert is_extension(extend(pc, kappa_b), pc)
    assert not is_extension(base + Form.dx(3, 0), pc)


def test_partial_flatness_failure():
    F = Foliation.coordinate(3, [0, 1])
    c = Connection(Form.dx(3, 1, coef=TrigPoly.sin(3, 0)))
    with pytest.raises(VerificationError):
        PartialConnection(c, F)


@pytest.mark.parametrize("seed", range(3))
def test_extension_curvature_vanishes_on_f(seed):
    rng = np.random.default_rng(seed)
    F = Foliation.coordinate(3, [0, 1])
    M = rng.normal(size=(2, 2))
    s, c = TrigPoly.sin(3, 2), TrigPoly.cos(3, 2, amp=rng.normal())
    f = TrigPoly.from_entries([[s * M[i, j] for j in range(2)] for i in range(2)])
    g = TrigPoly.from_entries([[c * M[i, j] for j in range(2)] for i in range(2)])
    pc = PartialConnection(Connection(Form(3, 1, 2, {(0,): f, (1,): g})), F)
    h = TrigPoly.from_entries([[TrigPoly.sin(3, j, amp=rng.normal()) for j in range(2)] for _ in range(2)])
    R = extend(pc, Form.dx(3, 2, coef=h, rank=2)).curvature()
    X, Y = F.frame
    assert R.contract(Y).contract(X).is_zero()
    assert not R.is_zero()


# ---------------------------------------------------------------- adjoint / unitarize


def test_adjoint_of_antihermitian_constant():
    M = np.array([[1j, 2.0], [-2.0, 0.5j]])
    c = Connection(Form.dx(2, 0, coef=M, rank=2))
    assert is_unitary(c, HermMetric.identity(2))


def test_adjoint_real_abelian():
    omega = Form.dx(3, 0, coef=TrigPoly.sin(3, 1))
    cs = adjoint(Connection(omega, real=True), HermMetric.identity(1))
    assert (cs.A + omega).is_zero()
    assert unitarize(Connection(omega, real=True), HermMetric.identity(1)).A.is_zero()


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_adjoint_involution_and_unitarize_idempotent(seed):
    rng = np.random.default_rng(seed)
    c = random_connection(rng, 3, rank=2, nterms=1)
    B = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    h = HermMetric(B @ B.conj().T + np.eye(2))
    assert (adjoint(adjoint(c, h), h).A - c.A).sup() < 1e-10
    u = unitarize(c, h)
    assert (unitarize(u, h).A - u.A).sup() < 1e-10
    assert is_unitary(u, h)


def test_adjoint_pairing_identity(rng):
    """d h(phi, psi) = h(nabla phi, psi) + h(phi, nabla* psi) on constant sections."""
    c = random_connection(rng, 2, rank=2, nterms=1)
    h = HermMetric(np.array([[2.0, 0.5j], [-0.5j, 1.0]]))
    cs = adjoint(c, h)
    phi, psi = rng.normal(size=2) + 1j * rng.normal(size=2), rng.normal(size=2) + 1j * rng.normal(size=2)
    x = np.array([0.17, 0.61])
    for j in range(2):
        A = c.A.coef(j).eval(x)
        As = cs.A.coef(j).eval(x)
        # d of a constant pairing is zero
        total = h.inner(A @ phi, psi) + h.inner(phi, As @ psi)
        assert abs(total) < 1e-12


def test_metric_validation():
    with pytest.raises(ValidationError):
        HermMetric(np.array([[1.0, 0.0], [0.0, -1.0]]))


def test_unitarize_preserves_unitary_extension():
    F = Foliation.coordinate(3, [0, 1])
    base = Connection(Form.dx(3, 0, coef=1j * np.ones((1, 1)) * 0.7, rank=1))
    pc = PartialConnection(base, F)
    c = extend(pc, Form.dx(3, 2, coef=TrigPoly.sin(3, 0)))
    u = unitarize(c, HermMetric.identity(1))
    assert is_extension(u, pc)


# ---------------------------------------------------------------- Bott


def test_bott_trivial():
    dim = 3
    N = [TrigScalar.zero(dim), TrigScalar.zero(dim), TrigScalar.constant(dim, 1.0)]
    cd = CodimOneData(Form.dx(dim, 2), Form.zero(dim, 1), N)
    assert bott_connection(cd).A.is_exact_zero()


def test_bott_gv_example():
    cd = gv_data()
    assert bott_residual(cd) < 1e-8
    assert bott_connection(cd).curvature().is_zero()
    bott_partial(cd)


def test_codim1_structure_violation():
    dim = 3
    N = [TrigScalar.zero(dim), TrigScalar.zero(dim), TrigScalar.constant(dim, 1.0)]
    with pytest.raises(ValidationError):
        CodimOneData(Form.dx(dim, 2), Form.dx(dim, 0), N)


def test_codim1_json_roundtrip():
    cd = gv_data()
    back = CodimOneData.from_json(cd.to_json())
    assert (back.omega - cd.omega).sup() < 1e-14


# ---------------------------------------------------------------- interpolation


def test_interpolate_equal_endpoints():
    c = random_connection(np.random.default_rng(2), 3)
    T = interpolate(c, c)
    assert T.curvature().fiber_integrate().is_zero(1e-14)


def test_interpolate_endpoints(rng):
    c0, c1 = random_connection(rng, 3), random_connection(rng, 3)
    for sched in (None, CUBIC):
        T = interpolate(c0, c1, sched)
        assert (T.at(0.0).A - c0.A).sup() < 1e-14
        assert (T.at(1.0).A - c1.A).sup() < 1e-14


def test_interpolate_abelian_dt_part(rng):
    c0, c1 = random_connection(rng, 3), random_connection(rng, 3)
    R = interpolate(c0, c1).curvature()
    assert (R.fiber_integrate() - (c1.A - c0.A)).sup() < 1e-12


def test_framing_flatness():
    FramingData(Form.dx(1, 0, coef=np.array([[0.0, 1.0], [-1.0, 0.0]]), rank=2))
    with pytest.raises(VerificationError):
        FramingData(Form.dx(2, 1, coef=TrigPoly.sin(2, 0)))
