"""Acceptance suite: one PASS/FAIL line per criterion.

Run under pytest (the lines are collected into the terminal summary) or
directly with ``python3 tests/test_acceptance.py``.
"""

import math
import time
from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest

from folrho.charforms import (
    ahat_coefficients,
    ahat_form,
    ahat_from_ch,
    chern_character,
    mod_exact_residual,
    transgress_ch,
)
from folrho.connections import (
    CodimOneData,
    Connection,
    FramingData,
    HermMetric,
    PartialConnection,
    adjoint,
    bott_connection,
    extension_residual,
    unitarize,
)
from folrho.forms import Foliation, Form, TForm, dd_wedge, filtration_degree
from folrho.random import random_connection, random_form, random_trig
from folrho.rho import (
    e_relative,
    gv_chernweil_identity,
    gv_constant_derived,
    gv_constant_literal,
    gv_form,
    rho_framing_difference,
    rho_imag,
    rho_imag_gv,
    rho_s1,
)
from folrho.spectral import (
    ArithmeticProgression,
    FinitePerturbation,
    eta_arith,
    eta_function,
    eta_numeric,
    eta_truncated,
    mod1_distance,
)
from folrho.trigcalc import TrigPoly, TrigScalar
from folrho.wo import (
    WOElement,
    WOSpace,
    delta_pairing,
    kt_class_relation,
    universal_class,
    wo_cohomology,
    wo_d,
)

TWO_PI = 2 * math.pi
SEED = 20240517

#: lines printed in the terminal summary, in execution order
RESULTS = []


class Outcome:
    """Collects named residuals against thresholds for one criterion."""

    def __init__(self, label, budget=None):
        self.label = label
        self.budget = budget
        self.items = []
        self.start = time.perf_counter()

    def check(self, name, value, limit):
        self.items.append((name, float(value), limit, bool(value < limit)))

    def require(self, name, ok):
        self.items.append((name, 0.0 if ok else 1.0, None, bool(ok)))

    def finish(self):
        elapsed = time.perf_counter() - self.start
        if self.budget is not None:
            self.items.append(("runtime_s", elapsed, self.budget, elapsed < self.budget))
        ok = all(item[3] for item in self.items)
        failed = [n for n, _, _, good in self.items if not good]
        worst = {}
        for name, value, limit, _ in self.items:
            if limit is not None:
                worst[name] = max(worst.get(name, 0.0), value)
        detail = " ".join(f"{k}={v:.2e}" for k, v in worst.items())
        if failed:
            detail += " failed=" + ",".join(sorted(set(failed)))
        line = f"{'PASS' if ok else 'FAIL'} criterion {self.label}: {detail} ({elapsed:.2f}s)"
        RESULTS.append(line)
        print(line)
        return ok


# ---------------------------------------------------------------- helpers


def _rng(offset=0):
    return np.random.default_rng(SEED + offset)


def _filtration_residual(form, F, p):
    """Distance of ``form`` from F^p measured by iterated contractions."""
    if p <= 0 or form.is_exact_zero():
        return 0.0
    if p > min(form.degree, F.codim):
        return form.sup()
    k = form.degree - p + 1
    if k > len(F.frame):
        return 0.0
    worst = 0.0
    for fields in combinations(F.frame, k):
        out = form
        for X in fields:
            out = out.contract(X)
        worst = max(worst, out.sup())
    return worst


def _kappa_foliation(dim):
    f = TrigPoly.constant(dim, 2.0) + TrigPoly.sin(dim, 0)
    return Foliation.from_kappa(Form.dx(dim, dim - 1, coef=f))


def _foliations(dim):
    half = list(range(dim // 2 + 1))
    return [Foliation.coordinate(dim, [0]), Foliation.coordinate(dim, half), _kappa_foliation(dim)]


def _so2(rng, dim):
    omega = random_form(rng, dim, 1, real=True, nterms=2, density=0.8)
    terms = {}
    for idx, f in omega.terms.items():
        f = f.num
        z = TrigPoly.zero(dim)
        terms[idx] = TrigPoly.from_entries([[z, f], [-f, z]])
    return Connection(Form(dim, 1, 2, terms), real=True)


def _connection(rng, dim, rank=2, real=False):
    """Random connection whose Chern character is nonzero in every degree up to dim."""
    while True:
        c = random_connection(rng, dim, rank=rank, nterms=2, density=0.8, real=real)
        # constant part so that transgressions pair nontrivially with closed forms
        consts = rng.normal(size=(dim, rank, rank))
        if not real:
            consts = consts + 1j * rng.normal(size=(dim, rank, rank))
        A = c.A
        for j in range(dim):
            A = A + Form.dx(dim, j, coef=consts[j] if rank > 1 else complex(consts[j, 0, 0]), rank=rank)
        c = Connection(A, real=real)
        ch = chern_character(c)
        if all(ch.component(d).sup() > 1e-3 for d in range(2, dim + 1, 2)):
            return c


def _nonzero_form(rng, dim, degree):
    while True:
        a = random_form(rng, dim, degree, nterms=2, density=0.8)
        if a.sup() > 1e-3:
            return a


def _sup_all(cf):
    return max((f.sup() for f in cf.seq.entries.values()), default=0.0)


_PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]]),
    np.diag([1.0, -1.0]).astype(complex),
)


def _entries(f, M):
    return TrigPoly.from_entries([[f * M[i, j] for j in range(2)] for i in range(2)])


def _pauli():
    one = TrigPoly.one(3)
    f = one + TrigPoly.sin(3, 2, amp=0.5)
    A = Form(3, 1, 2, {(0,): _entries(f, _PAULI[0]), (1,): _entries(one, _PAULI[1]), (2,): _entries(one, _PAULI[2])})
    c = Connection(A)
    return PartialConnection(c, Foliation.coordinate(3, [2])), c, HermMetric.identity(2)


def _codim1_t5(kind):
    dim = 5
    zero = TrigScalar.zero(dim)
    if kind == "flat":
        N = [zero] * 4 + [TrigScalar.constant(dim, 1.0)]
        return CodimOneData(Form.dx(dim, 4), Form.zero(dim, 1), N)
    amp = {"warped": 1.0, "mild": 0.5}[kind]
    f = TrigPoly.constant(dim, 2.0) + TrigPoly.sin(dim, 0, amp=amp)
    fp = TrigPoly.cos(dim, 0, amp=TWO_PI * amp)
    N = [zero] * 4 + [TrigScalar(TrigPoly.one(dim), f)]
    return CodimOneData(Form.dx(dim, 4, coef=f), Form.dx(dim, 0, coef=TrigScalar(-fp, f)), N)


def _random_omega_t5(rng):
    """Random real one-form on T^5 whose Godbillon-Vey form is not negligible."""
    while True:
        omega = random_form(rng, 5, 1, real=True, nterms=1, band=1, density=0.8)
        if gv_form(omega, 2).sup() > 1e-2:
            return omega


# ---------------------------------------------------------------- criteria


def criterion_1():
    out = Outcome("1 (rho on the circle family)", budget=1.0)
    for r in (0.0, 0.1, 0.25, 0.3, 0.5, 0.9):
        expected = (-r) % 1.0
        for method in ("closed-form", "zeta-numeric"):
            res = rho_s1(r, method=method)
            limit = 1e-9 if method == "closed-form" else 1e-6
            out.check(f"value_{method}", mod1_distance(res.value.real, expected), limit)
            out.check("imag", abs(res.value.imag), 1e-12)
            out.check("corrections", max(abs(res.correction_framing), abs(res.correction_unitarization)), 1e-12)
    return out.finish()


def criterion_2():
    out = Outcome("2 (eta of arithmetic progressions)", budget=5.0)
    rng = _rng(2)
    offsets = rng.uniform(0.01, 0.99, size=20)
    for a in offsets:
        sigma = float(rng.uniform(0.5, 3.0))
        out.check("eta0", abs(eta_numeric(ArithmeticProgression(a, sigma)).eta0 - eta_arith(a, sigma).eta0), 1e-8)
        spec = ArithmeticProgression(a, sigma)
        out.check("truncated_s3", abs(eta_truncated(spec, 3.0, 1e4) - eta_function(spec, 3.0)[0]), 1e-6)
    # finite perturbation flipping one eigenvalue changes eta(0) by -2
    base = ArithmeticProgression(0.8, TWO_PI)
    pert = FinitePerturbation(base, ((TWO_PI * 1.8, -TWO_PI * 1.8),))
    out.check("perturbation", abs(eta_numeric(pert).eta0 - (eta_arith(0.8).eta0 - 2.0)), 1e-8)
    out.check("truncated_s3", abs(eta_truncated(pert, 3.0, 1e4) - eta_function(pert, 3.0)[0]), 1e-6)
    return out.finish()


def criterion_3():
    out = Outcome("3 (exterior calculus and filtration)", budget=30.0)
    rng = _rng(3)
    for dim in (3, 5):
        folis = _foliations(dim)
        for i in range(50):
            p, q = int(rng.integers(0, dim - 1)), int(rng.integers(0, 2))
            a, b = _nonzero_form(rng, dim, p), _nonzero_form(rng, dim, q)
            out.require("nontrivial", a.sup() > 1e-3 and b.sup() > 1e-3)
            out.check("d_squared", a.d().d().sup(), 1e-10)
            lhs = a.wedge(b).d()
            rhs = a.d().wedge(b) + a.wedge(b.d()).scale((-1) ** p)
            out.check("leibniz", (lhs - rhs).sup(), 1e-10)
            if p >= 1:
                alpha = [random_form(rng, dim, p, nterms=2, density=0.8) for _ in range(2)]
                beta = [random_form(rng, dim, p - 1, nterms=2, density=0.8) for _ in range(2)]
                T = TForm(dim, p, 1, alpha, beta)
                stokes = (T.restrict(1.0) - T.restrict(0.0)) - (T.fiber_integrate().d() + T.d().fiber_integrate())
                out.check("stokes", stokes.sup(), 1e-10)
            F = folis[i % len(folis)]
            pa, pb = filtration_degree(a, F), filtration_degree(b, F)
            pa, pb = min(pa, F.codim), min(pb, F.codim)
            out.check("filtration_d", _filtration_residual(a.d(), F, pa), 1e-10)
            target = pa + pb if pa + pb <= F.codim else F.codim + 1
            prod = a.wedge(b)
            out.check("filtration_mult", 0.0 if target > F.codim and prod.is_zero() else _filtration_residual(prod, F, min(target, F.codim)), 1e-10)
    return out.finish()


def criterion_4():
    out = Outcome("4 (Chern-Weil suite)", budget=60.0)
    rng = _rng(4)
    h2 = HermMetric.identity(2)
    F = Foliation.coordinate(4, [0, 1])
    for _ in range(20):
        c = _connection(rng, 3)
        cr = _connection(rng, 3, real=True)
        out.check("closed", max(chern_character(c).closedness_residual(), ahat_form(cr).closedness_residual()), 1e-8)
        out.check("conj", _sup_all(chern_character(c).conj() - chern_character(adjoint(c, h2))), 1e-8)
        ch_u = chern_character(unitarize(c, h2))
        out.check("unitary_real", _sup_all(ch_u - ch_u.conj()), 1e-8)

        a = _connection(rng, 3, rank=1)
        s = a.direct_sum(c)
        out.check("ch_additive", _sup_all(chern_character(s) - (chern_character(a) + chern_character(c))), 1e-8)
        x, y = _so2(rng, 4), _so2(rng, 4)
        prod = dd_wedge(ahat_form(x).seq, ahat_form(y).seq)
        ahat_xy = ahat_form(x.direct_sum(y))
        out.require("nontrivial", ahat_xy.component(4).sup() > 1e-3)
        out.check("ahat_multiplicative", max((ahat_xy.component(d) - prod.degree_component(d)).sup() for d in (0, 4)), 1e-8)

        c0, c2 = _connection(rng, 3), _connection(rng, 3)
        t10 = transgress_ch(c, c0)
        out.require("nontrivial", min(mod_exact_residual(t10.component(k)) for k in (1, 3)) > 1e-3)
        ch1, ch0 = chern_character(c), chern_character(c0)
        out.check("transgression_d", max((t10.component(k).d() - (ch1.component(k + 1) - ch0.component(k + 1))).sup() for k in (1, 3)), 1e-8)
        anti = t10 + transgress_ch(c0, c)
        cyc = t10 + transgress_ch(c2, c) + transgress_ch(c0, c2)
        for k in (1, 3):
            out.check("antisymmetry", mod_exact_residual(anti.component(k)), 1e-8)
            out.check("cocycle", mod_exact_residual(cyc.component(k)), 1e-8)

        # extension of a flat partial connection along a codim-2 coordinate foliation
        flat = np.diag(rng.normal(size=2))
        base = Form.dx(4, 0, coef=flat, rank=2)
        pc = PartialConnection(Connection(base), F)
        normal = {(j,): TrigPoly.from_entries([[random_trig(rng, 4, 1) for _ in range(2)] for _ in range(2)]) for j in (2, 3)}
        ext = Connection(base + Form(4, 1, 2, normal))
        out.check("extension", max(extension_residual(ext, pc), 0.0), 1e-8)
        ch_e = chern_character(ext)
        out.require("nontrivial", ch_e.component(4).sup() > 1e-3)
        out.check("bott_filtration", max(_filtration_residual(ch_e.component(2 * k), F, k) for k in (1, 2)), 1e-8)
    return out.finish()


def criterion_5():
    out = Outcome("5 (A-hat genus)")
    a4, a8, a12 = ahat_coefficients(1), ahat_coefficients(2), ahat_coefficients(3, max_degree=12)
    out.require("a4", list(a4.terms.values()) == [Fraction(-1, 24)] and sum(next(iter(a4.terms))) == 1)
    out.require("a8_p1sq", a8.coefficient((2, 0)) == Fraction(7, 5760))
    out.require("a8_p2", a8.coefficient((0, 1)) == Fraction(-4, 5760))
    out.require("a12_p1cube", a12.coefficient((3, 0, 0)) == Fraction(-31, 967680))
    rng = _rng(5)
    for _ in range(10):
        c = _connection(rng, 4, real=True)
        lhs, rhs = ahat_from_ch(2, c), ahat_form(c)
        out.require("nontrivial", rhs.component(4).sup() > 1e-3)
        out.check("ahat_in_ch", max((lhs.component(d) - rhs.component(d)).sup() for d in (0, 2, 4)), 1e-9)
    return out.finish()


def criterion_6a():
    out = Outcome("6a (Godbillon-Vey identity, stated constant)")
    rng = _rng(6)
    for _ in range(10):
        omega = _random_omega_t5(rng)
        chk = gv_chernweil_identity(omega, 2, gv_constant_literal(2))
        out.require("both_sides_nonzero", chk.lhs_sup > 1e-6 and chk.rhs_sup > 1e-6)
        out.check("residual", chk.residual, 1e-8)
    return out.finish()


def criterion_6b():
    out = Outcome("6b (Godbillon-Vey identity, derived constant and codim-1 lemma)")
    rng = _rng(6)
    for _ in range(10):
        omega = _random_omega_t5(rng)
        chk = gv_chernweil_identity(omega, 2, gv_constant_derived(2))
        out.require("both_sides_nonzero", chk.lhs_sup > 1e-6 and chk.rhs_sup > 1e-6)
        out.check("derived_residual", chk.residual, 1e-8)
    n = 2
    for kind in ("flat", "warped", "mild"):
        cd = _codim1_t5(kind)
        lemma = (-1) ** (n + 1) / ((2j * math.pi) ** (n + 1) * math.factorial(n)) * gv_form(cd, n).integrate_top()
        out.check("lemma", abs(rho_imag_gv(cd, n) - lemma), 1e-8)
    return out.finish()


def criterion_7():
    out = Outcome("7 (imaginary part and framings)")
    pc, c, h = _pauli()
    u = unitarize(c, h)
    out.check("unitary_vanishing", abs(rho_imag(PartialConnection(u, pc.foliation), u, h)), 1e-12)
    rng = _rng(7)
    for _ in range(3):
        v = unitarize(_connection(rng, 3), h)
        out.check("unitary_vanishing", abs(rho_imag(None, v, h)), 1e-12)
    base = rho_imag(pc, c, h)
    out.require("base_nonzero", abs(base) > 1e-3)
    for k in (2, 3):
        M = np.diag([k, 1, 1])
        cov = c.pullback(M)
        pcov = PartialConnection(cov, pc.foliation.pullback(M))
        out.check("covering", abs(rho_imag(pcov, cov, h) - k * base), 1e-10)
    s0 = FramingData.trivial(1, 2)
    s1 = FramingData(Form.dx(1, 0, coef=np.array([[0.0, TWO_PI], [-TWO_PI, 0.0]]), rank=2))
    for r in (0.0, 0.1, 0.25, 0.3, 0.5, 0.9):
        lhs = rho_framing_difference(r, s1, s0)
        rhs = e_relative(s1, s0, chern_character(Connection.flat_s1(r)))
        out.check("framing_difference", abs(lhs - rhs), 1e-8)
    return out.finish()


def criterion_8a():
    out = Outcome("8a (WO complex, Kamber-Tondeur, consistency)", budget=30.0)
    for q, top in ((1, 3), (2, 8), (3, 7)):
        S = WOSpace(q)
        for deg in range(top + 1):
            for e in S.basis(deg):
                out.require("d_squared", wo_d(wo_d(WOElement(S, {e: Fraction(1)}))).is_zero())
    rep = wo_cohomology(1, 3)
    out.require("h3_rank", rep.ranks[3] == 1)
    (gen,) = rep.representatives[3]
    out.require("h3_rep_ct1c1", gen.coefficient((1,), (1,)) != 0)
    out.require("universal_cycle", wo_d(universal_class(2, 5)).is_zero())

    rng = _rng(8)
    h1 = HermMetric.identity(1)
    for _ in range(5):
        cF = _connection(rng, 3, rank=1, real=True)
        rel = kt_class_relation(1, cF, h1)
        out.require("nontrivial", rel.lhs_sup > 1e-3)
        out.check("kt", max(rel.residual, rel.pairing_residual), 1e-8)

    # i <Delta(U), [M]> against the imaginary part on T^5
    U1 = universal_class(1, 5)
    for kind in ("flat", "warped", "mild"):
        cd = _codim1_t5(kind)
        cF = bott_connection(cd)
        out.check("consistency_codim1", abs(delta_pairing(U1, cF, h1) - rho_imag_gv(cd, 2)), 1e-8)
    U2 = universal_class(2, 5)
    h2 = HermMetric.identity(2)
    F = Foliation.coordinate(5, [0, 1, 2])
    pc = PartialConnection(Connection.trivial(5, 2, real=True), F)
    for _ in range(3):
        normal = {(j,): TrigPoly.from_entries([[random_trig(rng, 5, 1, real=True) for _ in range(2)] for _ in range(2)]) for j in (3, 4)}
        cF = Connection(Form(5, 1, 2, normal), real=True)
        out.check("consistency_codim2", abs(delta_pairing(U2, cF, h2) - rho_imag(pc, cF, h2, cF)), 1e-8)
    return out.finish()


def criterion_8b():
    out = Outcome("8b (universal class in WO_2, stated form)")
    S = WOSpace(2)
    stated = (WOElement.ct(S, 1) * WOElement.c(S, 2)).scale(Fraction(-1, 12))
    for eliminate_odd in (False, True):
        diff = universal_class(2, 5, eliminate_odd=eliminate_odd) - stated
        out.require(f"equals_stated_eliminate_odd_{eliminate_odd}", diff.is_zero())
    return out.finish()


CRITERIA = [
    ("1", criterion_1),
    ("2", criterion_2),
    ("3", criterion_3),
    ("4", criterion_4),
    ("5", criterion_5),
    ("6a", criterion_6a),
    ("6b", criterion_6b),
    ("7", criterion_7),
    ("8a", criterion_8a),
    ("8b", criterion_8b),
]

KNOWN_FAILURES = {
    "6a": "the n! normalization overshoots the transgression by a factor n + 1",
    "8b": "the A-hat class contributes -c2/24, so the c~1 c2 coefficient is 1/24",
}


def _params():
    out = []
    for label, fn in CRITERIA:
        marks = [pytest.mark.xfail(strict=True, reason=KNOWN_FAILURES[label])] if label in KNOWN_FAILURES else []
        out.append(pytest.param(fn, id=f"criterion_{label}", marks=marks))
    return out


@pytest.mark.acceptance
@pytest.mark.parametrize("criterion", _params())
def test_criterion(criterion):
    assert criterion()


def test_criterion_9_declared():
    """Criterion 9 is a declared scope limit with nothing to run."""
    line = "SKIP criterion 9 (declared out of scope): covered only through criteria 1 to 8"
    RESULTS.append(line)
    print(line)


if __name__ == "__main__":
    for _, fn in CRITERIA:
        fn()
    test_criterion_9_declared()
