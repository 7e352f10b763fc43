"""Characteristic forms, genus tables and transgressions.

Conventions: with ``X = -R / 2 pi i``

* ``ch_{2p} = Tr(X^p) / p!``
* ``c_k`` is the k-th elementary symmetric function of ``X`` (Newton's
  identities from the power traces), so ``det(1 + X) = 1 + c_1 + c_2 + ...``
* ``p_i = (-1)^i c_{2i}``
* ``A-hat`` is the multiplicative sequence of ``(x/2) / sinh(x/2)``.

Every routine accepts either a plain :class:`~folrho.forms.Form` curvature or
a :class:`~folrho.forms.TForm` curvature on the cylinder, which is how the
transgressions are built.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Tuple

import numpy as np

from .connections import adjoint, interpolate, is_extension
from .errors import DimensionError, ValidationError
from .forms import DD_MINUS, DD_PER, Form, GradedFormSequence, TForm

TWO_PI_I = 2j * math.pi


# ---------------------------------------------------------------------------
# exact polynomials


class QPoly:
    """Polynomial with Fraction coefficients in variables x_1..x_k.

    Monomials are exponent tuples; ``weights`` give the degree of each
    variable so that truncation by weighted degree is available.
    """

    __slots__ = ("nvars", "terms", "names", "weights")

    def __init__(self, nvars, terms=None, names=None, weights=None):
        self.nvars = nvars
        self.names = tuple(names) if names else tuple(f"x{i + 1}" for i in range(nvars))
        self.weights = tuple(weights) if weights else tuple(range(1, nvars + 1))
        clean = {}
        for mono, c in (terms or {}).items():
            c = Fraction(c)
            if c:
                mono = tuple(mono)
                clean[mono] = clean.get(mono, Fraction(0)) + c
        self.terms = {m: c for m, c in sorted(clean.items(), key=lambda mc: (self._wdeg(mc[0]), mc[0])) if c}

    def _wdeg(self, mono):
        return sum(e * w for e, w in zip(mono, self.weights))

    def _like(self, terms):
        return QPoly(self.nvars, terms, self.names, self.weights)

    @classmethod
    def const(cls, nvars, value, names=None, weights=None):
        return cls(nvars, {(0,) * nvars: value}, names, weights)

    @classmethod
    def var(cls, nvars, i, names=None, weights=None):
        mono = [0] * nvars
        mono[i] = 1
        return cls(nvars, {tuple(mono): 1}, names, weights)

    def __add__(self, other):
        if not isinstance(other, QPoly):
            other = self._like({(0,) * self.nvars: other})
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, Fraction(0)) + c
        return self._like(out)

    __radd__ = __add__

    def __neg__(self):
        return self._like({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, QPoly):
            return self._like({m: c * Fraction(other) for m, c in self.terms.items()})
        out = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                out[m] = out.get(m, Fraction(0)) + c1 * c2
        return self._like(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, QPoly):
            other = self._like({(0,) * self.nvars: other})
        return self.terms == other.terms

    def __hash__(self):
        return hash(tuple(self.terms.items()))

    def truncate(self, max_weight, strict=False):
        keep = (lambda w: w < max_weight) if strict else (lambda w: w <= max_weight)
        return self._like({m: c for m, c in self.terms.items() if keep(self._wdeg(m))})

    def homogeneous(self, weight):
        return self._like({m: c for m, c in self.terms.items() if self._wdeg(m) == weight})

    def coefficient(self, mono):
        return self.terms.get(tuple(mono), Fraction(0))

    def substitute(self, values, one, mul=lambda a, b: a.wedge(b), scale=lambda a, c: a.scale(c)):
        """Evaluate with ring elements ``values`` (same length as the variables)."""
        acc = None
        for mono, c in self.terms.items():
            term = one
            for v, e in zip(values, mono):
                for _ in range(e):
                    term = mul(term, v)
            term = scale(term, float(c))
            acc = term if acc is None else acc + term
        return acc

    def subs_poly(self, polys):
        """Substitute polynomials for the variables."""
        target = polys[0]
        acc = QPoly(target.nvars, {}, target.names, target.weights)
        for mono, c in self.terms.items():
            term = QPoly.const(target.nvars, c, target.names, target.weights)
            for p, e in zip(polys, mono):
                for _ in range(e):
                    term = term * p
            acc = acc + term
        return acc

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for mono, c in self.terms.items():
            factors = [n if e == 1 else f"{n}^{e}" for n, e in zip(self.names, mono) if e]
            coef = str(c)
            parts.append(coef if not factors else f"{coef}*{'*'.join(factors)}")
        return " + ".join(parts)

    __repr__ = __str__

    def to_json(self):
        return [
            {"monomial": {n: e for n, e in zip(self.names, m) if e}, "coef": str(c)}
            for m, c in self.terms.items()
        ]


# ---------------------------------------------------------------------------
# power series helpers over Fractions


def _series_inverse(a, n):
    out = [Fraction(0)] * n
    out[0] = 1 / a[0]
    for k in range(1, n):
        s = sum(a[j] * out[k - j] for j in range(1, k + 1) if j < len(a))
        out[k] = -s / a[0]
    return out


def _series_mul(a, b, n):
    out = [Fraction(0)] * n
    for i, x in enumerate(a[:n]):
        if x:
            for j, y in enumerate(b[: n - i]):
                out[i + j] += x * y
    return out


def _series_log(a, n):
    """log of a series with constant term 1."""
    u = [Fraction(0)] + list(a[1:n])
    out = [Fraction(0)] * n
    power = [Fraction(1)] + [Fraction(0)] * (n - 1)
    for k in range(1, n):
        power = _series_mul(power, u, n)
        sign = 1 if k % 2 else -1
        for i in range(n):
            out[i] += sign * power[i] / k
    return out


def ahat_series_in_z(n):
    """Coefficients of ``(sqrt z / 2) / sinh(sqrt z / 2)`` in powers of z."""
    denom = [Fraction(1, 4 ** m * math.factorial(2 * m + 1)) for m in range(n)]
    return _series_inverse(denom, n)


def power_sums_in_elementary(k, names=None, weights=None):
    """Newton: power sums s_1..s_k as polynomials in elementary e_1..e_k."""
    one = QPoly.const(k, 1, names, weights)
    e = [one] + [QPoly.var(k, i, names, weights) for i in range(k)]
    s = [None]
    for m in range(1, k + 1):
        acc = e[m] * ((-1) ** (m - 1) * m)
        for i in range(1, m):
            acc = acc + e[i] * s[m - i] * ((-1) ** (i - 1))
        s.append(acc)
    return s[1:]


def elementary_in_power_sums(k, names=None, weights=None):
    """Newton: elementary e_1..e_k as polynomials in power sums s_1..s_k."""
    one = QPoly.const(k, 1, names, weights)
    s = [QPoly.var(k, i, names, weights) for i in range(k)]
    e = [one]
    for m in range(1, k + 1):
        acc = QPoly(k, {}, names, weights)
        for i in range(1, m + 1):
            acc = acc + e[m - i] * s[i - 1] * ((-1) ** (i - 1))
        e.append(acc * Fraction(1, m))
    return e[1:]


@dataclass(frozen=True)
class GenusTable:
    """A-hat polynomials in Pontryagin variables up to ``max_degree``."""

    max_degree: int
    ahat: Tuple[QPoly, ...]
    power_sums: Tuple[QPoly, ...]

    @property
    def kmax(self):
        return self.max_degree // 4

    def component(self, k):
        """``A-hat_{4k}`` as a polynomial in p_1..p_kmax."""
        return self.ahat[k]

    def to_json(self):
        return {
            "max_degree": self.max_degree,
            "ahat": {str(4 * k): p.to_json() for k, p in enumerate(self.ahat)},
        }


@lru_cache(maxsize=None)
def genus_table(max_degree=8):
    """Exact A-hat table: exp(sum_m a_m s_m) with log Q(z) = sum_m a_m z^m."""
    k = max(max_degree // 4, 1)
    names = [f"p{i + 1}" for i in range(k)]
    weights = [4 * (i + 1) for i in range(k)]
    logq = _series_log(ahat_series_in_z(k + 1), k + 1)
    s = power_sums_in_elementary(k, names, weights)
    y = QPoly(k, {}, names, weights)
    for m in range(1, k + 1):
        y = y + s[m - 1] * logq[m]
    total = QPoly.const(k, 1, names, weights)
    term = QPoly.const(k, 1, names, weights)
    for j in range(1, k + 1):
        term = (term * y * Fraction(1, j)).truncate(4 * k)
        total = total + term
    total = total.truncate(4 * k)
    comps = tuple(total.homogeneous(4 * j) for j in range(k + 1))
    return GenusTable(max_degree, comps, tuple(s))


def ahat_coefficients(k, max_degree=None):
    """``A-hat_{4k}`` as an exact polynomial in p_1..p_k."""
    table = genus_table(max(max_degree or 8, 4 * k))
    return table.component(k)


# ---------------------------------------------------------------------------
# char forms


@dataclass(frozen=True)
class CharForm:
    """Tagged graded sequence of characteristic forms."""

    kind: str
    seq: GradedFormSequence
    sources: Tuple = field(default=(), compare=False)

    @property
    def dim(self):
        return self.seq.dim

    def component(self, degree):
        """Form of the given degree (zero when absent)."""
        return self.seq.degree_component(degree)

    def degrees(self):
        return sorted(f.degree for f in self.seq.entries.values())

    def closedness_residual(self):
        return max((f.d().sup() for f in self.seq.entries.values()), default=0.0)

    def conj(self):
        entries = {p: f.conj() for p, f in self.seq.entries.items()}
        return CharForm(self.kind, GradedFormSequence(self.dim, self.seq.total_degree, entries, self.seq.flavor, self.seq.foliation))

    def __add__(self, other):
        return _combine(self, other, 1.0)

    def __sub__(self, other):
        return _combine(self, other, -1.0)

    def scale(self, factor):
        entries = {p: f.scale(factor) for p, f in self.seq.entries.items()}
        return CharForm(self.kind, GradedFormSequence(self.dim, self.seq.total_degree, entries, self.seq.flavor, self.seq.foliation))

    def residual_to(self, other):
        diff = self - other
        return max((f.sup() for f in diff.seq.entries.values()), default=0.0)

    def to_json(self):
        out = self.seq.to_json()
        out["kind"] = self.kind
        return out


def _combine(a, b, sign):
    if a.seq.total_degree != b.seq.total_degree:
        raise DimensionError("cannot add char forms of different total degree")
    entries = {}
    for p in sorted(set(a.seq.entries) | set(b.seq.entries)):
        entries[p] = a.seq.entry(p) + b.seq.entry(p).scale(sign)
    return CharForm(a.kind, GradedFormSequence(a.dim, a.seq.total_degree, entries, DD_PER))


def _max_degree(R):
    return R.dim + (1 if isinstance(R, TForm) else 0)


def _one(R):
    one = Form.one(R.dim)
    return TForm.from_form(one) if isinstance(R, TForm) else one


def power_traces(R, kmax=None):
    """``[Tr(X), Tr(X^2), ...]`` with ``X = -R / 2 pi i``, up to the top degree."""
    top = _max_degree(R) // 2
    kmax = top if kmax is None else min(kmax, top)
    X = R.scale(-1.0 / TWO_PI_I)
    out = []
    P = None
    for k in range(1, kmax + 1):
        out.append(X.trace() if P is None else P.trace_wedge(X))
        if k < kmax:
            P = X if P is None else P.wedge(X)
    return out


def _ch_components(R, rank):
    traces = power_traces(R)
    return {k: t.scale(1.0 / math.factorial(k)) for k, t in enumerate(traces, start=1)}


def _chern_components(R):
    P = power_traces(R)
    e = {0: None}
    for m in range(1, len(P) + 1):
        acc = P[m - 1].scale((-1) ** (m - 1))
        for i in range(1, m):
            term = e[m - i].wedge(P[i - 1]).scale((-1) ** (i - 1))
            acc = acc + term
        e[m] = acc.scale(1.0 / m)
    e.pop(0)
    return e


def _pontryagin_components(R):
    c = _chern_components(R)
    return {i: c[2 * i].scale((-1) ** i) for i in range(1, len(c) // 2 + 1)}


def _ahat_components(R):
    pont = _pontryagin_components(R)
    kmax = _max_degree(R) // 4
    if kmax == 0:
        return {}
    table = genus_table(max(8, 4 * kmax))
    one = _one(R)
    values = [pont.get(i + 1) for i in range(table.kmax)]
    out = {}
    for k in range(1, kmax + 1):
        poly = table.component(k)
        used = [v if v is not None else _zero_like(R, 4 * (i + 1)) for i, v in enumerate(values)]
        val = poly.substitute(used, one)
        if val is not None:
            out[k] = val
    return out


def _zero_like(R, degree):
    if isinstance(R, TForm):
        return TForm.zero(R.dim, degree)
    return Form.zero(R.dim, degree)


def _seq(dim, total, comps, flavor=DD_PER, foliation=None):
    entries = {p: f for p, f in comps.items() if f.degree <= dim}
    return GradedFormSequence(dim, total, entries, flavor, foliation)


def chern_character(c):
    """``ch(nabla)``: entries ``ch_{2p}`` at index p, ``ch_0 = rank``."""
    R = c.curvature()
    comps = {0: Form.function(float(c.rank), c.dim)}
    comps.update(_ch_components(R, c.rank))
    return CharForm("ch", _seq(c.dim, 0, comps), (c,))


def chern_character_filtered(c, pc):
    """ch as a DD_MINUS sequence for an extension of a flat partial connection."""
    if not is_extension(c, pc):
        raise ValidationError("connection does not extend the partial connection")
    ch = chern_character(c)
    seq = GradedFormSequence(c.dim, 0, dict(ch.seq.entries), DD_MINUS, pc.foliation)
    seq.check_filtration()
    return CharForm("ch-", seq, (c, pc))


def chern_forms(c):
    R = c.curvature()
    comps = {0: Form.one(c.dim)}
    comps.update(_chern_components(R))
    return CharForm("c", _seq(c.dim, 0, comps), (c,))


def _require_real(c):
    if not c.real:
        raise ValidationError("Pontryagin and A-hat forms need a connection flagged real")


def pontryagin_forms(c):
    _require_real(c)
    R = c.curvature()
    comps = {0: Form.one(c.dim)}
    comps.update({2 * i: f for i, f in _pontryagin_components(R).items()})
    return CharForm("p", _seq(c.dim, 0, comps), (c,))


def ahat_form(c):
    _require_real(c)
    R = c.curvature()
    comps = {0: Form.one(c.dim)}
    comps.update({2 * k: f for k, f in _ahat_components(R).items()})
    return CharForm("ahat", _seq(c.dim, 0, comps), (c,))


# ---------------------------------------------------------------------------
# transgressions


def _transgress(components, dim):
    entries = {}
    for p, tf in components.items():
        f = tf.fiber_integrate()
        if f.degree <= dim and not f.is_exact_zero():
            entries[p] = f
    return GradedFormSequence(dim, -1, entries, DD_PER)


def transgress_ch(c1, c0, schedule=None):
    """``ch~(c1, c0)``: fibre integral of ch of the interpolating connection."""
    T = interpolate(c0, c1, schedule)
    comps = _ch_components(T.curvature(), c0.rank)
    return CharForm("ch~", _transgress(comps, c0.dim), (c1, c0))


def transgress_ahat(c1, c0, schedule=None):
    """``A~(c1, c0)``: fibre integral of A-hat of the interpolating connection."""
    T = interpolate(c0, c1, schedule)
    comps = {2 * k: f for k, f in _ahat_components(T.curvature()).items()}
    return CharForm("ahat~", _transgress(comps, c0.dim), (c1, c0))


def kamber_tondeur(c, h, p):
    """Degree ``2p - 1`` component of ``ch~(c, c*)``."""
    if p < 1:
        raise ValidationError("Kamber-Tondeur index must be at least 1")
    return transgress_ch(c, adjoint(c, h)).component(2 * p - 1)


# ---------------------------------------------------------------------------
# A-hat in terms of ch


def ahat_in_ch(q, eliminate_odd=False, strict=False):
    """Universal polynomial A(c_1..c_q) with c_i standing for ch_{2i}.

    Pontryagin forms are rewritten through the Chern forms of the connection
    itself (``c_j = e_j(P)`` with power traces ``P_k = k! ch_{2k}``).  With
    ``eliminate_odd`` the components ch_{2i} for odd i are set to zero, which
    is the class-level identity for complexified real bundles.  The result is
    truncated to weighted degree <= 2q (or < 2q with ``strict``).
    """
    if q < 1:
        raise ValidationError("q must be positive")
    names = [f"c{i + 1}" for i in range(q)]
    weights = [2 * (i + 1) for i in range(q)]
    kp = q // 2
    if kp == 0:
        return QPoly.const(q, 1, names, weights)
    # power traces as polynomials in the ch variables
    P = []
    for k in range(1, 2 * kp + 1):
        if k <= q and not (eliminate_odd and k % 2):
            P.append(QPoly.var(q, k - 1, names, weights) * math.factorial(k))
        else:
            P.append(QPoly(q, {}, names, weights))
    e = elementary_in_power_sums(2 * kp, names, weights)
    e = [poly.subs_poly(P) for poly in e]
    pont = [e[2 * i - 1] * ((-1) ** i) for i in range(1, kp + 1)]
    table = genus_table(max(8, 4 * kp))
    total = QPoly.const(q, 1, names, weights)
    for k in range(1, kp + 1):
        poly = table.component(k)
        # the table has kmax variables; pad with zeros beyond kp
        values = pont + [QPoly(q, {}, names, weights)] * (table.kmax - kp)
        total = total + poly.subs_poly(values)
    return total.truncate(2 * q, strict=strict)


def ahat_from_ch(q, c, **kw):
    """Substitute ch_{2i}(c) into ``ahat_in_ch(q)``; returns a CharForm."""
    poly = ahat_in_ch(q, **kw)
    ch = chern_character(c)
    values = [ch.component(2 * (i + 1)) if 2 * (i + 1) <= c.dim else Form.zero(c.dim, 2 * (i + 1)) for i in range(q)]
    comps = {}
    for deg in range(0, min(2 * q, c.dim) + 1, 2):
        part = poly.homogeneous(deg)
        if not part.terms:
            continue
        comps[deg // 2] = part.substitute(values, Form.one(c.dim)) if deg else Form.function(float(part.coefficient((0,) * q)), c.dim)
    return CharForm("A(ch)", _seq(c.dim, 0, comps), (c,))


# ---------------------------------------------------------------------------
# pairing with closed forms


def closed_basis(dim, degree):
    """Constant forms dx_J spanning the de Rham cohomology in the given degree."""
    from itertools import combinations
    return [Form.dx(dim, *J) for J in combinations(range(dim), degree)]


def pairing_vector(form):
    """Integrals of ``form ^ dx_J`` over all complementary constant forms."""
    dim = form.dim
    out = []
    for g in closed_basis(dim, dim - form.degree):
        out.append(form.wedge(g).trace().integrate_top() if form.rank > 1 else form.wedge(g).integrate_top())
    return np.array(out, dtype=complex)


def mod_exact_residual(form, extra=()):
    """Largest pairing of a form with constant and supplied closed test forms."""
    vals = list(np.abs(pairing_vector(form)))
    for g in extra:
        if g.degree + form.degree == form.dim:
            vals.append(abs(form.wedge(g).integrate_top()))
    return max(vals, default=0.0)
