"""The truncated Weil algebra WO_q over Q and its evaluation into forms.

Generators: ``ct_i`` (odd i <= q', degree 2i - 1) and ``c_i`` (i <= q,
degree 2i) with ``d ct_i = c_i``.  Monomials in the c's of weighted degree
above 2q vanish (or at least 2q with ``strict=True``).
"""

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Dict, List, Optional, Tuple

from .charforms import ahat_in_ch, chern_character, mod_exact_residual, transgress_ch
from .connections import adjoint
from .errors import DimensionError, ValidationError, VerificationError
from .forms import Form

BASIS_CAP = 10 ** 5

Monomial = Tuple[Tuple[int, ...], Tuple[int, ...]]


def qprime(q, mode="largest"):
    """Largest odd integer <= q (``mode="smallest"`` gives the degenerate reading 1)."""
    if q < 1:
        raise ValidationError("q must be positive")
    if mode == "largest":
        return q if q % 2 else q - 1
    if mode == "smallest":
        return 1
    raise ValidationError(f"unknown q' mode {mode}")


def _sort_sign(seq):
    """Sign of the permutation sorting ``seq`` (0 if it has repeats)."""
    if len(set(seq)) != len(seq):
        return 0
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


@dataclass(frozen=True)
class WOSpace:
    q: int
    strict: bool = False
    mode: str = "largest"

    @property
    def qp(self):
        return qprime(self.q, self.mode)

    @property
    def tilde_indices(self):
        return tuple(range(1, self.qp + 1, 2))

    def c_weight(self, cexp):
        return sum(2 * (i + 1) * e for i, e in enumerate(cexp))

    def allowed(self, cexp):
        w = self.c_weight(cexp)
        return w < 2 * self.q if self.strict else w <= 2 * self.q

    def degree(self, mono):
        tilde, cexp = mono
        return sum(2 * i - 1 for i in tilde) + self.c_weight(cexp)

    def basis(self, degree, cap=BASIS_CAP):
        """Monomials of the given total degree, in degree-lexicographic order."""
        out = []
        tildes = []
        for k in range(len(self.tilde_indices) + 1):
            tildes.extend(combinations(self.tilde_indices, k))
        cparts = list(self._c_exponents())
        for t in tildes:
            td = sum(2 * i - 1 for i in t)
            for ce in cparts:
                if td + self.c_weight(ce) == degree:
                    out.append((t, ce))
                    if len(out) > cap:
                        raise ValidationError(f"basis in degree {degree} exceeds cap {cap}")
        out.sort(key=lambda m: (m[0], tuple(-e for e in m[1])))
        return out

    def _c_exponents(self):
        q = self.q

        def rec(i, remaining, acc):
            if i == q:
                yield tuple(acc)
                return
            w = 2 * (i + 1)
            for e in range(remaining // w + 1):
                yield from rec(i + 1, remaining - e * w, acc + [e])

        for ce in rec(0, 2 * q, []):
            if self.allowed(ce):
                yield ce


class WOElement:
    """Sparse rational combination of monomials in WO_q."""

    __slots__ = ("space", "terms")

    def __init__(self, space, terms=None):
        self.space = space
        clean = {}
        for mono, c in (terms or {}).items():
            c = Fraction(c)
            tilde, cexp = mono
            tilde = tuple(tilde)
            cexp = tuple(cexp)
            if len(cexp) != space.q:
                raise DimensionError(f"c-exponent vector must have length {space.q}")
            if any(i not in space.tilde_indices for i in tilde):
                raise ValidationError(f"tilde generators {tilde} not available for q = {space.q}")
            sign = _sort_sign(tilde)
            if sign == 0 or not space.allowed(cexp) or c == 0:
                continue
            key = (tuple(sorted(tilde)), cexp)
            clean[key] = clean.get(key, Fraction(0)) + sign * c
        self.terms = {m: c for m, c in sorted(clean.items()) if c}

    # ------------------------------------------------------------------ ctors
    @classmethod
    def one(cls, space):
        return cls(space, {((), (0,) * space.q): 1})

    @classmethod
    def ct(cls, space, i):
        return cls(space, {((i,), (0,) * space.q): 1})

    @classmethod
    def c(cls, space, i, power=1):
        e = [0] * space.q
        e[i - 1] = power
        return cls(space, {((), tuple(e)): 1})

    # -------------------------------------------------------------- arithmetic
    def _check(self, other):
        if self.space != other.space:
            raise ValidationError("elements of different WO_q spaces")

    def __add__(self, other):
        self._check(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, Fraction(0)) + c
        return WOElement(self.space, out)

    def __neg__(self):
        return WOElement(self.space, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, factor):
        return WOElement(self.space, {m: c * Fraction(factor) for m, c in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, WOElement):
            return self.scale(other)
        return wo_mul(self, other)

    __rmul__ = scale

    def __eq__(self, other):
        return isinstance(other, WOElement) and self.space == other.space and self.terms == other.terms

    def __hash__(self):
        return hash((self.space, tuple(self.terms.items())))

    def is_zero(self):
        return not self.terms

    def degrees(self):
        return sorted({self.space.degree(m) for m in self.terms})

    def homogeneous(self, degree):
        return WOElement(self.space, {m: c for m, c in self.terms.items() if self.space.degree(m) == degree})

    def coefficient(self, tilde, cexp):
        return self.terms.get((tuple(tilde), tuple(cexp)), Fraction(0))

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for (tilde, cexp), c in self.terms.items():
            factors = [f"ct{i}" for i in tilde]
            factors += [f"c{i + 1}" if e == 1 else f"c{i + 1}^{e}" for i, e in enumerate(cexp) if e]
            parts.append(f"{c}" + ("*" + "*".join(factors) if factors else ""))
        return " + ".join(parts)

    def to_json(self):
        return {
            "q": self.space.q,
            "terms": [
                {"ct": list(t), "c": list(ce), "coef": str(c)} for (t, ce), c in self.terms.items()
            ],
        }


def wo_mul(a, b):
    """Graded-commutative product with Koszul signs and truncation."""
    a._check(b)
    out = {}
    for (t1, c1), x in a.terms.items():
        for (t2, c2), y in b.terms.items():
            sign = _sort_sign(t1 + t2)
            if sign == 0:
                continue
            ce = tuple(u + v for u, v in zip(c1, c2))
            if not a.space.allowed(ce):
                continue
            key = (tuple(sorted(t1 + t2)), ce)
            out[key] = out.get(key, Fraction(0)) + sign * x * y
    return WOElement(a.space, out)


def wo_d(e):
    """Differential: ``d ct_i = c_i``, ``d c_i = 0``, graded Leibniz rule."""
    out = {}
    for (tilde, cexp), coef in e.terms.items():
        for j, i in enumerate(tilde):
            ce = list(cexp)
            ce[i - 1] += 1
            ce = tuple(ce)
            if not e.space.allowed(ce):
                continue
            key = (tilde[:j] + tilde[j + 1:], ce)
            out[key] = out.get(key, Fraction(0)) + (-1) ** j * coef
    return WOElement(e.space, out)


# ---------------------------------------------------------------------------
# cohomology over Q


def _rank(rows):
    """Rank of a list of sparse rows (dict col -> Fraction) by exact elimination."""
    pivots = {}
    rank = 0
    for row in rows:
        row = {k: v for k, v in row.items() if v}
        while row:
            col = min(row)
            if col in pivots:
                prow = pivots[col]
                f = row[col] / prow[col]
                for k, v in prow.items():
                    nv = row.get(k, Fraction(0)) - f * v
                    if nv:
                        row[k] = nv
                    else:
                        row.pop(k, None)
            else:
                pivots[col] = row
                rank += 1
                break
    return rank


def _differential_matrix(space, degree, cap):
    src = space.basis(degree, cap)
    tgt = space.basis(degree + 1, cap)
    index = {m: k for k, m in enumerate(tgt)}
    cols = []
    for m in src:
        img = wo_d(WOElement(space, {m: 1}))
        cols.append({index[k]: v for k, v in img.terms.items()})
    return src, tgt, cols


def _nullspace(cols, nrows):
    """Kernel basis of the linear map whose columns are ``cols`` (sparse dicts)."""
    ncols = len(cols)
    # dense exact RREF of the nrows x ncols matrix
    M = [[cols[j].get(i, Fraction(0)) for j in range(ncols)] for i in range(nrows)]
    pivot_cols = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, nrows) if M[i][c] != 0), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        inv = 1 / M[r][c]
        M[r] = [v * inv for v in M[r]]
        for i in range(nrows):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        pivot_cols.append(c)
        r += 1
        if r == nrows:
            break
    free = [c for c in range(ncols) if c not in pivot_cols]
    basis = []
    for fc in free:
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        for row, pc in enumerate(pivot_cols):
            v[pc] = -M[row][fc]
        basis.append(v)
    return basis


@dataclass(frozen=True)
class CohomologyReport:
    q: int
    ranks: Dict[int, int]
    basis_dims: Dict[int, int]
    representatives: Dict[int, List[WOElement]] = field(default_factory=dict, compare=False)
    strict: bool = False
    alternative: Optional[Dict[int, int]] = None

    def euler_characteristic(self):
        return sum((-1) ** k * r for k, r in self.ranks.items())

    def basis_euler_characteristic(self):
        return sum((-1) ** k * r for k, r in self.basis_dims.items())

    def to_json(self):
        out = {
            "q": self.q,
            "truncation": "strict" if self.strict else "inclusive",
            "ranks": {str(k): v for k, v in sorted(self.ranks.items())},
            "basis_dims": {str(k): v for k, v in sorted(self.basis_dims.items())},
            "representatives": {
                str(k): [repr(e) for e in reps] for k, reps in sorted(self.representatives.items())
            },
        }
        if self.alternative is not None:
            out["alternative_ranks"] = {str(k): v for k, v in sorted(self.alternative.items())}
            out["alternative_truncation"] = "inclusive" if self.strict else "strict"
        return out


def _ranks(space, max_degree, cap, with_reps):
    ranks, dims, reps = {}, {}, {}
    d_rank = {-1: 0}
    matrices = {}
    for k in range(0, max_degree + 1):
        src, tgt, cols = _differential_matrix(space, k, cap)
        matrices[k] = (src, tgt, cols)
        dims[k] = len(src)
        d_rank[k] = _rank([dict(c) for c in cols])
    for k in range(0, max_degree + 1):
        ranks[k] = dims[k] - d_rank[k] - d_rank[k - 1]
        if with_reps and ranks[k] > 0:
            reps[k] = _representatives(space, k, matrices, ranks[k])
    return ranks, dims, reps


def _representatives(space, k, matrices, count):
    src, tgt, cols = matrices[k]
    kernel = _nullspace(cols, len(tgt))
    image_rows = []
    if k > 0:
        psrc, ptgt, pcols = matrices[k - 1]
        image_rows = [dict(c) for c in pcols]
    chosen = []
    base_rank = _rank([dict(r) for r in image_rows])
    for v in kernel:
        row = {i: x for i, x in enumerate(v) if x}
        trial = image_rows + [dict(r) for r in chosen] + [row]
        if _rank([dict(r) for r in trial]) > base_rank + len(chosen):
            chosen.append(row)
        if len(chosen) == count:
            break
    return [WOElement(space, {src[i]: x for i, x in row.items()}) for row in chosen]


def wo_cohomology(q, max_degree, strict=False, mode="largest", cap=BASIS_CAP, representatives=True):
    """Betti numbers of WO_q over Q in degrees 0..max_degree.

    Ranks for the other truncation convention are attached when they differ.
    """
    space = WOSpace(q, strict, mode)
    ranks, dims, reps = _ranks(space, max_degree, cap, representatives)
    other, _, _ = _ranks(WOSpace(q, not strict, mode), max_degree, cap, False)
    alternative = other if other != ranks else None
    return CohomologyReport(q, ranks, dims, reps, strict, alternative)


# ---------------------------------------------------------------------------
# evaluation into forms


def _generator_images(space, cF, h):
    """Forms assigned to ct_i and c_i."""
    tr = transgress_ch(cF, adjoint(cF, h))
    ch = chern_character(cF)
    dim = cF.dim
    ct = {}
    for i in space.tilde_indices:
        deg = 2 * i - 1
        form = tr.component(deg) if deg <= dim else Form.zero(dim, deg)
        ct[i] = form.scale(1.0 / (2 * (1j ** i)))
    cs = {}
    for i in range(1, space.q + 1):
        deg = 2 * i
        form = ch.component(deg) if deg <= dim else Form.zero(dim, deg)
        cs[i] = form.scale(1.0 / (1j ** i))
    return ct, cs


def delta_map(e, cF, h, images=None):
    """Multiplicative extension of ``ct_i -> ch~_{2i}(cF, cF*) / (2 i^i)`` and ``c_i -> ch_{2i}(cF) / i^i``.

    Monomials of degree above dim M map to zero forms.  The element must be
    homogeneous.
    """
    degs = e.degrees()
    if len(degs) > 1:
        raise DimensionError("delta_map needs a homogeneous element")
    dim = cF.dim
    degree = degs[0] if degs else 0
    if degree > dim:
        return Form.zero(dim, degree)
    ct, cs = images or _generator_images(e.space, cF, h)
    total = Form.zero(dim, degree)
    for (tilde, cexp), coef in e.terms.items():
        term = Form.one(dim)
        for i in tilde:
            term = term.wedge(ct[i])
        for i, power in enumerate(cexp, start=1):
            for _ in range(power):
                term = term.wedge(cs[i])
        total = total + term.scale(float(coef))
    return total


def universal_class(q, dim_m, mode="largest", eliminate_odd=False, strict=False):
    """``[(sum_{odd i <= q'} (-1)^{(i+1)/2} ct_i) A(c_1..c_q)]`` in degree dim_m."""
    if dim_m % 2 == 0:
        raise ValidationError("dim M must be odd")
    if not 2 * q < dim_m:
        raise ValidationError("universal class needs 2q < dim M")
    space = WOSpace(q, strict, mode)
    A = ahat_in_ch(q, eliminate_odd=eliminate_odd, strict=strict)
    a_elem = WOElement(space, {((), mono): c for mono, c in A.terms.items()})
    lead = WOElement(space, {})
    for i in space.tilde_indices:
        lead = lead + WOElement.ct(space, i).scale((-1) ** ((i + 1) // 2))
    U = wo_mul(lead, a_elem).homogeneous(dim_m)
    if not wo_d(U).is_zero():
        raise VerificationError("universal class is not a cycle")
    return U


@dataclass(frozen=True)
class KTRelation:
    residual: float
    pairing_residual: float
    lhs_sup: float
    rhs_sup: float
    precondition_2p_minus_1_gt_q: bool

    def to_json(self):
        return {
            "residual": self.residual,
            "pairing_residual": self.pairing_residual,
            "lhs_sup": self.lhs_sup,
            "rhs_sup": self.rhs_sup,
            "precondition_2p_minus_1_gt_q": self.precondition_2p_minus_1_gt_q,
        }


def kt_class_relation(p, cF, h, q=None):
    """Compare the Kamber-Tondeur form with ``2 i^p Delta(ct_p)`` modulo exact forms."""
    if p < 1 or p % 2 == 0:
        raise ValidationError("p must be a positive odd integer")
    q = q or max(p, 1)
    space = WOSpace(q)
    if p > space.qp:
        raise ValidationError(f"ct_{p} is not a generator of WO_{q}")
    tr = transgress_ch(cF, adjoint(cF, h))
    lhs = tr.component(2 * p - 1)
    rhs = delta_map(WOElement.ct(space, p), cF, h).scale(2 * (1j ** p))
    diff = lhs - rhs
    pairing = mod_exact_residual(diff) if diff.degree <= cF.dim else 0.0
    return KTRelation(diff.sup(), float(pairing), lhs.sup(), rhs.sup(), 2 * p - 1 > q)


def delta_pairing(U, cF, h):
    """``i <Delta(U), [M]>``; the zero class pairs to zero."""
    if U.is_zero():
        return 0j
    form = delta_map(U, cF, h)
    if form.degree != cF.dim:
        raise DimensionError("Delta(U) must be a top-degree form")
    return 1j * form.integrate_top()
