"""Exterior calculus on T^n and on the cylinder [0, 1] x T^n.

Forms store one coefficient per strictly increasing index tuple (0-based
axes internally, 1-based in JSON).  Scalar forms (rank 1) carry scalar
TrigScalar coefficients; rank r > 1 forms carry r x r matrix coefficients and
wedge through the matrix product in the fibres.
"""

from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, Optional

import numpy as np

from . import tolerances as _tol
from .errors import DimensionError, ValidationError, VerificationError
from .trigcalc import TPoly, TrigPoly, TrigScalar, grid_values, trig_sum, verification_counts, verification_grid


# ---------------------------------------------------------------------------
# coefficient helpers


def lift(value, dim, rank=1):
    """Coerce a number, array, TrigPoly or TrigScalar into a form coefficient."""
    if isinstance(value, TrigPoly):
        value = TrigScalar(value)
    elif not isinstance(value, TrigScalar):
        arr = np.asarray(value, dtype=complex)
        if arr.shape == () and rank > 1:
            arr = arr * np.eye(rank)
        value = TrigScalar(TrigPoly.constant(dim, arr))
    if value.dim != dim:
        raise DimensionError(f"coefficient lives on T^{value.dim}, expected T^{dim}")
    if rank == 1:
        if value.shape == (1, 1):
            value = value.entry(0, 0)
        if value.shape != ():
            raise DimensionError(f"rank-1 form got coefficient of shape {value.shape}")
    else:
        if value.shape == ():
            value = value.as_matrix(rank)
        if value.shape != (rank, rank):
            raise DimensionError(f"rank-{rank} form got coefficient of shape {value.shape}")
    return value


def _grid_axes(c):
    axes = set(c.num.active_axes())
    if c.den is not None:
        axes |= set(c.den.active_axes())
    return sorted(axes)


def negligible(c, tol=None):
    """Decide whether a coefficient vanishes: cheap bound first, then grid sup."""
    tol = _tol.tol(_tol.ZERO_TOL) if tol is None else tol
    if c.num.is_zero():
        return True
    if c.bound() < tol:
        return True
    return grid_sup(c) < tol


_GRID_OFFSET = 0.1234567


def grid_sup(c):
    """Max modulus on the verification grid, evaluated by inverse FFT."""
    if c.num.is_zero():
        return 0.0
    axes = _grid_axes(c)
    if not axes:
        return float(np.abs(c.eval(np.zeros(c.dim))).max())
    counts = verification_counts(len(axes))
    vals = grid_values(c.num, axes, counts, _GRID_OFFSET)
    if c.den is not None:
        d = grid_values(c.den, axes, counts, _GRID_OFFSET)
        vals = vals / d.reshape((-1,) + (1,) * (vals.ndim - 1))
    return float(np.abs(vals).max())


def _merge_sign(a, b):
    """Sign of the permutation sorting the concatenation a + b (disjoint)."""
    inversions = 0
    for i in a:
        for j in b:
            if i > j:
                inversions += 1
    return -1 if inversions % 2 else 1


# ---------------------------------------------------------------------------
# forms


class Form:
    """Differential form on T^n with TrigScalar (matrix) coefficients."""

    __slots__ = ("dim", "degree", "rank", "terms")

    def __init__(self, dim, degree, rank=1, terms=None):
        if degree < 0:
            raise DimensionError("form degree must be nonnegative")
        if rank < 1:
            raise DimensionError("rank must be positive")
        clean = {}
        for idx, coef in (terms or {}).items():
            idx = tuple(int(i) for i in idx)
            if len(idx) != degree:
                raise DimensionError(f"index {idx} does not match degree {degree}")
            if list(idx) != sorted(set(idx)) or (idx and (idx[0] < 0 or idx[-1] >= dim)):
                raise DimensionError(f"index {idx} must be strictly increasing within 0..{dim - 1}")
            coef = lift(coef, dim, rank)
            if not coef.is_exact_zero():
                clean[idx] = coef
        object.__setattr__(self, "dim", int(dim))
        object.__setattr__(self, "degree", int(degree))
        object.__setattr__(self, "rank", int(rank))
        object.__setattr__(self, "terms", dict(sorted(clean.items())))

    def __setattr__(self, name, value):
        raise AttributeError("Form is immutable")

    # ------------------------------------------------------------------ ctors
    @classmethod
    def zero(cls, dim, degree, rank=1):
        return cls(dim, degree, rank)

    @classmethod
    def function(cls, value, dim, rank=1):
        return cls(dim, 0, rank, {(): value})

    @classmethod
    def one(cls, dim, rank=1):
        return cls.function(np.eye(rank) if rank > 1 else 1.0, dim, rank)

    @classmethod
    def dx(cls, dim, *axes, coef=1.0, rank=1):
        """``coef dx_{a1} ^ ... ^ dx_{ak}`` for arbitrary (distinct) axes."""
        order = sorted(axes)
        if len(set(order)) != len(order):
            return cls.zero(dim, len(order), rank)
        perm_sign = _perm_sign(list(axes))
        c = lift(coef, dim, rank) * perm_sign
        return cls(dim, len(order), rank, {tuple(order): c})

    @classmethod
    def one_form(cls, dim, comps, rank=1):
        """``sum_j comps[j] dx_j``."""
        if len(comps) != dim:
            raise DimensionError("need one component per axis")
        return cls(dim, 1, rank, {(j,): c for j, c in enumerate(comps) if c is not None})

    @classmethod
    def volume(cls, dim):
        return cls(dim, dim, 1, {tuple(range(dim)): 1.0})

    # ------------------------------------------------------------- predicates
    def is_exact_zero(self):
        return not self.terms

    def is_zero(self, tol=None):
        return all(negligible(c, tol) for c in self.terms.values())

    def coef(self, *idx):
        idx = tuple(idx)
        c = self.terms.get(idx)
        if c is None:
            return lift(0.0, self.dim, self.rank)
        return c

    def sup_bound(self):
        return max((c.bound() for c in self.terms.values()), default=0.0)

    def sup(self):
        """Sup of coefficient moduli on the verification grid."""
        return max((grid_sup(c) for c in self.terms.values()), default=0.0)

    def _same_space(self, other):
        if self.dim != other.dim:
            raise DimensionError(f"forms on T^{self.dim} and T^{other.dim}")
        if self.degree != other.degree:
            raise DimensionError(f"degrees {self.degree} and {other.degree} differ")
        if self.rank != other.rank:
            raise DimensionError(f"ranks {self.rank} and {other.rank} differ")

    # -------------------------------------------------------------- arithmetic
    def __add__(self, other):
        if isinstance(other, (int, float)) and other == 0:
            return self
        self._same_space(other)
        return form_sum([self, other], self.dim, self.degree, self.rank)

    __radd__ = __add__

    def __neg__(self):
        return Form(self.dim, self.degree, self.rank, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, factor):
        """Multiply by a number or a scalar function."""
        if isinstance(factor, (TrigPoly, TrigScalar)):
            factor = lift(factor, self.dim, 1)
            return Form(self.dim, self.degree, self.rank, {k: factor * c for k, c in self.terms.items()})
        if factor == 0:
            return Form.zero(self.dim, self.degree, self.rank)
        return Form(self.dim, self.degree, self.rank, {k: c * factor for k, c in self.terms.items()})

    def __mul__(self, factor):
        return self.scale(factor)

    __rmul__ = __mul__

    def matmul_const(self, left=None, right=None):
        """``left . self . right`` with constant matrices in the fibre."""
        rank = self.rank
        if left is not None:
            rank = np.asarray(left).shape[0]
        elif right is not None:
            rank = np.asarray(right).shape[1]
        terms = {}
        for k, c in self.terms.items():
            cm = c.as_matrix(self.rank) if c.shape == () else c
            terms[k] = cm.matmul_const(left, right)
        return Form(self.dim, self.degree, rank, terms)

    def wedge(self, other):
        if self.dim != other.dim:
            raise DimensionError(f"forms on T^{self.dim} and T^{other.dim}")
        if self.rank != other.rank and 1 not in (self.rank, other.rank):
            raise DimensionError(f"cannot wedge ranks {self.rank} and {other.rank}")
        rank = max(self.rank, other.rank)
        degree = self.degree + other.degree
        if degree > self.dim or not self.terms or not other.terms:
            return Form.zero(self.dim, degree, rank)
        buckets = {}
        for i, a in self.terms.items():
            si = set(i)
            for j, b in other.terms.items():
                if si.intersection(j):
                    continue
                idx = tuple(sorted(i + j))
                prod = a.mul(b)
                if _merge_sign(i, j) < 0:
                    prod = -prod
                buckets.setdefault(idx, []).append(prod)
        shape = () if rank == 1 else (rank, rank)
        terms = {idx: trig_sum(items, self.dim, shape) for idx, items in buckets.items()}
        return Form(self.dim, degree, rank, terms)

    def trace_wedge(self, other):
        """``Tr(self ^ other)`` computed entrywise, without the full product."""
        if self.rank == 1 or other.rank == 1:
            return self.wedge(other).trace()
        degree = self.degree + other.degree
        if degree > self.dim or not self.terms or not other.terms:
            return Form.zero(self.dim, degree)
        buckets = {}
        for i, a in self.terms.items():
            si = set(i)
            for j, b in other.terms.items():
                if si.intersection(j):
                    continue
                prod = a.trace_mul(b)
                if _merge_sign(i, j) < 0:
                    prod = -prod
                buckets.setdefault(tuple(sorted(i + j)), []).append(prod)
        terms = {idx: trig_sum(items, self.dim) for idx, items in buckets.items()}
        return Form(self.dim, degree, 1, terms)

    def __xor__(self, other):
        return self.wedge(other)

    def d(self):
        """Exterior derivative."""
        degree = self.degree + 1
        if degree > self.dim:
            return Form.zero(self.dim, degree, self.rank)
        buckets = {}
        for idx, c in self.terms.items():
            for j in range(self.dim):
                if j in idx:
                    continue
                dc = c.deriv(j)
                if dc.is_exact_zero():
                    continue
                pos = sum(1 for i in idx if i < j)
                new = tuple(sorted(idx + (j,)))
                buckets.setdefault(new, []).append(-dc if pos % 2 else dc)
        shape = () if self.rank == 1 else (self.rank, self.rank)
        terms = {idx: trig_sum(items, self.dim, shape) for idx, items in buckets.items()}
        return Form(self.dim, degree, self.rank, terms)

    def contract(self, X):
        """Interior product with a vector field ``X`` (sequence of n scalar components)."""
        X = as_vector_field(X, self.dim)
        if self.degree == 0:
            return Form.zero(self.dim, 0, self.rank)
        buckets = {}
        for idx, c in self.terms.items():
            for pos, i in enumerate(idx):
                v = X[i]
                if v.is_exact_zero():
                    continue
                term = v.mul(c)
                if pos % 2:
                    term = -term
                buckets.setdefault(idx[:pos] + idx[pos + 1:], []).append(term)
        shape = () if self.rank == 1 else (self.rank, self.rank)
        terms = {idx: trig_sum(items, self.dim, shape) for idx, items in buckets.items()}
        return Form(self.dim, self.degree - 1, self.rank, terms)

    def trace(self):
        return Form(self.dim, self.degree, 1, {k: c.trace() for k, c in self.terms.items()})

    def conj(self):
        """Complex conjugate (coordinate forms dx_j are real)."""
        return Form(self.dim, self.degree, self.rank, {k: c.conj() for k, c in self.terms.items()})

    def H(self):
        """Fibrewise conjugate transpose combined with coefficient conjugation."""
        return Form(self.dim, self.degree, self.rank, {k: c.H() for k, c in self.terms.items()})

    def real_part(self):
        return (self + self.conj()).scale(0.5)

    def imag_part(self):
        return (self - self.conj()).scale(-0.5j)

    def entry(self, i, j):
        """Scalar form of the (i, j) matrix entry."""
        if self.rank == 1:
            return self
        return Form(self.dim, self.degree, 1, {k: c.entry(i, j) for k, c in self.terms.items()})

    def pullback(self, matrix):
        """Pull back along the torus endomorphism x -> M x (M an integer matrix)."""
        m = np.asarray(matrix, dtype=np.int64)
        if m.shape != (self.dim, self.dim):
            raise DimensionError("pullback matrix must be n x n")
        buckets = {}
        shape = () if self.rank == 1 else (self.rank, self.rank)
        for idx, c in self.terms.items():
            pc = c.pullback(m)
            for new in combinations(range(self.dim), self.degree):
                minor = int(round(np.linalg.det(m[np.ix_(idx, new)]))) if idx else 1
                if minor:
                    buckets.setdefault(new, []).append(pc * minor)
        terms = {idx: trig_sum(items, self.dim, shape) for idx, items in buckets.items()}
        return Form(self.dim, self.degree, self.rank, terms)

    def direct_sum(self, other):
        """Block-diagonal sum of two matrix-valued forms of equal degree."""
        if self.dim != other.dim or self.degree != other.degree:
            raise DimensionError("direct sum needs equal torus and degree")
        r1, r2 = self.rank, other.rank
        zero = TrigScalar.zero(self.dim)
        terms = {}
        for idx in sorted(set(self.terms) | set(other.terms)):
            a = self.coef(*idx)
            b = other.coef(*idx)
            rows = []
            for i in range(r1 + r2):
                row = []
                for j in range(r1 + r2):
                    if i < r1 and j < r1:
                        row.append(a.entry(i, j) if r1 > 1 else a)
                    elif i >= r1 and j >= r1:
                        row.append(b.entry(i - r1, j - r1) if r2 > 1 else b)
                    else:
                        row.append(zero)
                rows.append(row)
            terms[idx] = TrigScalar.from_entries(rows)
        return Form(self.dim, self.degree, r1 + r2, terms)

    # ------------------------------------------------------------- evaluation
    def eval(self, x):
        return {idx: c.eval(x) for idx, c in self.terms.items()}

    def integrate_top(self):
        """Integral over T^n with dx_1 ^ ... ^ dx_n positively oriented."""
        if self.degree != self.dim:
            raise DimensionError(f"integrate_top needs degree {self.dim}, got {self.degree}")
        if self.rank != 1:
            raise DimensionError("integrate_top needs a scalar form")
        c = self.terms.get(tuple(range(self.dim)))
        if c is None:
            return 0j
        return complex(c.integrate())

    def integrate_top_with_error(self):
        if self.degree != self.dim or self.rank != 1:
            raise DimensionError("integrate_top needs a scalar top-degree form")
        c = self.terms.get(tuple(range(self.dim)))
        if c is None:
            return 0j, 0.0
        value, err = c.integrate(return_error=True)
        return complex(value), err

    # ------------------------------------------------------------------- json
    def to_json(self):
        return {
            "dim": self.dim,
            "degree": self.degree,
            "rank": self.rank,
            "terms": [
                {"idx": [i + 1 for i in idx], "entry": _coef_to_json(c, self.rank)}
                for idx, c in self.terms.items()
            ],
        }

    @classmethod
    def from_json(cls, data):
        try:
            dim = int(data["dim"])
            degree = int(data["degree"])
            rank = int(data.get("rank", 1))
            terms = {}
            for t in data.get("terms", []):
                idx = tuple(int(i) - 1 for i in t["idx"])
                terms[idx] = _coef_from_json(t["entry"], dim, rank)
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed form: {exc}") from exc
        return cls(dim, degree, rank, terms)

    def __repr__(self):
        return f"Form(dim={self.dim}, degree={self.degree}, rank={self.rank}, nterms={len(self.terms)})"


def _perm_sign(seq):
    sign = 1
    seq = list(seq)
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def _coef_to_json(c, rank):
    if rank == 1:
        return c.to_json()
    return {
        "rows": rank,
        "cols": rank,
        "entries": [[c.entry(i, j).to_json() for j in range(rank)] for i in range(rank)],
    }


def _coef_from_json(data, dim, rank):
    if isinstance(data, dict) and "entries" in data and "num" not in data:
        rows = [[TrigScalar.from_json(e, dim) for e in row] for row in data["entries"]]
        if len(rows) != rank or any(len(r) != rank for r in rows):
            raise ValidationError(f"matrix entry must be {rank} x {rank}")
        return TrigScalar.from_entries(rows)
    return TrigScalar.from_json(data, dim)


def form_sum(forms, dim, degree, rank=1):
    """Sum of forms sharing dim/degree/rank, grouping by index first."""
    buckets = {}
    for f in forms:
        for idx, c in f.terms.items():
            buckets.setdefault(idx, []).append(c)
    shape = () if rank == 1 else (rank, rank)
    return Form(dim, degree, rank, {idx: trig_sum(items, dim, shape) for idx, items in buckets.items()})


# ---------------------------------------------------------------------------
# vector fields


def as_vector_field(X, dim):
    comps = tuple(lift(v, dim, 1) for v in X)
    if len(comps) != dim:
        raise DimensionError(f"vector field needs {dim} components, got {len(comps)}")
    return comps


def coordinate_field(dim, axis, coef=1.0):
    return tuple(lift(coef if j == axis else 0.0, dim) for j in range(dim))


def apply_field(X, f):
    """Directional derivative X(f) of a scalar TrigScalar."""
    out = TrigScalar.zero(f.dim)
    for j, v in enumerate(X):
        if not v.is_exact_zero():
            out = out + v.mul(f.deriv(j))
    return out


def bracket(X, Y):
    """Lie bracket [X, Y] of two vector fields."""
    return tuple(apply_field(X, Y[j]) - apply_field(Y, X[j]) for j in range(len(X)))


def pair(form, X):
    """Value of a 1-form on a vector field as a TrigScalar."""
    if form.degree != 1:
        raise DimensionError("pairing needs a 1-form")
    return form.contract(X).coef()


# ---------------------------------------------------------------------------
# foliations


@dataclass(frozen=True)
class IntegrabilityReport:
    min_gram: float
    residual: float
    grid_points: int
    exact_brackets: bool


class Foliation:
    """Involutive subbundle of the complexified tangent bundle, given by a frame."""

    def __init__(self, dim, frame, verify=True, label=None):
        self.dim = int(dim)
        self.frame = tuple(as_vector_field(X, dim) for X in frame)
        self.label = label
        self.report = None
        if len(self.frame) > self.dim:
            raise ValidationError("frame has more fields than the torus dimension")
        if verify:
            self.report = self.verify()

    @property
    def rank(self):
        return len(self.frame)

    @property
    def codim(self):
        return self.dim - self.rank

    # ---------------------------------------------------------------- factories
    @classmethod
    def maximal(cls, dim):
        return cls(dim, [coordinate_field(dim, j) for j in range(dim)], verify=False, label="max")

    @classmethod
    def minimal(cls, dim):
        return cls(dim, [], verify=False, label="min")

    @classmethod
    def coordinate(cls, dim, axes):
        """Span of the coordinate fields d/dx_a for a in ``axes``."""
        return cls(dim, [coordinate_field(dim, a) for a in axes], verify=False, label="coordinate")

    @classmethod
    def from_kappa(cls, kappa, verify=True):
        """Kernel foliation of a nowhere-zero 1-form.

        The frame is ``d_a - (kappa_a / kappa_j) d_j`` for a != j, with j an
        axis on which the coefficient of ``kappa`` is certified nonvanishing.
        """
        if kappa.degree != 1 or kappa.rank != 1:
            raise DimensionError("kappa must be a scalar 1-form")
        dim = kappa.dim
        pivot = None
        for (j,), c in kappa.terms.items():
            if c.num.is_constant() and c.den is None:
                pivot = j
                break
        candidates = [pivot] if pivot is not None else [j for (j,) in kappa.terms]
        inverse = None
        for j in candidates:
            try:
                inverse = kappa.coef(j).inverse()
                pivot = j
                break
            except Exception:
                continue
        if inverse is None:
            raise ValidationError("no coefficient of kappa is certifiably nonvanishing")
        frame = []
        for a in range(dim):
            if a == pivot:
                continue
            comps = [TrigScalar.zero(dim) for _ in range(dim)]
            comps[a] = TrigScalar.constant(dim, 1.0)
            ka = kappa.coef(a)
            if not ka.is_exact_zero():
                comps[pivot] = -(ka.mul(inverse))
            frame.append(comps)
        return cls(dim, frame, verify=verify, label="codim1")

    def pullback(self, matrix, verify=True):
        """Foliation pulled back along x -> M x (M invertible integer matrix)."""
        m = np.asarray(matrix, dtype=np.int64)
        minv = np.linalg.inv(m.astype(float))
        frame = []
        for X in self.frame:
            pulled = [v.pullback(m) for v in X]
            comps = []
            for i in range(self.dim):
                acc = TrigScalar.zero(self.dim)
                for j in range(self.dim):
                    if abs(minv[i, j]) > 0 and not pulled[j].is_exact_zero():
                        acc = acc + pulled[j] * float(minv[i, j])
                comps.append(acc)
            frame.append(comps)
        return Foliation(self.dim, frame, verify=verify, label=self.label)

    # ------------------------------------------------------------ verification
    def _axes(self):
        axes = set()
        for X in self.frame:
            for v in X:
                axes |= set(_grid_axes(v))
        return sorted(axes)

    def frame_matrix(self, pts):
        """Frame values at points: array of shape (P, rank, dim)."""
        out = np.zeros((pts.shape[0], self.rank, self.dim), dtype=complex)
        for a, X in enumerate(self.frame):
            for j, v in enumerate(X):
                if not v.is_exact_zero():
                    out[:, a, j] = v.eval(pts)
        return out

    def verify(self):
        """Pointwise rank and involutivity of the frame on the verification grid."""
        if self.rank == 0:
            return IntegrabilityReport(1.0, 0.0, 0, True)
        pts = verification_grid(self.dim, self._axes())
        V = self.frame_matrix(pts)
        gram = np.real(np.linalg.det(V @ np.conj(np.swapaxes(V, 1, 2))))
        min_gram = float(gram.min())
        if min_gram < _tol.DEN_MARGIN:
            raise ValidationError(f"frame degenerates: Gram determinant reaches {min_gram:.3e}", residual=min_gram)
        brackets = [bracket(X, Y) for X, Y in combinations(self.frame, 2)]
        exact = all(all(c.bound() < _tol.DROP_TOL for c in B) for B in brackets)
        residual = 0.0
        if not exact:
            residual = self._span_residual(brackets, pts, V)
        if residual > _tol.tol(_tol.INTEGRABILITY_TOL):
            raise ValidationError(f"frame is not involutive: residual {residual:.3e}", residual=residual)
        return IntegrabilityReport(min_gram, residual, pts.shape[0], exact)

    def _span_residual(self, fields, pts, V=None):
        if V is None:
            V = self.frame_matrix(pts)
        worst = 0.0
        basis = np.swapaxes(V, 1, 2)
        for B in fields:
            vec = np.zeros((pts.shape[0], self.dim), dtype=complex)
            for j, v in enumerate(B):
                if not v.is_exact_zero():
                    vec[:, j] = v.eval(pts)
            if self.rank == 0:
                worst = max(worst, float(np.abs(vec).max()))
                continue
            # normal equations per point; the frame has full rank on the grid
            gram = np.conj(V) @ basis
            rhs = np.einsum("paj,pj->pa", np.conj(V), vec)
            sol = np.linalg.solve(gram, rhs[..., None])[..., 0]
            proj = np.einsum("pja,pa->pj", basis, sol)
            worst = max(worst, float(np.abs(vec - proj).max()))
        return worst

    def contains(self, X, tol=None):
        """Pointwise membership of a vector field in the frame span."""
        tol = _tol.tol(_tol.INTEGRABILITY_TOL) if tol is None else tol
        X = as_vector_field(X, self.dim)
        axes = set(self._axes())
        for v in X:
            axes |= set(_grid_axes(v))
        pts = verification_grid(self.dim, sorted(axes))
        return self._span_residual([X], pts) < tol

    def is_real(self, tol=None):
        """Closed under conjugation: conjugates of frame fields stay in the span."""
        return all(self.contains(tuple(v.conj() for v in X), tol) for X in self.frame)


# ---------------------------------------------------------------------------
# filtration


def filtration_degree(form, foliation, tol=None):
    """Largest p with the form in F^p (codim + 1 encodes the zero form)."""
    if form.dim != foliation.dim:
        raise DimensionError("form and foliation live on different tori")
    codim = foliation.codim
    if form.is_zero(tol):
        return codim + 1
    frame = foliation.frame
    for p in range(min(form.degree, codim), 0, -1):
        k = form.degree - p + 1
        if k > len(frame):
            return p
        if all(_iterated_contraction(form, fields).is_zero(tol) for fields in combinations(frame, k)):
            return p
    return 0


def _iterated_contraction(form, fields):
    out = form
    for X in fields:
        out = out.contract(X)
        if out.is_exact_zero():
            break
    return out


def in_filtration(form, foliation, p, tol=None):
    if p <= 0:
        return True
    return filtration_degree(form, foliation, tol) >= p


# ---------------------------------------------------------------------------
# forms on the cylinder


class TForm:
    """Form ``alpha(t) + dt ^ beta(t)`` on [0, 1] x T^n, polynomial in t."""

    __slots__ = ("dim", "degree", "rank", "alpha", "beta")

    def __init__(self, dim, degree, rank=1, alpha=(), beta=()):
        alpha = alpha if isinstance(alpha, TPoly) else TPoly(list(alpha))
        beta = beta if isinstance(beta, TPoly) else TPoly(list(beta))
        for f in alpha.coeffs:
            if f.degree != degree or f.rank != rank:
                raise DimensionError("alpha coefficients must have the TForm degree and rank")
        for f in beta.coeffs:
            if f.degree != degree - 1 or f.rank != rank:
                raise DimensionError("beta coefficients must have degree one less")
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "degree", degree)
        object.__setattr__(self, "rank", rank)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)

    def __setattr__(self, name, value):
        raise AttributeError("TForm is immutable")

    @classmethod
    def from_form(cls, form):
        return cls(form.dim, form.degree, form.rank, [form], [])

    @classmethod
    def dt_wedge(cls, form, tpoly=(1.0,)):
        """``dt ^ p(t) form`` for a numeric polynomial ``p``."""
        return cls(form.dim, form.degree + 1, form.rank, [], [form.scale(c) for c in tpoly])

    @classmethod
    def zero(cls, dim, degree, rank=1):
        return cls(dim, degree, rank)

    def is_exact_zero(self):
        return self.alpha.is_exact_zero() and self.beta.is_exact_zero()

    def __add__(self, other):
        if self.degree != other.degree:
            raise DimensionError("TForm degrees differ")
        return TForm(self.dim, self.degree, max(self.rank, other.rank), self.alpha + other.alpha, self.beta + other.beta)

    def __neg__(self):
        return TForm(self.dim, self.degree, self.rank, -self.alpha, -self.beta)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, factor):
        return TForm(
            self.dim, self.degree, self.rank,
            [f.scale(factor) for f in self.alpha.coeffs],
            [f.scale(factor) for f in self.beta.coeffs],
        )

    def wedge(self, other):
        """``(a + dt b) ^ (a' + dt b') = a a' + dt [b a' + (-1)^|a| a b']``."""
        deg = self.degree + other.degree
        rank = max(self.rank, other.rank)
        w = lambda x, y: x.wedge(y)
        alpha = self.alpha.mul(other.alpha, w)
        beta = self.beta.mul(other.alpha, w)
        right = self.alpha.mul(other.beta, w)
        if self.degree % 2:
            right = -right
        beta = beta + right
        alpha = TPoly(_pad_degree(alpha.coeffs, self.dim, deg, rank))
        beta = TPoly(_pad_degree(beta.coeffs, self.dim, deg - 1, rank))
        return TForm(self.dim, deg, rank, alpha, beta)

    def trace_wedge(self, other):
        """``Tr(self ^ other)`` with the same sign rules as :meth:`wedge`."""
        deg = self.degree + other.degree
        w = lambda x, y: x.trace_wedge(y)
        alpha = self.alpha.mul(other.alpha, w)
        beta = self.beta.mul(other.alpha, w)
        right = self.alpha.mul(other.beta, w)
        if self.degree % 2:
            right = -right
        return TForm(self.dim, deg, 1, alpha, beta + right)

    def d(self):
        """Total differential: ``d_M a + dt (d_t a - d_M b)``."""
        da = TPoly([f.d() for f in self.alpha.coeffs])
        dt_a = self.alpha.deriv()
        dmb = TPoly([f.d() for f in self.beta.coeffs])
        return TForm(self.dim, self.degree + 1, self.rank, da, dt_a - dmb)

    def trace(self):
        return TForm(
            self.dim, self.degree, 1,
            [f.trace() for f in self.alpha.coeffs],
            [f.trace() for f in self.beta.coeffs],
        )

    def restrict(self, t):
        """Pull back along x -> (t, x)."""
        if self.alpha.is_exact_zero():
            return Form.zero(self.dim, self.degree, self.rank)
        return self.alpha.at(t)

    def fiber_integrate(self):
        """Integral over the interval fibre: the exact integral of beta(t)."""
        if self.beta.is_exact_zero():
            return Form.zero(self.dim, max(self.degree - 1, 0), self.rank)
        return self.beta.integrate01()

    def __repr__(self):
        return f"TForm(dim={self.dim}, degree={self.degree}, rank={self.rank}, t-degree={self.alpha.degree}/{self.beta.degree})"


def _pad_degree(coeffs, dim, degree, rank):
    """Replace degree-overflowed placeholders (None) by zero forms."""
    return [Form.zero(dim, degree, rank) if c is None else c for c in coeffs]


def fiber_integrate(tform):
    return tform.fiber_integrate()


# ---------------------------------------------------------------------------
# graded sequences


DD_MINUS = "DD_MINUS"
DD_PER = "DD_PER"


@dataclass(frozen=True)
class GradedFormSequence:
    """Finite family p -> form of degree ``total_degree + 2 p``."""

    dim: int
    total_degree: int
    entries: Dict[int, Form] = field(default_factory=dict)
    flavor: str = DD_PER
    foliation: Optional[Foliation] = None
    rank: int = 1

    def __post_init__(self):
        if self.flavor not in (DD_MINUS, DD_PER):
            raise ValidationError(f"unknown flavor {self.flavor}")
        if self.flavor == DD_MINUS and self.foliation is None:
            raise ValidationError("DD_MINUS sequences need a foliation")
        for p, f in self.entries.items():
            if f.degree != self.total_degree + 2 * p:
                raise DimensionError(f"entry {p} has degree {f.degree}, expected {self.total_degree + 2 * p}")
        clean = {p: f for p, f in sorted(self.entries.items()) if not f.is_exact_zero()}
        object.__setattr__(self, "entries", clean)

    def entry(self, p):
        degree = self.total_degree + 2 * p
        return self.entries.get(p, Form.zero(self.dim, max(degree, 0), self.rank))

    def check_filtration(self, tol=None):
        """Worst shortfall (p - filtration degree) over entries; raises on violation."""
        if self.flavor != DD_MINUS:
            return True
        for p, f in self.entries.items():
            if p > 0 and not in_filtration(f, self.foliation, p, tol):
                raise VerificationError(f"entry {p} is not in F^{p}", residual=f.sup())
        return True

    def degree_component(self, degree):
        """The entry of form degree ``degree`` (or the zero form)."""
        if (degree - self.total_degree) % 2:
            return Form.zero(self.dim, degree, self.rank)
        return self.entry((degree - self.total_degree) // 2)

    @classmethod
    def unit(cls, dim, flavor=DD_PER, foliation=None):
        return cls(dim, 0, {0: Form.one(dim)}, flavor, foliation)

    def to_json(self):
        return {
            "flavor": self.flavor,
            "total_degree": self.total_degree,
            "entries": {str(p): f.to_json() for p, f in self.entries.items()},
        }


def dd_wedge(a, b, verify=True):
    """Componentwise wedge of graded sequences; DD_MINUS inputs are re-verified."""
    if a.dim != b.dim:
        raise DimensionError("sequences on different tori")
    both_minus = a.flavor == DD_MINUS and b.flavor == DD_MINUS
    foliation = a.foliation if both_minus else None
    if both_minus and a.foliation is not b.foliation and a.foliation.frame != b.foliation.frame:
        raise ValidationError("DD_MINUS sequences over different foliations")
    total = a.total_degree + b.total_degree
    rank = max(a.rank, b.rank)
    buckets = {}
    for p, fa in a.entries.items():
        for q, fb in b.entries.items():
            prod = fa.wedge(fb)
            if prod.degree > a.dim or prod.is_exact_zero():
                continue
            buckets.setdefault(p + q, []).append(prod)
    entries = {
        p: form_sum(forms, a.dim, forms[0].degree, forms[0].rank) for p, forms in buckets.items()
    }
    out = GradedFormSequence(a.dim, total, entries, DD_MINUS if both_minus else DD_PER, foliation, rank)
    if both_minus and verify:
        out.check_filtration()
    return out
