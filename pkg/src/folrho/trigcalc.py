"""Exact coefficient arithmetic on the flat torus T^n = R^n / Z^n.

A :class:`TrigPoly` is a finite Fourier series ``sum_k c_k e^{2 pi i k.x}``
whose coefficients may be scalars or constant matrices.  A
:class:`TrigScalar` is a quotient ``num / den`` with a scalar denominator
that has been certified to stay away from zero.  Matrix-valued quotients use
the same class with a matrix-shaped numerator over one common denominator
(``MatScalar`` is an alias).  :class:`TPoly` holds polynomial dependence on
an auxiliary interval variable ``t``.

All values are immutable; every operation returns a new object.
"""

import math
from fractions import Fraction

import numpy as np

from . import tolerances as _tol
from .errors import DimensionError, NonvanishingError, QuadratureError

TWO_PI = 2.0 * math.pi

_CHUNK = 1 << 15


def _as_int_array(freqs, dim):
    arr = np.asarray(freqs, dtype=np.int64)
    if arr.size == 0:
        return np.zeros((0, dim), dtype=np.int64)
    return arr.reshape(-1, dim)


def _unique_rows(freqs):
    """Lexicographically sorted unique rows: returns (first_index, inverse)."""
    m, dim = freqs.shape
    bits = 62 // max(dim, 1)
    half = 1 << (bits - 1)
    if bits >= 4 and np.all(np.abs(freqs) < half):
        keys = np.zeros(m, dtype=np.int64)
        for j in range(dim):
            keys = (keys << bits) + (freqs[:, j] + half)
        _, first, inverse = np.unique(keys, return_index=True, return_inverse=True)
        return first, inverse.reshape(-1)
    _, first, inverse = np.unique(freqs, axis=0, return_index=True, return_inverse=True)
    return first, inverse.reshape(-1)


def _canonical(dim, freqs, coefs, shape):
    if freqs.shape[0] == 0:
        return np.zeros((0, dim), dtype=np.int64), np.zeros((0,) + shape, dtype=complex)
    first, inverse = _unique_rows(freqs)
    m = first.shape[0]
    if m == freqs.shape[0]:
        out = np.empty_like(coefs)
        out[inverse] = coefs
    else:
        flat = coefs.reshape(coefs.shape[0], -1)
        out = np.empty((m, flat.shape[1]), dtype=complex)
        for e in range(flat.shape[1]):
            out[:, e] = np.bincount(inverse, flat[:, e].real, m) + 1j * np.bincount(inverse, flat[:, e].imag, m)
        out = out.reshape((m,) + shape)
    out[np.abs(out) < _tol.DROP_TOL] = 0.0
    flat = out.reshape(m, -1)
    keep = np.any(flat != 0, axis=1)
    return freqs[first][keep], out[keep]


def _is_scalar_shape(shape):
    return shape == () or shape == (1, 1)


def _product_shape(s1, s2):
    if s1 == ():
        return s2
    if s2 == ():
        return s1
    if s1 == (1, 1):
        return s2
    if s2 == (1, 1):
        return s1
    if len(s1) != 2 or len(s2) != 2 or s1[1] != s2[0]:
        raise DimensionError(f"cannot multiply value shapes {s1} and {s2}")
    return (s1[0], s2[1])


def _outer_coefs(c1, s1, c2, s2):
    m1, m2 = c1.shape[0], c2.shape[0]
    if s1 == () and s2 == ():
        return (c1[:, None] * c2[None, :]).reshape(m1 * m2)
    if s1 == ():
        return (c1[:, None, None, None] * c2[None]).reshape((m1 * m2,) + s2)
    if s2 == ():
        return (c1[:, None] * c2[None, :, None, None]).reshape((m1 * m2,) + s1)
    if s1 == (1, 1):
        return (c1[:, None, :1, :1] * c2[None]).reshape((m1 * m2,) + s2)
    if s2 == (1, 1):
        return (c1[:, None] * c2[None, :, :1, :1]).reshape((m1 * m2,) + s1)
    out = np.matmul(c1[:, None], c2[None])
    return out.reshape((m1 * m2, s1[0], s2[1]))


class TrigPoly:
    """Finite Fourier series on T^n with scalar or matrix coefficients.

    Terms are kept sorted lexicographically by frequency and coefficients of
    modulus below the drop tolerance are discarded after every operation.
    """

    __slots__ = ("dim", "shape", "freqs", "coefs")

    def __init__(self, dim, freqs=(), coefs=(), shape=()):
        dim = int(dim)
        if dim < 1:
            raise DimensionError("torus dimension must be at least 1")
        shape = tuple(shape)
        freqs = _as_int_array(freqs, dim)
        coefs = np.asarray(coefs, dtype=complex).reshape((freqs.shape[0],) + shape)
        freqs, coefs = _canonical(dim, freqs, coefs, shape)
        self._set(dim, shape, freqs, coefs)

    def _set(self, dim, shape, freqs, coefs):
        freqs.setflags(write=False)
        coefs.setflags(write=False)
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "coefs", coefs)

    def __setattr__(self, name, value):
        raise AttributeError("TrigPoly is immutable")

    @classmethod
    def _raw(cls, dim, freqs, coefs, shape):
        obj = object.__new__(cls)
        obj._set(dim, shape, *_canonical(dim, freqs, coefs, shape))
        return obj

    # ------------------------------------------------------------------ ctors
    @classmethod
    def zero(cls, dim, shape=()):
        return cls(dim, shape=shape)

    @classmethod
    def constant(cls, dim, value, shape=None):
        value = np.asarray(value, dtype=complex)
        if shape is None:
            shape = value.shape
        value = np.broadcast_to(value, shape)
        return cls(dim, np.zeros((1, dim), dtype=np.int64), value[None], shape)

    @classmethod
    def one(cls, dim):
        return cls.constant(dim, 1.0)

    @classmethod
    def identity(cls, dim, rank):
        return cls.constant(dim, np.eye(rank))

    @classmethod
    def exp(cls, dim, k, coef=1.0):
        """``coef * e^{2 pi i k.x}``."""
        return cls(dim, [list(k)], [coef])

    @classmethod
    def from_terms(cls, dim, terms, shape=()):
        terms = list(terms.items()) if isinstance(terms, dict) else list(terms)
        freqs = [list(k) for k, _ in terms]
        coefs = [np.asarray(c, dtype=complex) for _, c in terms]
        if not terms:
            return cls.zero(dim, shape)
        return cls(dim, freqs, np.stack(coefs), shape)

    @classmethod
    def sin(cls, dim, axis, m=1, amp=1.0):
        """``amp * sin(2 pi m x_axis)``."""
        k = [0] * dim
        k[axis] = m
        kn = [-c for c in k]
        return cls(dim, [k, kn], [amp / 2j, -amp / 2j])

    @classmethod
    def cos(cls, dim, axis, m=1, amp=1.0):
        """``amp * cos(2 pi m x_axis)``."""
        k = [0] * dim
        k[axis] = m
        kn = [-c for c in k]
        return cls(dim, [k, kn], [amp / 2, amp / 2])

    @classmethod
    def from_entries(cls, rows):
        """Assemble a matrix-valued polynomial from a grid of scalar ones."""
        rows = [list(r) for r in rows]
        nr, nc = len(rows), len(rows[0])
        dim = rows[0][0].dim
        freqs, coefs = [], []
        for i, row in enumerate(rows):
            if len(row) != nc:
                raise DimensionError("ragged matrix entries")
            for j, p in enumerate(row):
                if p.dim != dim or p.shape != ():
                    raise DimensionError("matrix entries must be scalar polys on one torus")
                block = np.zeros((p.freqs.shape[0], nr, nc), dtype=complex)
                block[:, i, j] = p.coefs
                freqs.append(p.freqs)
                coefs.append(block)
        return cls._raw(dim, np.concatenate(freqs), np.concatenate(coefs), (nr, nc))

    # ------------------------------------------------------------- predicates
    @property
    def nterms(self):
        return self.freqs.shape[0]

    def is_zero(self):
        return self.nterms == 0

    def is_constant(self):
        return self.nterms == 0 or (self.nterms == 1 and not self.freqs[0].any())

    def constant_term(self):
        """The k = 0 coefficient (the integral over the unit-volume torus)."""
        hits = np.flatnonzero(~self.freqs.any(axis=1))
        if hits.size == 0:
            return np.zeros(self.shape, dtype=complex) if self.shape else 0j
        value = self.coefs[hits[0]]
        return value.copy() if self.shape else complex(value)

    def bandwidth(self):
        """Per-axis maximal |k_j|."""
        if self.nterms == 0:
            return np.zeros(self.dim, dtype=np.int64)
        return np.abs(self.freqs).max(axis=0)

    def active_axes(self):
        return [int(j) for j in np.flatnonzero(self.bandwidth())]

    def bound(self):
        """Upper bound for sup_x of the largest entry modulus."""
        if self.nterms == 0:
            return 0.0
        return float(np.abs(self.coefs).sum(axis=0).max())

    def equals(self, other):
        return (
            self.dim == other.dim
            and self.shape == other.shape
            and np.array_equal(self.freqs, other.freqs)
            and np.array_equal(self.coefs, other.coefs)
        )

    # -------------------------------------------------------------- arithmetic
    def _check(self, other):
        if self.dim != other.dim:
            raise DimensionError(f"torus dimensions differ: {self.dim} vs {other.dim}")

    def __add__(self, other):
        if not isinstance(other, TrigPoly):
            if self.shape != ():
                return NotImplemented
            other = TrigPoly.constant(self.dim, other)
        self._check(other)
        if self.shape != other.shape:
            raise DimensionError(f"cannot add value shapes {self.shape} and {other.shape}")
        return TrigPoly._raw(
            self.dim,
            np.concatenate([self.freqs, other.freqs]),
            np.concatenate([self.coefs, other.coefs]),
            self.shape,
        )

    __radd__ = __add__

    def __neg__(self):
        obj = object.__new__(TrigPoly)
        obj._set(self.dim, self.shape, self.freqs.copy(), -self.coefs)
        return obj

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, TrigPoly):
            return self.mul(other)
        if isinstance(other, np.ndarray):
            return NotImplemented
        c = complex(other)
        if c == 0:
            return TrigPoly.zero(self.dim, self.shape)
        return TrigPoly._raw(self.dim, self.freqs.copy(), self.coefs * c, self.shape)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * (1.0 / complex(other))

    def mul(self, other):
        """Pointwise product; matrix product when both values are matrices."""
        self._check(other)
        shape = _product_shape(self.shape, other.shape)
        if self.nterms == 0 or other.nterms == 0:
            return TrigPoly.zero(self.dim, shape)
        freqs = (self.freqs[:, None, :] + other.freqs[None, :, :]).reshape(-1, self.dim)
        coefs = _outer_coefs(self.coefs, self.shape, other.coefs, other.shape)
        return TrigPoly._raw(self.dim, freqs, coefs, shape)

    def trace_mul(self, other):
        """``Tr(self * other)`` without forming the full matrix product."""
        self._check(other)
        if self.shape == () or other.shape == ():
            return self.mul(other).trace()
        if self.nterms == 0 or other.nterms == 0:
            return TrigPoly.zero(self.dim)
        freqs = (self.freqs[:, None, :] + other.freqs[None, :, :]).reshape(-1, self.dim)
        coefs = np.einsum("aij,bji->ab", self.coefs, other.coefs).reshape(-1)
        return TrigPoly._raw(self.dim, freqs, coefs, ())

    def matmul_const(self, left=None, right=None):
        """``left @ self @ right`` for constant matrices."""
        c = self.coefs
        shape = self.shape
        if left is not None:
            left = np.asarray(left, dtype=complex)
            c = np.einsum("ij,ajk->aik", left, c)
        if right is not None:
            right = np.asarray(right, dtype=complex)
            c = np.einsum("aij,jk->aik", c, right)
        if c.shape[1:] != shape:
            shape = c.shape[1:]
        return TrigPoly._raw(self.dim, self.freqs.copy(), c, shape)

    def conj(self):
        """Pointwise complex conjugate (entries are not transposed)."""
        return TrigPoly._raw(self.dim, -self.freqs, np.conj(self.coefs), self.shape)

    def transpose(self):
        if len(self.shape) != 2:
            return self
        return TrigPoly._raw(self.dim, self.freqs.copy(), np.swapaxes(self.coefs, 1, 2), self.shape[::-1])

    def H(self):
        """Pointwise conjugate transpose."""
        return self.conj().transpose()

    def trace(self):
        if self.shape == ():
            return self
        return TrigPoly._raw(self.dim, self.freqs.copy(), np.trace(self.coefs, axis1=1, axis2=2), ())

    def entry(self, i, j):
        if self.shape == ():
            if i or j:
                raise IndexError("scalar polynomial has only entry (0, 0)")
            return self
        return TrigPoly._raw(self.dim, self.freqs.copy(), self.coefs[:, i, j], ())

    def as_matrix(self, rank):
        """View a scalar polynomial as ``self * identity(rank)``."""
        if self.shape != ():
            return self
        c = self.coefs[:, None, None] * np.eye(rank)[None]
        return TrigPoly._raw(self.dim, self.freqs.copy(), c, (rank, rank))

    def deriv(self, j):
        """Exact partial derivative along axis ``j`` (0-based)."""
        if not 0 <= j < self.dim:
            raise DimensionError(f"axis {j} out of range for T^{self.dim}")
        factor = 2j * math.pi * self.freqs[:, j].astype(float)
        factor = factor.reshape((-1,) + (1,) * len(self.shape))
        return TrigPoly._raw(self.dim, self.freqs.copy(), self.coefs * factor, self.shape)

    def pullback(self, matrix):
        """Compose with the torus endomorphism x -> M x (M an integer matrix)."""
        m = np.asarray(matrix, dtype=np.int64)
        if m.shape != (self.dim, self.dim):
            raise DimensionError("pullback matrix must be n x n")
        return TrigPoly._raw(self.dim, self.freqs @ m, self.coefs.copy(), self.shape)

    # ------------------------------------------------------------- evaluation
    def eval(self, x):
        """Evaluate at a point (shape (n,)) or a batch of points (shape (P, n))."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        pts = x.reshape(-1, self.dim)
        out = np.zeros((pts.shape[0],) + self.shape, dtype=complex)
        if self.nterms:
            flat = self.coefs.reshape(self.nterms, -1)
            for s in range(0, pts.shape[0], _CHUNK):
                phase = np.exp(2j * math.pi * (pts[s:s + _CHUNK] @ self.freqs.T.astype(float)))
                out[s:s + _CHUNK] = (phase @ flat).reshape((-1,) + self.shape)
        if single:
            return out[0] if self.shape else complex(out[0])
        return out

    def integrate(self):
        return self.constant_term()

    # ------------------------------------------------------------------- json
    def to_json(self):
        if self.shape != ():
            rows, cols = self.shape
            return {
                "rows": rows,
                "cols": cols,
                "entries": [[self.entry(i, j).to_json() for j in range(cols)] for i in range(rows)],
            }
        return [
            {"k": [int(v) for v in k], "re": float(c.real), "im": float(c.imag)}
            for k, c in zip(self.freqs, self.coefs)
        ]

    @classmethod
    def from_json(cls, data, dim):
        if isinstance(data, dict) and "entries" in data:
            return cls.from_entries([[cls.from_json(e, dim) for e in row] for row in data["entries"]])
        if isinstance(data, (int, float)):
            return cls.constant(dim, float(data))
        if isinstance(data, dict) and ("re" in data or "im" in data) and "k" not in data:
            return cls.constant(dim, complex(data.get("re", 0.0), data.get("im", 0.0)))
        terms = []
        for term in data:
            k = term["k"]
            if len(k) != dim:
                raise DimensionError(f"frequency {k} has wrong length for T^{dim}")
            terms.append((k, complex(term.get("re", 0.0), term.get("im", 0.0))))
        return cls.from_terms(dim, terms)

    def __repr__(self):
        if self.nterms > 6:
            return f"TrigPoly(dim={self.dim}, shape={self.shape}, nterms={self.nterms})"
        parts = [f"{k.tolist()}: {c}" for k, c in zip(self.freqs, self.coefs)]
        return f"TrigPoly(dim={self.dim}, {{{', '.join(parts)}}})"


# ---------------------------------------------------------------------------
# grids


def _grid_points(dim, axes, counts, offset=0.0):
    """Uniform grid over the given axes (other coordinates fixed at zero)."""
    if not axes:
        return np.zeros((1, dim))
    axes_pts = [(np.arange(m) + offset) / m for m in counts]
    mesh = np.meshgrid(*axes_pts, indexing="ij")
    pts = np.zeros((mesh[0].size, dim))
    for a, g in zip(axes, mesh):
        pts[:, a] = g.reshape(-1)
    return pts


def verification_grid(dim, axes, budget=None, offset=0.1234567):
    """Shifted uniform grid over ``axes`` with at most ``budget`` points."""
    axes = list(axes)
    if not axes:
        return np.zeros((1, dim))
    return _grid_points(dim, axes, verification_counts(len(axes), budget), offset)


def verification_counts(naxes, budget=None):
    """Points per axis of the verification grid over ``naxes`` axes."""
    budget = budget or _tol.max_grid()
    per_axis = max(3, int(math.floor(budget ** (1.0 / naxes) + 1e-9)))
    while per_axis > 3 and per_axis ** naxes > budget:
        per_axis -= 1
    return [per_axis] * naxes


def grid_values(p, axes, counts, offset=0.0):
    """Values of a TrigPoly on the ``_grid_points`` grid via one inverse FFT.

    Frequencies alias modulo the grid size, which is exact at grid points.
    Frequencies on axes outside ``axes`` are ignored (those coordinates are 0).
    """
    npts = int(np.prod(counts))
    out_shape = (npts,) + p.shape
    if not p.nterms:
        return np.zeros(out_shape, dtype=complex)
    F = p.freqs[:, axes]
    m = np.asarray(counts)
    phase = np.exp(2j * math.pi * offset * (F / m).sum(axis=1))
    coefs = p.coefs * phase.reshape((-1,) + (1,) * len(p.shape))
    arr = np.zeros(tuple(counts) + p.shape, dtype=complex)
    np.add.at(arr, tuple((F % m).T), coefs)
    vals = np.fft.ifftn(arr, axes=tuple(range(len(counts)))) * npts
    return vals.reshape(out_shape)


def certify_lower_bound(p, margin=None):
    """Certified lower bound of |p| over the torus for a scalar TrigPoly.

    The bound is the minimum over a uniform grid of ``4 (2B + 1)`` points per
    active axis minus a first-order Lipschitz correction; the grid is doubled
    while the bound is inconclusive and the point budget allows.
    """
    margin = _tol.DEN_MARGIN if margin is None else margin
    if p.shape != ():
        raise DimensionError("denominators must be scalar")
    if p.is_constant():
        value = abs(p.constant_term())
        if value < margin:
            raise NonvanishingError(f"constant denominator {value} below margin {margin}")
        return value
    axes = p.active_axes()
    band = p.bandwidth()
    counts = [4 * (2 * int(band[a]) + 1) for a in axes]
    lips = [TWO_PI * float(np.sum(np.abs(p.freqs[:, a]) * np.abs(p.coefs))) for a in axes]
    budget = max(_tol.max_grid(), int(np.prod(counts)))
    while True:
        pts = _grid_points(p.dim, axes, counts)
        grid_min = float(np.abs(p.eval(pts)).min())
        if grid_min < margin:
            raise NonvanishingError(f"denominator reaches {grid_min:.3e} on the verification grid")
        slack = sum(lip / (2.0 * m) for lip, m in zip(lips, counts))
        lower = grid_min - slack
        if lower >= margin:
            return lower
        counts = [2 * m for m in counts]
        if int(np.prod(counts)) > budget * 64:
            raise NonvanishingError(
                f"could not certify denominator: grid min {grid_min:.3e}, slack {slack:.3e}"
            )


# ---------------------------------------------------------------------------
# quotients


class TrigScalar:
    """Quotient ``num / den`` of trigonometric polynomials.

    ``den`` is scalar and certified nonvanishing; ``den is None`` encodes the
    polynomial subring.  ``den_min`` is a certified lower bound of |den|.
    The numerator may be matrix-valued, in which case the object is a matrix
    of quotients over a common denominator.
    """

    __slots__ = ("num", "den", "den_min")

    def __init__(self, num, den=None, den_min=None):
        if not isinstance(num, TrigPoly):
            raise TypeError("numerator must be a TrigPoly")
        if den is not None:
            if den.dim != num.dim:
                raise DimensionError("numerator and denominator live on different tori")
            if den.shape != ():
                raise DimensionError("denominator must be scalar")
            if den.is_constant():
                c = den.constant_term()
                if abs(c) < _tol.DEN_MARGIN:
                    raise NonvanishingError("constant denominator vanishes")
                num, den, den_min = num * (1.0 / c), None, None
            elif den_min is None:
                den_min = certify_lower_bound(den)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)
        object.__setattr__(self, "den_min", 1.0 if den is None else float(den_min))

    def __setattr__(self, name, value):
        raise AttributeError("TrigScalar is immutable")

    # ------------------------------------------------------------------ ctors
    @classmethod
    def zero(cls, dim, shape=()):
        return cls(TrigPoly.zero(dim, shape))

    @classmethod
    def constant(cls, dim, value, shape=None):
        return cls(TrigPoly.constant(dim, value, shape))

    @classmethod
    def lift(cls, value, dim, shape=()):
        """Coerce numbers, polynomials and quotients into a TrigScalar."""
        if isinstance(value, TrigScalar):
            return value
        if isinstance(value, TrigPoly):
            return cls(value)
        arr = np.asarray(value, dtype=complex)
        if arr.shape == () and shape != ():
            arr = arr * np.eye(shape[0])
        return cls(TrigPoly.constant(dim, arr))

    @classmethod
    def from_entries(cls, rows):
        """Matrix of quotients brought over a common denominator."""
        rows = [list(r) for r in rows]
        dens = []
        for row in rows:
            for e in row:
                if e.den is not None and not any(e.den.equals(d) for d, _ in dens):
                    dens.append((e.den, e.den_min))
        if not dens:
            return cls(TrigPoly.from_entries([[e.num for e in row] for row in rows]))
        common = dens[0][0]
        common_min = dens[0][1]
        for d, dm in dens[1:]:
            common = common * d
            common_min *= dm
        nums = []
        for row in rows:
            out = []
            for e in row:
                factor = None
                for d, _ in dens:
                    if e.den is not None and d.equals(e.den):
                        continue
                    factor = d if factor is None else factor * d
                out.append(e.num if factor is None else e.num * factor)
            nums.append(out)
        return cls(TrigPoly.from_entries(nums), common, common_min)

    # ------------------------------------------------------------- properties
    @property
    def dim(self):
        return self.num.dim

    @property
    def shape(self):
        return self.num.shape

    def is_poly(self):
        return self.den is None

    def is_exact_zero(self):
        return self.num.is_zero()

    def bound(self):
        """Upper bound for the sup of the largest entry modulus."""
        return self.num.bound() / self.den_min

    def is_negligible(self, tol=None):
        tol = _tol.tol(_tol.ZERO_TOL) if tol is None else tol
        return self.bound() < tol

    def entry(self, i, j):
        return TrigScalar(self.num.entry(i, j), self.den, self.den_min)

    def _same_den(self, other):
        if self.den is None or other.den is None:
            return self.den is None and other.den is None
        return self.den is other.den or self.den.equals(other.den)

    # -------------------------------------------------------------- arithmetic
    def _coerce(self, other):
        if isinstance(other, TrigScalar):
            return other
        if isinstance(other, TrigPoly):
            return TrigScalar(other)
        return TrigScalar.lift(other, self.dim, self.shape)

    def __add__(self, other):
        other = self._coerce(other)
        if self._same_den(other):
            return TrigScalar(self.num + other.num, self.den, self.den_min)
        if self.den is None:
            return TrigScalar(self.num.mul(other.den) + other.num, other.den, other.den_min)
        if other.den is None:
            return TrigScalar(self.num + other.num.mul(self.den), self.den, self.den_min)
        return TrigScalar(
            self.num.mul(other.den) + other.num.mul(self.den),
            self.den.mul(other.den),
            self.den_min * other.den_min,
        )

    __radd__ = __add__

    def __neg__(self):
        return TrigScalar(-self.num, self.den, self.den_min)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (TrigScalar, TrigPoly)):
            return self.mul(self._coerce(other))
        return TrigScalar(self.num * other, self.den, self.den_min)

    def __rmul__(self, other):
        if isinstance(other, (TrigScalar, TrigPoly)):
            return self._coerce(other).mul(self)
        return TrigScalar(self.num * other, self.den, self.den_min)

    def __truediv__(self, other):
        if isinstance(other, (TrigScalar, TrigPoly)):
            return self.mul(self._coerce(other).inverse())
        return self * (1.0 / complex(other))

    def mul(self, other):
        num = self.num.mul(other.num)
        if self.den is None:
            return TrigScalar(num, other.den, other.den_min)
        if other.den is None:
            return TrigScalar(num, self.den, self.den_min)
        return TrigScalar(num, self.den.mul(other.den), self.den_min * other.den_min)

    def trace_mul(self, other):
        num = self.num.trace_mul(other.num)
        if self.den is None:
            return TrigScalar(num, other.den, other.den_min)
        if other.den is None:
            return TrigScalar(num, self.den, self.den_min)
        return TrigScalar(num, self.den.mul(other.den), self.den_min * other.den_min)

    def inverse(self):
        """Multiplicative inverse of a scalar quotient (numerator gets certified)."""
        if self.shape != ():
            raise DimensionError("only scalar quotients can be inverted")
        lower = certify_lower_bound(self.num)
        num = TrigPoly.one(self.dim) if self.den is None else self.den
        return TrigScalar(num, self.num, lower)

    def conj(self):
        den = None if self.den is None else self.den.conj()
        return TrigScalar(self.num.conj(), den, self.den_min)

    def transpose(self):
        return TrigScalar(self.num.transpose(), self.den, self.den_min)

    def H(self):
        den = None if self.den is None else self.den.conj()
        return TrigScalar(self.num.H(), den, self.den_min)

    def trace(self):
        return TrigScalar(self.num.trace(), self.den, self.den_min)

    def as_matrix(self, rank):
        return TrigScalar(self.num.as_matrix(rank), self.den, self.den_min)

    def matmul_const(self, left=None, right=None):
        return TrigScalar(self.num.matmul_const(left, right), self.den, self.den_min)

    def deriv(self, j):
        """Quotient-rule derivative along axis ``j``."""
        if self.den is None:
            return TrigScalar(self.num.deriv(j))
        num = self.num.deriv(j).mul(self.den) - self.num.mul(self.den.deriv(j))
        return TrigScalar(num, self.den.mul(self.den), self.den_min ** 2)

    def pullback(self, matrix):
        den = None if self.den is None else self.den.pullback(matrix)
        return TrigScalar(self.num.pullback(matrix), den, self.den_min)

    # ------------------------------------------------------------- evaluation
    def eval(self, x):
        value = self.num.eval(x)
        if self.den is None:
            return value
        d = self.den.eval(x)
        if self.shape and np.ndim(d):
            d = np.asarray(d).reshape((-1,) + (1,) * len(self.shape))
        return value / d

    def integrate(self, return_error=False):
        """Integral over the unit-volume torus.

        Exact (the k = 0 coefficient) on the polynomial subring; otherwise a
        periodic trapezoid rule refined by grid doubling.
        """
        if self.den is None:
            value = self.num.constant_term()
            return (value, 0.0) if return_error else value
        value, err = _trapezoid(self)
        return (value, err) if return_error else value

    # ------------------------------------------------------------------- json
    def to_json(self):
        return {
            "num": self.num.to_json(),
            "den": [{"k": [0] * self.dim, "re": 1.0, "im": 0.0}] if self.den is None else self.den.to_json(),
        }

    @classmethod
    def from_json(cls, data, dim):
        if isinstance(data, dict) and "num" in data:
            num = TrigPoly.from_json(data["num"], dim)
            den = TrigPoly.from_json(data["den"], dim) if data.get("den") is not None else None
            return cls(num, den)
        return cls(TrigPoly.from_json(data, dim))

    def __repr__(self):
        if self.den is None:
            return f"TrigScalar({self.num!r})"
        return f"TrigScalar(num={self.num!r}, den={self.den!r})"


MatScalar = TrigScalar


def trig_sum(items, dim, shape=()):
    """Sum of TrigScalars, grouping equal denominators before combining."""
    groups = []
    for item in items:
        for g in groups:
            if g[0]._same_den(item):
                g.append(item)
                break
        else:
            groups.append([item])
    total = None
    for g in groups:
        num = TrigPoly._raw(
            dim,
            np.concatenate([x.num.freqs for x in g]),
            np.concatenate([x.num.coefs for x in g]),
            g[0].shape,
        )
        part = TrigScalar(num, g[0].den, g[0].den_min)
        total = part if total is None else total + part
    if total is None:
        return TrigScalar.zero(dim, shape)
    return total


def _trapezoid(f):
    axes = sorted(set(f.num.active_axes()) | set(f.den.active_axes()))
    band = np.maximum(f.num.bandwidth(), f.den.bandwidth())
    counts = [max(16, 2 * int(band[a]) + 2) for a in axes]
    previous = None
    while True:
        total = int(np.prod(counts)) if counts else 1
        if total > _tol.QUAD_MAX_POINTS:
            raise QuadratureError(
                "trapezoid refinement hit the point cap without converging",
                value=previous,
                error=None,
            )
        pts = _grid_points(f.dim, axes, counts)
        value = np.mean(f.eval(pts), axis=0)
        if f.shape == ():
            value = complex(value)
        if previous is not None:
            err = float(np.max(np.abs(np.asarray(value) - np.asarray(previous))))
            if err < _tol.QUAD_TOL:
                return value, err
        previous = value
        counts = [2 * m for m in counts]
        if not axes:
            return value, 0.0


def integrate_torus(p, return_error=False):
    """Integral of a TrigPoly or TrigScalar over the unit-volume torus."""
    if isinstance(p, TrigPoly):
        value = p.constant_term()
        return (value, 0.0) if return_error else value
    return p.integrate(return_error=return_error)


def deriv(p, j):
    return p.deriv(j)


# ---------------------------------------------------------------------------
# polynomials in the interval variable t


def _is_zero(c):
    if isinstance(c, (int, float, complex, Fraction)):
        return c == 0
    check = getattr(c, "is_exact_zero", None)
    return bool(check()) if check is not None else False


class TPoly:
    """Polynomial ``sum_m c_m t^m`` with coefficients of any additive type."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        coeffs = list(coeffs)
        while coeffs and _is_zero(coeffs[-1]):
            coeffs.pop()
        object.__setattr__(self, "coeffs", tuple(coeffs))

    def __setattr__(self, name, value):
        raise AttributeError("TPoly is immutable")

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def is_exact_zero(self):
        return not self.coeffs

    def __add__(self, other):
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        return TPoly([x + y for x, y in zip(a, b)] + list(a[len(b):]))

    def __neg__(self):
        return TPoly([-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def scale(self, factor):
        return TPoly([c * factor for c in self.coeffs])

    def mul(self, other, product=lambda x, y: x * y):
        if not self.coeffs or not other.coeffs:
            return TPoly([])
        out = [None] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, x in enumerate(self.coeffs):
            for j, y in enumerate(other.coeffs):
                term = product(x, y)
                out[i + j] = term if out[i + j] is None else out[i + j] + term
        return TPoly(out)

    def deriv(self):
        return TPoly([c * m for m, c in enumerate(self.coeffs)][1:])

    def at(self, t):
        if not self.coeffs:
            return 0
        acc = self.coeffs[-1]
        for c in reversed(self.coeffs[:-1]):
            acc = acc * t + c
        return acc

    def integrate01(self):
        """Exact integral over [0, 1]: sum_m c_m / (m + 1)."""
        if not self.coeffs:
            return 0
        acc = None
        for m, c in enumerate(self.coeffs):
            term = c * (1.0 / (m + 1))
            acc = term if acc is None else acc + term
        return acc
