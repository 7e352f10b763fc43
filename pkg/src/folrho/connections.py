"""Connections on globally trivialized bundles over T^n.

A connection is ``d + A`` with ``A`` a matrix-valued 1-form.  Partial
connections are full connections remembered only along a foliation; the
torsor of extensions is exposed through :func:`extend` rather than searched.
"""

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import tolerances as _tol
from .errors import DimensionError, ValidationError, VerificationError
from .forms import Form, Foliation, TForm, bracket, lift, pair
from .trigcalc import TPoly, TrigScalar


@dataclass(frozen=True)
class Connection:
    """``d + A`` on the trivial rank-r bundle over T^n."""

    A: Form
    real: bool = False

    def __post_init__(self):
        if self.A.degree != 1:
            raise DimensionError("connection form must have degree 1")

    @property
    def dim(self):
        return self.A.dim

    @property
    def rank(self):
        return self.A.rank

    @classmethod
    def trivial(cls, dim, rank=1, real=True):
        return cls(Form.zero(dim, 1, rank), real)

    @classmethod
    def flat_s1(cls, r):
        """Flat line bundle on the circle with holonomy exp(2 pi i r)."""
        return cls(Form.dx(1, 0, coef=-2j * np.pi * r), real=False)

    def curvature(self):
        """``R = dA + A ^ A``."""
        return self.A.d() + self.A.wedge(self.A)

    def direct_sum(self, other):
        return Connection(self.A.direct_sum(other.A), self.real and other.real)

    def gauge(self, g):
        """Constant gauge transformation: ``g^-1 A g``."""
        g = np.asarray(g, dtype=complex)
        return Connection(self.A.matmul_const(np.linalg.inv(g), g), False)

    def pullback(self, matrix):
        return Connection(self.A.pullback(matrix), self.real)

    def __add__(self, form):
        """Affine action of End(V)-valued 1-forms."""
        return Connection(self.A + form, self.real)

    def to_json(self):
        return {"rank": self.rank, "A": self.A.to_json(), "real": self.real}

    @classmethod
    def from_json(cls, data):
        try:
            A = Form.from_json(data["A"])
        except KeyError as exc:
            raise ValidationError("connection needs an 'A' form") from exc
        if "rank" in data and int(data["rank"]) != A.rank:
            raise ValidationError(f"declared rank {data['rank']} differs from form rank {A.rank}")
        return cls(A, bool(data.get("real", False)))


@dataclass(frozen=True)
class HermMetric:
    """Constant hermitian metric on the trivial bundle."""

    H: np.ndarray

    def __post_init__(self):
        H = np.atleast_2d(np.asarray(self.H, dtype=complex))
        if H.shape[0] != H.shape[1]:
            raise ValidationError("metric must be square")
        if not np.allclose(H, H.conj().T, atol=1e-12):
            raise ValidationError("metric must be hermitian")
        if np.linalg.eigvalsh(H).min() <= 0:
            raise ValidationError("metric must be positive definite")
        object.__setattr__(self, "H", H)

    @classmethod
    def identity(cls, rank):
        return cls(np.eye(rank))

    @property
    def rank(self):
        return self.H.shape[0]

    def inner(self, phi, psi):
        """Pointwise ``h(phi, psi) = phi^H H psi`` for vectors of values."""
        return np.einsum("...i,ij,...j->...", np.conj(phi), self.H, psi)


def _check_rank(c, h):
    if c.rank != h.rank:
        raise DimensionError(f"metric rank {h.rank} differs from bundle rank {c.rank}")


def adjoint(c, h):
    """Metric adjoint connection: ``A* = -H^-1 A^H H``."""
    _check_rank(c, h)
    A_dag = c.A.H()
    if c.rank == 1:
        return Connection(-A_dag, c.real)
    return Connection(-A_dag.matmul_const(np.linalg.inv(h.H), h.H), c.real)


def unitarize(c, h):
    """``(A + A*) / 2``, self-adjoint with respect to ``h``."""
    return Connection((c.A + adjoint(c, h).A).scale(0.5), c.real)


def is_unitary(c, h, tol=None):
    return (c.A - adjoint(c, h).A).is_zero(tol)


class PartialConnection:
    """Restriction of ``base`` to the leaves of ``foliation``; flatness verified."""

    def __init__(self, base, foliation, verify=True):
        if base.dim != foliation.dim:
            raise DimensionError("connection and foliation on different tori")
        self.base = base
        self.foliation = foliation
        self.residual = 0.0
        if verify:
            self.residual = self.flatness_residual()
            if self.residual > _tol.tol(_tol.ZERO_TOL):
                raise VerificationError(
                    f"partial connection is not flat: residual {self.residual:.3e}", self.residual
                )

    @property
    def rank(self):
        return self.base.rank

    def flatness_residual(self):
        R = self.base.curvature()
        worst = 0.0
        for X, Y in combinations(self.foliation.frame, 2):
            worst = max(worst, R.contract(Y).contract(X).sup())
        return worst


def extension_residual(c, pc):
    if c.rank != pc.rank or c.dim != pc.base.dim:
        raise DimensionError("connection and partial connection do not match")
    diff = c.A - pc.base.A
    return max((diff.contract(X).sup() for X in pc.foliation.frame), default=0.0)


def is_extension(c, pc, tol=None):
    """True when ``c`` agrees with the partial connection along every frame field."""
    tol = _tol.tol(_tol.ZERO_TOL) if tol is None else tol
    diff = c.A - pc.base.A
    return all(diff.contract(X).is_zero(tol) for X in pc.foliation.frame)


def extend(pc, correction):
    """Extension ``base + correction``; the correction must annihilate the foliation."""
    c = pc.base + correction
    if not is_extension(c, pc):
        raise ValidationError("correction does not vanish on the foliation")
    return c


class CodimOneData:
    """Codimension-one foliation ``ker kappa`` with ``d kappa = kappa ^ omega`` and ``kappa(N) = 1``."""

    def __init__(self, kappa, omega, N, verify=True):
        if kappa.degree != 1 or omega.degree != 1 or kappa.rank != 1 or omega.rank != 1:
            raise DimensionError("kappa and omega must be scalar 1-forms")
        if kappa.dim != omega.dim or len(N) != kappa.dim:
            raise DimensionError("kappa, omega and N must live on one torus")
        self.kappa = kappa
        self.omega = omega
        self.N = tuple(lift(v, kappa.dim) for v in N)
        self.residuals = {}
        self.foliation = Foliation.from_kappa(kappa, verify=verify)
        if verify:
            self.verify()

    @property
    def dim(self):
        return self.kappa.dim

    def verify(self):
        tol = _tol.tol(_tol.ZERO_TOL)
        res = {
            "kappa_real": (self.kappa - self.kappa.conj()).sup(),
            "omega_real": (self.omega - self.omega.conj()).sup(),
            "integrability": self.kappa.wedge(self.kappa.d()).sup(),
            "structure": (self.kappa.d() - self.kappa.wedge(self.omega)).sup(),
            "normalization": _scalar_sup(pair(self.kappa, self.N) - 1.0),
        }
        self.residuals = res
        for name, value in res.items():
            if value > tol:
                raise ValidationError(f"codim-one data fails {name} check: residual {value:.3e}", residual=value)
        return res

    def to_json(self):
        return {
            "kappa": self.kappa.to_json(),
            "omega": self.omega.to_json(),
            "N": [v.to_json() for v in self.N],
        }

    @classmethod
    def from_json(cls, data, verify=True):
        try:
            kappa = Form.from_json(data["kappa"])
            omega = Form.from_json(data["omega"])
            N = [TrigScalar.from_json(v, kappa.dim) for v in data["N"]]
        except KeyError as exc:
            raise ValidationError(f"codim1 data missing {exc}") from exc
        return cls(kappa, omega, N, verify)


def _scalar_sup(c):
    from .forms import grid_sup
    return grid_sup(c)


def bott_residual(cd):
    """Sup over frame fields of ``kappa([X, N]) - omega(X)``."""
    worst = 0.0
    for X in cd.foliation.frame:
        value = pair(cd.kappa, bracket(X, cd.N)) - pair(cd.omega, X)
        worst = max(worst, _scalar_sup(value))
    return worst


def bott_connection(cd):
    """Rank-one connection on the normal bundle, trivialized by ``N``."""
    residual = bott_residual(cd)
    if residual > _tol.tol(1e-8):
        raise VerificationError(f"Bott connection check failed: residual {residual:.3e}", residual)
    return Connection(cd.omega, real=True)


def bott_partial(cd):
    """The flat Bott partial connection along ``ker kappa``."""
    return PartialConnection(bott_connection(cd), cd.foliation)


# ---------------------------------------------------------------------------
# the cylinder


LINEAR = TPoly([0.0, 1.0])
CUBIC = TPoly([0.0, 0.0, 3.0, -2.0])


@dataclass(frozen=True)
class TConnection:
    """``A_t = A_0 + phi(t) (A_1 - A_0)`` on the pullback bundle over [0, 1] x T^n."""

    c0: Connection
    c1: Connection
    schedule: TPoly = LINEAR

    @property
    def dim(self):
        return self.c0.dim

    @property
    def rank(self):
        return self.c0.rank

    def form(self):
        """Connection form as a TForm (no dt-component)."""
        diff = self.c1.A - self.c0.A
        coeffs = [diff.scale(c) for c in self.schedule.coeffs]
        if coeffs:
            coeffs[0] = coeffs[0] + self.c0.A
        else:
            coeffs = [self.c0.A]
        return TForm(self.dim, 1, self.rank, coeffs, [])

    def at(self, t):
        return Connection(self.form().restrict(t), self.c0.real and self.c1.real)

    def curvature(self):
        """``(dA_t + A_t ^ A_t) + dt ^ phi'(t) (A_1 - A_0)``."""
        At = self.form()
        return At.d() + At.wedge(At)


def interpolate(c0, c1, schedule=None):
    if c0.dim != c1.dim or c0.rank != c1.rank:
        raise DimensionError("interpolation needs equal torus and rank")
    return TConnection(c0, c1, LINEAR if schedule is None else schedule)


# ---------------------------------------------------------------------------
# framings


@dataclass(frozen=True)
class FramingData:
    """Flat connection on a stabilized trivial bundle of rank ``m``."""

    A: Form
    residual: float = field(default=0.0, compare=False)

    def __post_init__(self):
        if self.A.degree != 1:
            raise DimensionError("framing connection form must have degree 1")
        residual = Connection(self.A).curvature().sup()
        if residual > _tol.tol(_tol.ZERO_TOL):
            raise VerificationError(f"framing connection is not flat: residual {residual:.3e}", residual)
        object.__setattr__(self, "residual", residual)

    @property
    def rank(self):
        return self.A.rank

    @property
    def connection(self):
        return Connection(self.A, real=True)

    @classmethod
    def trivial(cls, dim, rank=1):
        return cls(Form.zero(dim, 1, rank))
