"""The invariant rho and its relatives on circles and foliated tori.

On the circle the full invariant is available through the Dirac spectrum.
On higher-dimensional tori only the imaginary part and the characteristic
form corrections are computed; the Levi-Civita connection of a flat torus
is trivial, so its A-hat form is the constant 1 and is recorded as such.
"""

import math
from dataclasses import dataclass, field
from typing import Dict

from . import tolerances as _tol
from .charforms import (
    CharForm,
    ahat_form,
    chern_character,
    chern_character_filtered,
    transgress_ahat,
    transgress_ch,
)
from .connections import (
    CodimOneData,
    Connection,
    FramingData,
    HermMetric,
    adjoint,
    bott_connection,
    bott_partial,
    is_extension,
    unitarize,
)
from .errors import DimensionError, ValidationError, VerificationError
from .forms import DD_MINUS, Form, GradedFormSequence, dd_wedge
from .spectral import dirac_s1_spectrum, eta_arith, eta_numeric, frac

TWO_PI_I = 2j * math.pi

#: A-hat form of the Levi-Civita connection of a flat torus metric
AHAT_LC = 1.0


def top_pairing(a, b, dim):
    """``int_M (a ^ b)_{top}`` for two char forms (or graded sequences)."""
    sa = a.seq if isinstance(a, CharForm) else a
    sb = b.seq if isinstance(b, CharForm) else b
    total = 0j
    for fa in sa.entries.values():
        rest = dim - fa.degree
        if rest < 0:
            continue
        fb = sb.degree_component(rest) if (rest - sb.total_degree) % 2 == 0 else None
        if fb is None or fb.is_exact_zero():
            continue
        prod = fa.wedge(fb)
        if prod.rank > 1:
            prod = prod.trace()
        total += prod.integrate_top()
    return total


def cz_normalize(value):
    """Representative of a C/Z value with real part in [0, 1)."""
    value = complex(value)
    return complex(frac(value.real), value.imag)


@dataclass(frozen=True)
class RhoResult:
    value: complex
    xi: float
    correction_framing: complex
    correction_unitarization: complex
    method: str = "closed-form"
    provenance: Dict[str, object] = field(default_factory=dict, compare=False)

    @property
    def real_part(self):
        return self.value.real

    @property
    def imag_part(self):
        return self.value.imag

    def to_json(self):
        return {
            "value": {"re": self.value.real, "im": self.value.imag},
            "real_part": self.value.real,
            "imag_part": self.value.imag,
            "method": self.method,
            "provenance": {
                "xi": self.xi,
                "correction_framing": {"re": self.correction_framing.real, "im": self.correction_framing.imag},
                "correction_unitarization": {
                    "re": self.correction_unitarization.real,
                    "im": self.correction_unitarization.imag,
                },
                **{k: v for k, v in sorted(self.provenance.items())},
            },
        }


def framing_correction(framing, bundle):
    """``int_M A~(LC, s) ^ ch(nabla)``; the Levi-Civita connection is trivial."""
    lc = Connection.trivial(bundle.dim, framing.rank, real=True)
    at = transgress_ahat(lc, framing.connection)
    return top_pairing(at, chern_character(bundle), bundle.dim)


def unitarization_correction(bundle, h):
    """``int_M A-hat(LC) ^ ch~(nabla, nabla^u)`` with the flat-torus A-hat = 1."""
    cu = unitarize(bundle, h)
    tr = transgress_ch(bundle, cu)
    return AHAT_LC * top_pairing(tr, GradedFormSequence(bundle.dim, 0, {0: Form.one(bundle.dim)}), bundle.dim)


def rho_s1(r, framing=None, method="closed-form", check_tol=1e-12):
    """rho of the circle with the flat line bundle of holonomy exp(2 pi i r)."""
    spec = dirac_s1_spectrum(r, bounding=True)
    if method == "closed-form":
        eta = eta_arith(spec.a, spec.sigma)
    elif method == "zeta-numeric":
        eta = eta_numeric(spec)
    else:
        raise ValidationError(f"unknown method {method}")
    framing = framing or FramingData.trivial(1)
    if framing.A.dim != 1:
        raise DimensionError("framing must live on the circle")
    bundle = Connection.flat_s1(r)
    h = HermMetric.identity(1)
    cf = framing_correction(framing, bundle)
    cu = unitarization_correction(bundle, h)
    if abs(cf) >= check_tol or abs(cu) >= check_tol:
        raise VerificationError(
            f"circle corrections do not vanish: framing {abs(cf):.3e}, unitarization {abs(cu):.3e}",
            max(abs(cf), abs(cu)),
        )
    value = cz_normalize(eta.xi - cf + cu)
    prov = {"eta0": eta.eta0, "kernel_dim": eta.kernel_dim, "ahat_lc": AHAT_LC, "holonomy_r": r}
    return RhoResult(value, eta.xi, complex(cf), complex(cu), eta.method, prov)


def _check_odd(dim):
    if dim % 2 == 0:
        raise DimensionError(f"imaginary part needs an odd-dimensional torus, got T^{dim}")


def rho_imag(pc, c, h, cF=None, real_tol=None):
    """``int_M A-hat(cF) ^ ch~(c, c*) / 2``; purely imaginary."""
    _check_odd(c.dim)
    if pc is not None and not is_extension(c, pc):
        raise ValidationError("bundle connection does not extend the partial connection")
    tr = transgress_ch(c, adjoint(c, h)).scale(0.5)
    if cF is None:
        ah = GradedFormSequence(c.dim, 0, {0: Form.one(c.dim)})
    else:
        ah = ahat_form(cF)
    value = top_pairing(ah, tr, c.dim)
    real_tol = _tol.tol(_tol.ZERO_TOL) if real_tol is None else real_tol
    if abs(value.real) > real_tol:
        raise VerificationError(f"imaginary part has real component {value.real:.3e}", abs(value.real))
    return value


# ---------------------------------------------------------------------------
# Godbillon-Vey


def gv_constant_literal(n):
    """``2 (-1)^{n+1} / ((2 pi i)^{n+1} n!)``."""
    return 2 * (-1) ** (n + 1) / (TWO_PI_I ** (n + 1) * math.factorial(n))


def gv_constant_derived(n):
    """``2 (-1)^{n+1} / ((2 pi i)^{n+1} (n+1)!)``: the value forced by the t-integral."""
    return 2 * (-1) ** (n + 1) / (TWO_PI_I ** (n + 1) * math.factorial(n + 1))


def _check_gv_degree(n, dim):
    if n % 2:
        raise ValidationError(f"n must be even, got {n}")
    if dim < 2 * n + 1:
        raise DimensionError(f"need dimension at least {2 * n + 1}, got {dim}")


def gv_form(cd_or_omega, n):
    """``omega ^ (d omega)^n``."""
    omega = cd_or_omega.omega if isinstance(cd_or_omega, CodimOneData) else cd_or_omega
    out = omega
    domega = omega.d()
    for _ in range(n):
        out = out.wedge(domega)
    return out


@dataclass(frozen=True)
class GVCheck:
    residual: float
    lhs_sup: float
    rhs_sup: float
    constant: complex

    def to_json(self):
        return {
            "residual": self.residual,
            "lhs_sup": self.lhs_sup,
            "rhs_sup": self.rhs_sup,
            "constant": {"re": self.constant.real, "im": self.constant.imag},
        }


def gv_chernweil_identity(omega, n, constant=None):
    """Compare ``ch~_{2n+2}(d + omega, d - omega)`` with ``constant * omega ^ (d omega)^n``."""
    _check_gv_degree(n, omega.dim)
    constant = gv_constant_literal(n) if constant is None else constant
    plus = Connection(omega, real=True)
    minus = Connection(-omega, real=True)
    lhs = transgress_ch(plus, minus).component(2 * n + 1)
    rhs = gv_form(omega, n).scale(constant)
    return GVCheck((lhs - rhs).sup(), lhs.sup(), rhs.sup(), complex(constant))


def rho_imag_gv(cd, n):
    """Imaginary part for V = normal bundle with the Bott connection and h = 1."""
    _check_gv_degree(n, cd.dim)
    if cd.dim != 2 * n + 1:
        raise DimensionError(f"need a torus of dimension {2 * n + 1}")
    cF = bott_connection(cd)
    pc = bott_partial(cd)
    return rho_imag(pc, cF, HermMetric.identity(1), cF)


# ---------------------------------------------------------------------------
# relative e-invariant and bordism integrand


def e_relative(s1, s0, u_ch):
    """``[int_M A~(s1, s0) ^ ch(u)]`` in C/Z."""
    if s1.rank != s0.rank or s1.A.dim != s0.A.dim:
        raise DimensionError("framings must share torus and rank")
    at = transgress_ahat(s1.connection, s0.connection)
    return cz_normalize(top_pairing(at, u_ch, s1.A.dim))


def rho_framing_difference(r, s1, s0):
    """``rho(s1) - rho(s0)`` on the circle family, in C/Z."""
    a = rho_s1(r, s1)
    b = rho_s1(r, s0)
    return cz_normalize(a.value - b.value)


def ahat_filtered(cF, foliation):
    """A-hat of a normal-bundle connection as a DD_MINUS sequence."""
    ah = ahat_form(cF)
    seq = GradedFormSequence(cF.dim, 0, dict(ah.seq.entries), DD_MINUS, foliation)
    seq.check_filtration()
    return seq


def bordism_integrand(pc, c, cF=None, tol=None):
    """``int_M A-hat^-(cF) ^ ch^-(c)`` through the DD_MINUS product."""
    dim = c.dim
    if dim % 2:
        raise DimensionError("bordism integrand needs an even-dimensional torus")
    foliation = pc.foliation
    ch = chern_character_filtered(c, pc).seq
    if cF is None:
        ah = GradedFormSequence(dim, 0, {0: Form.one(dim)}, DD_MINUS, foliation)
    else:
        ah = ahat_filtered(cF, foliation)
    prod = dd_wedge(ah, ch)
    top = prod.entry(dim // 2)
    if top.rank > 1:
        top = top.trace()
    value = top.integrate_top()
    if 2 * foliation.codim < dim:
        tol = _tol.tol(_tol.ZERO_TOL) if tol is None else tol
        if not top.is_zero(tol):
            raise VerificationError(
                "top-degree integrand must vanish when 2 codim < dim", top.sup()
            )
    return complex(value)


def bordism_integrand_form(pc, c, cF=None):
    """The top-degree integrand itself (for inspection)."""
    dim = c.dim
    ch = chern_character_filtered(c, pc).seq
    if cF is None:
        ah = GradedFormSequence(dim, 0, {0: Form.one(dim)}, DD_MINUS, pc.foliation)
    else:
        ah = ahat_filtered(cF, pc.foliation)
    return dd_wedge(ah, ch).entry(dim // 2)
