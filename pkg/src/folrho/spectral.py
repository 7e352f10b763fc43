"""eta and xi invariants of arithmetic-progression spectra.

The spectrum ``{sigma (n + a) : n in Z}`` with ``0 < a <= 1`` has

    eta(s) = sigma^{-s} [zeta_H(s, a) - zeta_H(s, 1 - a)]      (0 < a < 1)

and ``a = 1`` contains the eigenvalue 0 once with a symmetric remainder.
The Hurwitz zeta function is evaluated by Euler-Maclaurin summation, which
is itself an analytic continuation and can therefore be used at s = 0.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Tuple

import numpy as np

from .errors import ConvergenceError, ValidationError

EM_TERMS = 8
EM_TOL = 1e-14
XI_TOL = 1e-12


@lru_cache(maxsize=None)
def bernoulli(m):
    """Bernoulli number B_m (with B_1 = -1/2) as a Fraction."""
    B = [Fraction(1)]
    for k in range(1, m + 1):
        B.append(-sum(math.comb(k + 1, j) * B[j] for j in range(k)) / (k + 1))
    return B[m]


def _rising(s, n):
    out = 1.0
    for i in range(n):
        out *= s + i
    return out


def _em_tail(s, x, terms):
    """Euler-Maclaurin tail sum_{k >= 0} (x + k)^{-s} beyond the head; returns (value, next term)."""
    if s == 1:
        raise ValidationError("Hurwitz zeta has a pole at s = 1")
    value = x ** (1.0 - s) / (s - 1.0) + 0.5 * x ** (-s)
    for j in range(1, terms + 1):
        value += float(bernoulli(2 * j)) / math.factorial(2 * j) * _rising(s, 2 * j - 1) * x ** (-s - 2 * j + 1)
    j = terms + 1
    nxt = float(bernoulli(2 * j)) / math.factorial(2 * j) * _rising(s, 2 * j - 1) * x ** (-s - 2 * j + 1)
    return value, abs(nxt)


def hurwitz_zeta(s, a, terms=EM_TERMS, tol=EM_TOL, return_error=False):
    """Hurwitz zeta ``sum_{k >= 0} (k + a)^{-s}`` continued to real s != 1.

    The head length N grows until the first omitted Euler-Maclaurin term
    drops below ``tol`` relative to the result.
    """
    if not a > 0:
        raise ValidationError("Hurwitz offset must be positive")
    s = float(s)
    N = 8
    while True:
        head = float(np.sum((np.arange(N) + a) ** (-s))) if s != 0 else float(N)
        tail, err = _em_tail(s, N + a, terms)
        value = head + tail
        if err <= tol * max(1.0, abs(value)) or N >= 1 << 16:
            break
        N *= 2
    err += N * np.finfo(float).eps * max(1.0, abs(value))
    if err > 1e-8 * max(1.0, abs(value)):
        raise ConvergenceError(f"Euler-Maclaurin error estimate {err:.3e} too large")
    return (value, err) if return_error else value


# ---------------------------------------------------------------------------
# spectra


@dataclass(frozen=True)
class ArithmeticProgression:
    """Spectrum ``{sigma (n + a) : n in Z}``."""

    a: float
    sigma: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.a <= 1.0):
            raise ValidationError(f"offset a must lie in (0, 1], got {self.a}")
        if not self.sigma > 0:
            raise ValidationError("scale sigma must be positive")

    @property
    def kernel_dim(self):
        return 1 if self.a == 1.0 else 0

    def contains(self, lam, tol=1e-9):
        x = lam / self.sigma - self.a
        return abs(x - round(x)) < tol

    def eigenvalues(self, cutoff):
        """Nonzero eigenvalues of modulus below ``cutoff``, ascending."""
        nmax = int(math.ceil(cutoff / self.sigma)) + 1
        n = np.arange(-nmax, nmax + 1)
        lam = self.sigma * (n + self.a)
        lam = lam[(np.abs(lam) < cutoff) & (lam != 0)]
        return np.sort(lam)


@dataclass(frozen=True)
class FinitePerturbation:
    """Base progression with finitely many eigenvalues replaced (old -> new)."""

    base: ArithmeticProgression
    replaced: Tuple[Tuple[float, float], ...] = ()

    def __post_init__(self):
        pairs = tuple((float(o), float(n)) for o, n in self.replaced)
        for old, _ in pairs:
            if not self.base.contains(old):
                raise ValidationError(f"replaced eigenvalue {old} is not in the base spectrum")
        olds = [o for o, _ in pairs]
        if len(set(round(o, 12) for o in olds)) != len(olds):
            raise ValidationError("each eigenvalue can be replaced at most once")
        object.__setattr__(self, "replaced", pairs)

    @property
    def kernel_dim(self):
        k = self.base.kernel_dim
        for old, new in self.replaced:
            k += (new == 0) - (old == 0)
        return k


@dataclass(frozen=True)
class EtaResult:
    eta0: float
    kernel_dim: int
    xi: float
    method: str
    error: float = 0.0
    samples: Dict[float, float] = field(default_factory=dict, compare=False)

    def to_json(self):
        return {
            "eta0": self.eta0,
            "kernel_dim": self.kernel_dim,
            "xi": self.xi,
            "method": self.method,
            "error": self.error,
            "samples": {f"{k:g}": v for k, v in sorted(self.samples.items())},
        }


def frac(x):
    """Representative of x mod 1 in [0, 1)."""
    y = x - math.floor(x)
    if y >= 1.0 - XI_TOL and abs(y - 1.0) < XI_TOL:
        return 0.0
    if abs(y) < XI_TOL:
        return 0.0
    return y


def mod1_distance(x, y):
    d = (x - y) % 1.0
    return min(d, 1.0 - d)


def xi_of(eta0, kernel_dim):
    return frac((eta0 + kernel_dim) / 2.0)


def eta_arith(a, sigma=1.0):
    """Closed form ``eta(0) = 1 - 2a`` (and 0 with a one-dimensional kernel at a = 1)."""
    spec = ArithmeticProgression(a, sigma)
    if spec.a == 1.0:
        return EtaResult(0.0, 1, xi_of(0.0, 1), "closed-form")
    eta0 = 1.0 - 2.0 * spec.a
    return EtaResult(eta0, 0, xi_of(eta0, 0), "closed-form")


def eta_function(spec, s):
    """eta(s) for a progression or perturbation, via the Hurwitz zeta function."""
    base = spec.base if isinstance(spec, FinitePerturbation) else spec
    if base.a == 1.0:
        value, err = 0.0, 0.0
    else:
        zp, ep = hurwitz_zeta(s, base.a, return_error=True)
        zm, em = hurwitz_zeta(s, 1.0 - base.a, return_error=True)
        value = base.sigma ** (-s) * (zp - zm)
        err = base.sigma ** (-s) * (ep + em)
    if isinstance(spec, FinitePerturbation):
        for old, new in spec.replaced:
            value += _signed_power(new, s) - _signed_power(old, s)
    return value, err


def _signed_power(lam, s):
    if lam == 0:
        return 0.0
    return math.copysign(abs(lam) ** (-s), lam)


def eta_numeric(spec, sample_points=(2.0, 2.5, 3.0)):
    """eta(0) from the Euler-Maclaurin continuation, with finite corrections."""
    value, err = eta_function(spec, 0.0)
    if err > 1e-8:
        raise ConvergenceError(f"eta(0) error estimate {err:.3e} exceeds 1e-8")
    samples = {float(s): eta_function(spec, s)[0] for s in sample_points}
    kernel = spec.kernel_dim
    return EtaResult(value, kernel, xi_of(value, kernel), "zeta-numeric", err, samples)


def eta_truncated(spec, s, cutoff):
    """Direct sum of sign(lambda) |lambda|^{-s} over nonzero |lambda| < cutoff."""
    base = spec.base if isinstance(spec, FinitePerturbation) else spec
    lam = base.eigenvalues(cutoff)
    if isinstance(spec, FinitePerturbation):
        lam = list(lam)
        for old, new in spec.replaced:
            hits = [i for i, x in enumerate(lam) if abs(x - old) < 1e-9 * max(1.0, abs(old))]
            if hits:
                lam.pop(hits[0])
            if new != 0 and abs(new) < cutoff:
                lam.append(new)
        lam = np.sort(np.array(lam))
    return float(np.sum(np.sign(lam) * np.abs(lam) ** (-s)))


def dirac_s1_spectrum(r, bounding=True, sigma=2.0 * math.pi):
    """Spectrum of the Dirac operator on the circle twisted by the flat bundle with holonomy exp(2 pi i r)."""
    if not (0.0 <= r < 1.0):
        raise ValidationError("holonomy parameter r must lie in [0, 1)")
    shift = 0.5 if bounding else 0.0
    a = (shift + r) % 1.0
    if abs(a) < 1e-15:
        a = 1.0
    return ArithmeticProgression(a, sigma)


def spectrum_from_json(data):
    try:
        base = ArithmeticProgression(float(data["a"]), float(data.get("sigma", 1.0)))
    except KeyError as exc:
        raise ValidationError("spectrum needs an offset 'a'") from exc
    pert = data.get("perturbations") or []
    if not pert:
        return base
    pairs = []
    for p in pert:
        if isinstance(p, dict):
            pairs.append((p["old"], p["new"]))
        else:
            pairs.append(tuple(p))
    return FinitePerturbation(base, tuple(pairs))
