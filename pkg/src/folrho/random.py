"""Seeded random instances for property suites and the command line."""


from .connections import Connection
from .forms import Form
from .trigcalc import TrigPoly


def random_trig(rng, dim, nterms=3, band=2, real=False, scale=1.0):
    """Sparse random TrigPoly with frequencies in [-band, band]."""
    freqs = rng.integers(-band, band + 1, size=(nterms, dim))
    coefs = scale * (rng.normal(size=nterms) + 1j * rng.normal(size=nterms)) / nterms
    p = TrigPoly(dim, freqs, coefs)
    if real:
        p = (p + p.conj()) * 0.5
    return p


def random_form(rng, dim, degree, rank=1, nterms=2, band=2, real=False, density=0.6):
    from itertools import combinations

    terms = {}
    for idx in combinations(range(dim), degree):
        if rng.random() > density:
            continue
        if rank == 1:
            terms[idx] = random_trig(rng, dim, nterms, band, real)
        else:
            rows = [[random_trig(rng, dim, nterms, band, real) for _ in range(rank)] for _ in range(rank)]
            terms[idx] = TrigPoly.from_entries(rows)
    return Form(dim, degree, rank, terms)


def random_connection(rng, dim, rank=1, nterms=2, band=2, real=False, density=0.6):
    return Connection(random_form(rng, dim, 1, rank, nterms, band, real, density), real=real)
