"""Characteristic forms, eta invariants and rho invariants on foliated flat tori."""

from .charforms import (
    ahat_form,
    ahat_in_ch,
    chern_character,
    chern_forms,
    genus_table,
    kamber_tondeur,
    pontryagin_forms,
    transgress_ahat,
    transgress_ch,
)
from .connections import CodimOneData, Connection, FramingData, HermMetric, PartialConnection, bott_connection
from .errors import (
    ConvergenceError,
    DimensionError,
    FolrhoError,
    NonvanishingError,
    QuadratureError,
    ValidationError,
    VerificationError,
)
from .forms import Foliation, Form, GradedFormSequence, TForm
from .rho import bordism_integrand, e_relative, gv_chernweil_identity, rho_imag, rho_imag_gv, rho_s1
from .spectral import ArithmeticProgression, FinitePerturbation, eta_arith, eta_numeric, hurwitz_zeta
from .trigcalc import TrigPoly, TrigScalar
from .wo import WOElement, WOSpace, universal_class, wo_cohomology

__version__ = "0.1.0"

__all__ = [
    "ahat_form",
    "ahat_in_ch",
    "ArithmeticProgression",
    "bordism_integrand",
    "bott_connection",
    "chern_character",
    "chern_forms",
    "CodimOneData",
    "Connection",
    "ConvergenceError",
    "DimensionError",
    "e_relative",
    "eta_arith",
    "eta_numeric",
    "FinitePerturbation",
    "Foliation",
    "FolrhoError",
    "Form",
    "FramingData",
    "genus_table",
    "GradedFormSequence",
    "gv_chernweil_identity",
    "HermMetric",
    "hurwitz_zeta",
    "kamber_tondeur",
    "NonvanishingError",
    "PartialConnection",
    "pontryagin_forms",
    "QuadratureError",
    "rho_imag",
    "rho_imag_gv",
    "rho_s1",
    "TForm",
    "transgress_ahat",
    "transgress_ch",
    "TrigPoly",
    "TrigScalar",
    "universal_class",
    "ValidationError",
    "VerificationError",
    "wo_cohomology",
    "WOElement",
    "WOSpace",
]
