"""Exact spectral data: polynomials, number fields, Perron-Frobenius."""
from .field import Algebraic, NumberField, from_json, to_json
from .perron import (
    NotPrimitive,
    PFCertificate,
    PFData,
    ReducibleChain,
    dominant_eigendata,
    pf_certificate,
    power_iteration,
    stationary_distribution,
    train_length_function,
)
from .poly import charpoly, factor_integer_poly

__all__ = [
    "Algebraic",
    "NumberField",
    "NotPrimitive",
    "PFCertificate",
    "PFData",
    "ReducibleChain",
    "charpoly",
    "dominant_eigendata",
    "factor_integer_poly",
    "from_json",
    "pf_certificate",
    "power_iteration",
    "stationary_distribution",
    "to_json",
    "train_length_function",
]
