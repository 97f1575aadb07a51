"""Perturbation of normal matrices whose entries are truncated multivariate
power series: discriminant tests, unitary diagonalization, real normal forms
and singular value decompositions, each with checkable residuals."""
from __future__ import annotations

from mpert.diagonalize import (
    DiagonalizationResult,
    RealNormalForm,
    diagonalize_normal,
    realify,
    well_ordered_check,
)
from mpert.discriminants import HypothesisReport, hypothesis_check
from mpert.errors import MpertError
from mpert.hensel import cohn_sylvester_solve, constant_normal_split, hensel_split
from mpert.kernels import BACKEND
from mpert.matrix import SeriesMatrix, char_poly, is_normal, is_unitary
from mpert.scalar import QI2, ExactField, FloatField
from mpert.series import Series, SeriesRing, sqrt_unit, substitute_monomial_map
from mpert.svd import SVDResult, svd_monomial_refine, svd_series

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "DiagonalizationResult",
    "ExactField",
    "FloatField",
    "HypothesisReport",
    "MpertError",
    "QI2",
    "RealNormalForm",
    "SVDResult",
    "Series",
    "SeriesMatrix",
    "SeriesRing",
    "char_poly",
    "cohn_sylvester_solve",
    "constant_normal_split",
    "diagonalize_normal",
    "hensel_split",
    "hypothesis_check",
    "is_normal",
    "is_unitary",
    "realify",
    "sqrt_unit",
    "substitute_monomial_map",
    "svd_monomial_refine",
    "svd_series",
    "well_ordered_check",
]
