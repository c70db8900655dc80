"""Fractional stable distributions: sampling, densities, fitting and a CTRW harness."""

from .ctrw import CtrwConfig, EnsembleResult, WalkerState, ctrw_limit_pdf, sample_pareto, simulate_ensemble, simulate_walker
from .errors import DomainError, EstimationError, QuadratureError
from .estimation import FitResult, estimate_moments, fit_chi2, log_moments
from .fsd import FsdParams, MixingSample, SpecialCase, fsd_pdf, fsd_pdf_mc, make_mixing_sample, sample_fsd, special_case_of
from .gof import GofReport, Histogram, build_histogram, cell_probabilities, chi2_distance, chi2_upper_tail, pearson_test
from .optimize import SearchConfig, SearchTrace, hooke_jeeves, penalty
from .stable import RngStream, StableDensity, StableParams, sample_one_sided, sample_stable, stable_cf, stable_pdf

__version__ = "0.1.0"

__all__ = [
    "CtrwConfig",
    "DomainError",
    "EnsembleResult",
    "EstimationError",
    "FitResult",
    "FsdParams",
    "GofReport",
    "Histogram",
    "MixingSample",
    "QuadratureError",
    "RngStream",
    "SearchConfig",
    "SearchTrace",
    "SpecialCase",
    "StableDensity",
    "StableParams",
    "WalkerState",
    "build_histogram",
    "cell_probabilities",
    "chi2_distance",
    "chi2_upper_tail",
    "ctrw_limit_pdf",
    "estimate_moments",
    "fit_chi2",
    "fsd_pdf",
    "fsd_pdf_mc",
    "hooke_jeeves",
    "log_moments",
    "make_mixing_sample",
    "pearson_test",
    "penalty",
    "sample_fsd",
    "sample_one_sided",
    "sample_pareto",
    "sample_stable",
    "simulate_ensemble",
    "simulate_walker",
    "special_case_of",
    "stable_cf",
    "stable_pdf",
]
