"""Haar multipliers on dyadic function spaces."""
from .decomposition import (AtomicDecomposition, IntervalAtom, PiecewiseLinearPath, TrivialInput, certify,
                            decompose, reconstruct, verify_atom)
from .dyadic import (DyadicInterval, GridFunction, HaarCoefficients, apply_multiplier, conditional_expectation,
                     haar_forward, haar_inverse, haar_projection, v1_bound)
from .opnorm import (ExperimentConfig, OpNormReport, duality_check, exact_opnorm_l2, growth_experiment,
                     lower_bound_opnorm, v1_consistency, witness_ratio)
from .spaces import (Region, SpaceParams, classify_record, critical_u, in_quad, in_triangle_Tq, low_q_triangle,
                     region_classify, region_diagram, tl_norm)
from .variation import MultiplierSequence, family_profile, running_variation, u_variation, vu_norm

__version__ = "0.1.0"

__all__ = [
    "AtomicDecomposition", "IntervalAtom", "PiecewiseLinearPath", "TrivialInput", "certify", "decompose",
    "reconstruct", "verify_atom", "DyadicInterval", "GridFunction", "HaarCoefficients", "apply_multiplier",
    "conditional_expectation", "haar_forward", "haar_inverse", "haar_projection", "v1_bound",
    "ExperimentConfig", "OpNormReport", "duality_check", "exact_opnorm_l2", "growth_experiment",
    "lower_bound_opnorm", "v1_consistency", "witness_ratio", "Region", "SpaceParams", "classify_record",
    "critical_u", "in_quad", "in_triangle_Tq", "low_q_triangle", "region_classify", "region_diagram", "tl_norm",
    "MultiplierSequence", "family_profile", "running_variation", "u_variation", "vu_norm",
]
