"""Numerical laboratory for Rademacher maximal functions and Carleson embeddings on dyadic [0, 1)."""
from .carleson import (
    AuditReport, CarlesonFamily, EmbeddingImage, StoppingDecomposition, car_constant, embed,
    embed_norm, lemma_audit, operator_norm_search, stopping_decompose, tail_energy, witness_family,
)
from .dyadic import (
    DyadicFunction, DyadicSet, ScalarDyadicFunction, cond_expect, lorentz_norm, lp_norm, maximal_rad,
    maximal_std,
)
from .experiments import ExperimentConfig, SweepRow, counterexample_build, counterexample_sweep, rmf_probe, run
from .rademacher import RadMoment, kk_ratio, rad_moment, rad_norm
from .rbound import SearchParams, rbound_hilbert, rbound_search, type_constant_search
from .spaces import Operator, OperatorSpace, SequenceSpace, op_norm, op_norm_estimate, operator

__version__ = "0.1.0"
