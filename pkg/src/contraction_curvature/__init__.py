"""Curvature invariant of a single contraction operator.

Operators are dense matrices, weighted shifts, powers of the unilateral shift,
direct sums and the partial-isometry extension.  The curvature is estimated by
the defect-sequence limit, its Cesaro mean, the resolvent integral, a closed
form for shifts and the unitary dilation.
"""

from .analysis import AnalysisOptions, AnalysisReport, analyze
from .corpus import (backward_shift, build_named, default_corpus, dft_unitary, jordan_nilpotent,
                     kappa_example, kappa_sum, random_contraction, random_unilateral_shift, shift_power,
                     unilateral_shift)
from .curvature import (CurvatureReport, DefectSequence, abel_mean, additivity_check, cesaro_sum,
                        collapsing_sum_check, curvature_cesaro, curvature_exact, curvature_exact_shift,
                        curvature_integral, curvature_limit, curvature_report, defect_sequence)
from .defect import (DefectData, Extension, defect, defect_ranks, extend_to_partial_isometry,
                     is_partial_isometry, partial_isometry_residual, prop1_rank_check)
from .dilation import (DilationVector, WanderingSubspace, affinity_partial_sum, compression_check,
                       curvature_via_dilation, dilation_apply, dilation_apply_adjoint, reciprocity_check,
                       wandering_spaces)
from .errors import ContractionError, ConvergenceWarning, DomainError, PreconditionError, TruncationWarning
from .fredholm import IndexReport, fredholm_index, kernel_dims, purity_test, theorem4_verdict
from .operators import (DenseOperator, DirectSum, Operator, ShiftPower, WeightedShift, apply, apply_adjoint,
                        densify, direct_sum, is_contraction, operator_norm)
from .specfile import build_operator, emit_spec, operator_to_spec, parse_spec
from .vectors import BlockVector, SeqVector

__all__ = [name for name in dir() if not name.startswith("_")]
