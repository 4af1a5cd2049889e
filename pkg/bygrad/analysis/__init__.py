"""
Closed-form theory and its numerical verification
"""
from bygrad.analysis.theory import (
    BoundReport,
    Constants,
    ErrorTerms,
    TheoryParams,
    baseline_error,
    bound_report,
    compute_constants,
    convergence_bound,
    d_threshold,
    error_curve,
    error_terms,
    grid,
    leading_error_term,
    lemma1_value,
    max_stable_gamma,
    read_curve_csv,
    write_curve_csv,
)
from bygrad.analysis.lemmas import (
    Estimate,
    HonestAverageMoments,
    LemmaReport,
    honest_average_moments,
    lemma1_enumeration,
    task_matrix_deviation,
    verify_lemma_bounds,
)

__all__ = [
    'BoundReport',
    'Constants',
    'ErrorTerms',
    'TheoryParams',
    'baseline_error',
    'bound_report',
    'compute_constants',
    'convergence_bound',
    'd_threshold',
    'error_curve',
    'error_terms',
    'grid',
    'leading_error_term',
    'lemma1_value',
    'max_stable_gamma',
    'read_curve_csv',
    'write_curve_csv',
    'Estimate',
    'HonestAverageMoments',
    'LemmaReport',
    'honest_average_moments',
    'lemma1_enumeration',
    'task_matrix_deviation',
    'verify_lemma_bounds',
]
