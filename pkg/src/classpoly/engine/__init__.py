"""Pipeline, verification modulo CM primes, benchmark harness and CLI."""

from .pipeline import (
    STRATEGIES,
    ClassPolynomial,
    RetriesExhaustedError,
    RunReport,
    compute_class_polynomial,
    conjugate_strategy_agm,
    conjugate_strategy_multipoint,
    conjugate_strategy_sparse,
)
from .verify import CMPrime, Verdict, all_consistent, find_cm_prime, verify_mod_p, verify_polynomial

__all__ = [
    "STRATEGIES",
    "ClassPolynomial",
    "RetriesExhaustedError",
    "RunReport",
    "compute_class_polynomial",
    "conjugate_strategy_agm",
    "conjugate_strategy_multipoint",
    "conjugate_strategy_sparse",
    "CMPrime",
    "Verdict",
    "all_consistent",
    "find_cm_prime",
    "verify_mod_p",
    "verify_polynomial",
]
