"""Ergodic averages on tori: rotations, skew products, empirical measures."""
from __future__ import annotations

__version__ = "0.1.0"

from ._config import BudgetExceeded, budgets, set_budgets
from ._kernels import DriftError, backend_name, set_backend
from .certificates import DiscontinuityCertificate, HyperplaneSlice, PointSet, RectangleBoundary
from .exact import ExactScalar, parse_scalar
from .torus import TorusPoint, dist, haar_sample, lattice_grid, wrap
from .dynamics import (IntegerRelation, Rotation, SkewProductMap, StepRule, condition_H_visit_frequency,
                       independence_falsifier, iterate, orbit, product_rotation, rotation_apply,
                       rotation_power, spt_apply, step_skew)
from .observables import MixedObservable, Observable, StepObservable, TrigPolynomial, observable_from_dict
from .measures import (DiracMeasure, EmpiricalMeasure, base_marginal, empirical_from_orbit, integrate,
                       invariance_defect, pushforward, weak_star_discrepancy)
from .birkhoff import (ConvergenceCurve, birkhoff_average, hypothesis_audit, semi_uniform_threshold,
                       uniform_sup_scan)
from .double_avg import (DoubleAverageSpec, KroneckerLimit, double_average, kronecker_limit_oracle,
                         pointwise_convergence_test, product_limit_comparison, quadrature_limit_oracle)

__all__ = [
    "__version__", "BudgetExceeded", "budgets", "set_budgets", "DriftError", "backend_name", "set_backend",
    "DiscontinuityCertificate", "HyperplaneSlice", "PointSet", "RectangleBoundary",
    "ExactScalar", "parse_scalar", "TorusPoint", "dist", "haar_sample", "lattice_grid", "wrap",
    "IntegerRelation", "Rotation", "SkewProductMap", "StepRule", "condition_H_visit_frequency",
    "independence_falsifier", "iterate", "orbit", "product_rotation", "rotation_apply", "rotation_power",
    "spt_apply", "step_skew", "MixedObservable", "Observable", "StepObservable", "TrigPolynomial",
    "observable_from_dict", "DiracMeasure", "EmpiricalMeasure", "base_marginal", "empirical_from_orbit",
    "integrate", "invariance_defect", "pushforward", "weak_star_discrepancy", "ConvergenceCurve",
    "birkhoff_average", "hypothesis_audit", "semi_uniform_threshold", "uniform_sup_scan",
    "DoubleAverageSpec", "KroneckerLimit", "double_average", "kronecker_limit_oracle",
    "pointwise_convergence_test", "product_limit_comparison", "quadrature_limit_oracle",
]
