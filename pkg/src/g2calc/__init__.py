"""Exact exterior-calculus engine for G2, SU(3) and SU(2) structures."""

from .scalars import QuadNum, Ring, ScalarExpr
from .exterior import (
    Coframe,
    FormExpr,
    Metric,
    hodge,
    inner,
    norm_sq,
    form_to_numeric,
    wedge_numeric,
    contract_numeric,
    hodge_numeric,
    norm_sq_numeric,
    metric_from_phi_numeric,
)
from .harness import (
    SUITES,
    HarnessError,
    HarnessOptions,
    SuiteReport,
    export_report,
    run_suite,
)

__version__ = "0.1.0"

__all__ = [
    "QuadNum",
    "Ring",
    "ScalarExpr",
    "Coframe",
    "FormExpr",
    "Metric",
    "hodge",
    "inner",
    "norm_sq",
    "form_to_numeric",
    "wedge_numeric",
    "contract_numeric",
    "hodge_numeric",
    "norm_sq_numeric",
    "metric_from_phi_numeric",
    "SUITES",
    "HarnessError",
    "HarnessOptions",
    "SuiteReport",
    "export_report",
    "run_suite",
    "__version__",
]
