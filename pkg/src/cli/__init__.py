"""
Command layer: argument parsing, commands, plots and validation suites.
"""

from .validate import SuiteContext, SuiteResult, SUITES, run_suites, report_frame

__all__ = [
    # Validation
    "SuiteContext",
    "SuiteResult",
    "SUITES",
    "run_suites",
    "report_frame",
]
