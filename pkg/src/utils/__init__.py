"""
Cross-cutting helpers: errors, run configuration and manifests.
"""

from .errors import (
    PinlabError,
    ConfigurationError,
    SolverError,
    ValidationError,
    EXIT_OK,
    EXIT_CONFIG,
    EXIT_SOLVER,
    EXIT_VALIDATION,
    exit_code_for,
)
from .manifest import RunManifest, sha256_file, package_versions

__all__ = [
    # Errors
    "PinlabError",
    "ConfigurationError",
    "SolverError",
    "ValidationError",
    "EXIT_OK",
    "EXIT_CONFIG",
    "EXIT_SOLVER",
    "EXIT_VALIDATION",
    "exit_code_for",
    # Manifests
    "RunManifest",
    "sha256_file",
    "package_versions",
]
