# -*- coding: utf-8 -*-
"""
Shared fixtures; puts the project root on sys.path so tests import `src`.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

PROJECT_ROOT = Path(__file__).parent.parent
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

from src.medium import Direction, make_constant  # noqa: E402


@pytest.fixture
def rng():
    """Seeded generator; tests needing random samples stay reproducible."""
    return np.random.default_rng(0)


@pytest.fixture
def unit_medium():
    return make_constant(1.0)


@pytest.fixture
def e1():
    return Direction.from_lattice((1, 0))
