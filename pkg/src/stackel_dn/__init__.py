"""Separated Dirichlet-to-Neumann maps on conformally Stäckel cylinders."""
from .dn import DnOperator, apply_dn, assemble_dn
from .fixtures import Fixture, load_fixture
from .geometry import ConformallyStackelMetric, StackelMatrix, validate_stackel

__version__ = "0.1.0"
__all__ = ["ConformallyStackelMetric", "StackelMatrix", "validate_stackel", "Fixture",
           "load_fixture", "DnOperator", "assemble_dn", "apply_dn"]
