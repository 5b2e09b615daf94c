"""Finite-height simplified morasses, forcing systems built along them, and
exhaustive checkers for their structural properties."""

from .errors import InternalInconsistency, RejectedInput, SizeLimitExceeded
from .morass import Morass, TreeNode, build_canonical, build_random, check_tree, validate
from .ordinals import OrderMap, compose, critical_point, pullback, restrict, transport
from .report import Check, Report

__all__ = [
    "Check", "InternalInconsistency", "Morass", "OrderMap", "RejectedInput", "Report",
    "SizeLimitExceeded", "TreeNode", "build_canonical", "build_random", "check_tree", "compose",
    "critical_point", "pullback", "restrict", "transport", "validate",
]
__version__ = "0.1.0"
