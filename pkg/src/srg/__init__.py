"""Structured region graphs over discrete factor graphs."""
from .errors import SRGError
from .factor_graph import Factor, FactorGraph, VariableDecl, exact_inference
from .region_graph import Region, RegionGraph, counting_numbers, total_counting_number, validate

__all__ = [
    "Factor",
    "FactorGraph",
    "Region",
    "RegionGraph",
    "SRGError",
    "VariableDecl",
    "counting_numbers",
    "exact_inference",
    "total_counting_number",
    "validate",
]
