"""Random constructions of sets in [0,1]^d that avoid affine copies of
finite point sets, with exact and certified copy detectors."""

__version__ = "0.1.0"

from .errors import (BoundaryUndecidable, DomainError, ErdosAffineError, ResourceError,
                     SearchExhausted, SearchFailed)
from .geometry import AffineMap, PointSet, SigmaBounds, delta, in_operator_band, op_norm_bounds
from .grid import GridSet, StageParams, measure, sample_grid, stage_params
from .detector import DetectionResult, detect_bb, exact_V_1d, verify_witness

__all__ = [
    "AffineMap", "BoundaryUndecidable", "DetectionResult", "DomainError", "ErdosAffineError",
    "GridSet", "PointSet", "ResourceError", "SearchExhausted", "SearchFailed", "SigmaBounds",
    "StageParams", "delta", "detect_bb", "exact_V_1d", "in_operator_band", "measure",
    "op_norm_bounds", "sample_grid", "stage_params", "verify_witness",
]
