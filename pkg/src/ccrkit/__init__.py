"""Complementarity relations for quantum states: quantifiers, correlations and checks."""

__version__ = "0.1.0"

from .correlations import (
    OptimizerConfig,
    OptResult,
    classical_correlation,
    concurrence,
    entanglement_of_formation,
    jaeger_measure,
    koashi_winter_residual,
    wootters_eof,
)
from .dynamics import (
    ChannelSpec,
    Trajectory,
    dilate_dephasing,
    measurement_model,
    pointer_basis_detect,
    rate_check,
)
from .errors import CcrError, ParseError
from .measures import (
    coherence,
    conditional_entropy,
    conditional_information,
    irreality,
    linear_entropy,
    mutual_information,
    predictability,
    reality,
    shannon_entropy,
    von_neumann_entropy,
)
from .qstate import (
    DensityMatrix,
    Ensemble,
    MeasurementBasis,
    PureState,
    partial_trace,
    purify,
    random_mixed,
    random_pure,
)
from .relations import RELATIONS, CcrReport, GeneratorSpec, verify_batch

__all__ = [name for name in dir() if not name.startswith("_")]
