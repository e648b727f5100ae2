"""Spherical-wave decomposition of closed-surface field traces, Huygens
equivalence in coefficient space, and channel de-embedding."""

from .decompose import (
    CoefficientSet,
    condition_report,
    decompose_incoming,
    decompose_leastsquares,
    decompose_outgoing,
    decompose_radiating,
    inner_product_field_mode,
    mode_mode_products,
)
from .equivalence import (
    ChannelMatrix,
    EquivalenceCase,
    FarFieldPattern,
    SignalFlowModel,
    apply_channel,
    coefficient_power,
    directivity,
    equivalent_source,
    love_currents,
    radiate_currents,
    solve_equivalent_flow,
    solve_original_flow,
    superpose_farfields,
)
from .errors import DomainError, FormatError, NumericalError, SingularityError
from .modes import ModeIndex, ModeSet, j_from_smn, mode_count, smn_from_j
from .oracles import (
    DipoleSource,
    Scene,
    dipole_fields,
    sample_scene_on_mesh,
    synthesize_from_coefficients,
    truncation_order_suggestion,
)
from .surface import BoxSpec, FieldTrace, SurfaceMesh, build_box_mesh
from .swf import ETA0, ComplexVec3, Medium, WaveType, eval_curl_F, eval_F, mode_farfield

__version__ = "0.1.0"
