"""Coaxial-approximation design toolkit for stitched PCB via transitions."""

from .cascade import (
    CascadeResult,
    FrequencyResponse,
    ModeAdvisory,
    Sweep,
    TransferMatrix,
    cascade_s_params,
    cascade_sections,
    effective_bandwidth,
    segment_matrix,
)
from .coaxmodel import CoaxSection, coax_impedance, solve_inner_for_z0, solve_outer_for_z0
from .designer import (
    DesignInfeasible,
    DesignReport,
    DesignSpec,
    barrel_sweep,
    design_via,
    modulate_inner_antipad,
)
from .geometry import (
    Diagnostic,
    GeometryError,
    Layer,
    Length,
    Material,
    ViaGeometry,
    load_geometry,
    mil_to_m,
    validate,
)
from .modesolver import (
    TE11,
    TM01,
    Mode,
    ModeCutoff,
    bessel,
    cutoff_frequency,
    evanescent_alpha,
    kc_approx,
    kc_exact,
)
from .tdr import TdrTrace, Window, compare_traces, s11_to_tdr

__version__ = "0.1.0"
