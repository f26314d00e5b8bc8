"""Near-integrable symplectic twist maps on the cylinder R^N x T^N.

Core capabilities: exact map iteration with lifted angles, resonance
detection and resonant averaging, the one-degree-of-freedom reduction near
a single resonance with action-angle quadrature, orbit classification
(KAM tori / ribbons / spots / chaotic), seeded Monte Carlo surveys of
phase-space fractions, and a numeric verifier for the bookkeeping
constants of an iterative torus-persistence scheme.
"""

from .engine import (
    Orbit,
    PhaseState,
    inverse_step,
    iterate,
    jacobian_determinant,
    map_step,
)
from .errors import (
    ConfigurationError,
    DegenerateResonanceError,
    GeometryError,
    LightLikeResonanceError,
    OrbitDivergenceError,
    QuadratureError,
    SearchExhaustedError,
    SmallDivisorError,
    TwistmapError,
)
from .resonance import (
    Resonance,
    ResonanceModule,
    ResonanceReport,
    SingleResonanceGeometry,
    build_geometry,
    detect_resonances,
    integer_rank,
)
from .classify import (
    ClassifierConfig,
    OrbitClass,
    OrbitLabel,
    classify,
    frequency_drift,
    mean_frequency,
    winding_analysis,
)
from .pendulum import (
    ActionTable,
    PendulumModel,
    action,
    default_energy_grid,
    frequency_and_twist,
    harmonic_frequency,
    in_oscillatory_domain,
    make_pendulum,
    oscillation_period,
    pendulum_energy,
    project_reduced,
    reduce_to_pendulum,
)
from .spectral import (
    CohomologySolution,
    first_order_projection,
    project_resonant,
    solve_cohomological,
)
from .survey import (
    DoubleResonanceBoxRegion,
    FullBoxRegion,
    ResonanceStripRegion,
    SurveyConfig,
    SurveyResult,
    conditional_ribbon_probability,
    double_resonance_probability,
    run_survey,
)
from .trig import TrigSeries, three_wave_potential

__version__ = "0.1.0"
