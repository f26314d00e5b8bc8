"""Exception types shared across the package."""


class TwistmapError(Exception):
    """Base class for all twistmap errors."""


class ConfigurationError(TwistmapError):
    """Invalid or inconsistent inputs (dimension mismatch, bad config keys, ...)."""


class OrbitDivergenceError(TwistmapError):
    """A non-finite state was produced during iteration."""

    def __init__(self, step: int):
        super().__init__(f"non-finite state encountered at step {step}")
        self.step = step


class SmallDivisorError(TwistmapError):
    """A divisor fell below the configured floor in the cohomological solver."""

    def __init__(self, wave_vector, divisor: float, floor: float):
        super().__init__(
            f"divisor {divisor:.3e} for harmonic {tuple(wave_vector)} "
            f"below floor {floor:.3e}"
        )
        self.wave_vector = wave_vector
        self.divisor = divisor
        self.floor = floor


class LightLikeResonanceError(TwistmapError):
    """The resonance vector is light-like: <K, Pi K> = 0."""


class GeometryError(TwistmapError):
    """Root finding for the resonance-surface geometry failed."""


class DegenerateResonanceError(TwistmapError):
    """The resonant average has no dependence on the slow phase."""


class QuadratureError(TwistmapError):
    """Turning points could not be bracketed or the quadrature is invalid."""


class SearchExhaustedError(TwistmapError):
    """No admissible constants found within the search bounds."""

    def __init__(self, message: str, binding: str):
        super().__init__(f"{message} (binding inequality: {binding})")
        self.binding = binding
