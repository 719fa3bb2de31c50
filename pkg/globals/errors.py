from pathlib import Path


class PeakonLabError(Exception):
    pass


class ConfigurationError(PeakonLabError):
    pass


class NumericFailureError(PeakonLabError):
    pass


class InvalidFileError(ConfigurationError):
    def __init__(self, source_path: Path):
        super().__init__(f"No file at '{source_path.resolve()}'")


class InvalidConfigFileError(InvalidFileError):
    pass


class InvalidOutputDirectoryError(ConfigurationError):
    def __init__(self, output_directory: Path):
        super().__init__(
            f"Output directory '{output_directory.resolve()}' does not exist")


class ConfigParseError(ConfigurationError):
    def __init__(self, line: int | None, message: str):
        self.line = line
        self.message = message
        location = f"line {line}" if line is not None else "unknown line"
        super().__init__(f"Could not parse configuration at {location}: {message}")


class ConfigValidationError(ConfigurationError):
    def __init__(self, field: str, message: str | None = None):
        self.field = field
        super().__init__(message or f"Invalid or unknown configuration field '{field}'")


class DegenerateConfigurationError(ConfigurationError):
    def __init__(self, details: str):
        super().__init__(f"Degenerate configuration: {details}")


class InvalidGridError(ConfigurationError):
    def __init__(self, details: str):
        super().__init__(f"Invalid grid: {details}")


class NonPositiveAmplitudeError(ConfigurationError):
    def __init__(self, index: int, value: float):
        super().__init__(f"Amplitude p[{index}] = {value} is not positive")


class UnorderedPositionsError(ConfigurationError):
    def __init__(self, index: int):
        super().__init__(
            f"Positions are not strictly ascending at q[{index}] >= q[{index + 1}]")


class SeparationTooSmallError(ConfigurationError):
    def __init__(self, gap: float, separation: float):
        super().__init__(
            f"Adjacent shifts are {gap:.6g} apart, required more than L/2 with "
            f"L = {separation:.6g}")


class PreconditionUnmetError(ConfigurationError):
    def __init__(self, quantity: str, measured: float, limit: float):
        super().__init__(
            f"Precondition on {quantity} unmet: measured {measured:.6g}, allowed "
            f"{limit:.6g}")


class InvalidMollifierIndexError(ConfigurationError):
    def __init__(self, n0: int):
        super().__init__(
            f"Mollifier index n0 = {n0} does not give a strictly increasing modulation "
            f"kernel on [-1/2, 1/2]")


class CollisionDetectedError(NumericFailureError):
    def __init__(self, t: float, i: int, j: int):
        self.t = t
        self.i = i
        self.j = j
        super().__init__(f"Peakons {i} and {j} collided at t = {t:.10g}")


class StepSizeUnderflowError(NumericFailureError):
    def __init__(self, t: float, message: str):
        super().__init__(f"Adaptive step control stalled at t = {t:.10g}: {message}")


class ComplexSpectrumError(NumericFailureError):
    def __init__(self, imag: float):
        super().__init__(f"Spectrum has an imaginary part of size {imag:.3g}")


class NonPositiveEigenvalueError(NumericFailureError):
    def __init__(self, value: float):
        super().__init__(f"Spectrum has a non-positive eigenvalue {value:.6g}")


class BumpLostError(NumericFailureError):
    def __init__(self, t: float, index: int):
        super().__init__(
            f"Tracked maximum of bump {index} left its interval at t = {t:.6g}")


class NewtonDivergedError(NumericFailureError):
    def __init__(self, iterations: int, residual: float):
        super().__init__(
            f"Modulation Newton iteration did not converge after {iterations} "
            f"iteration(s), residual {residual:.3g}")


class JacobianSingularError(NumericFailureError):
    def __init__(self, condition: float):
        super().__init__(f"Modulation Jacobian is singular (condition {condition:.3g})")


class BlowUpError(NumericFailureError):
    def __init__(self, t: float, slope: float):
        super().__init__(
            f"Slope max|u_x| = {slope:.6g} exceeded the ceiling at t = {t:.6g}")


class BoundaryContaminationError(NumericFailureError):
    def __init__(self, t: float, position: float):
        super().__init__(
            f"Crest at x = {position:.6g} reached the periodic boundary zone at "
            f"t = {t:.6g}")
