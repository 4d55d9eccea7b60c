"""Exceptions raised by the elastoborn toolbox."""


class ElastobornError(Exception):
    """Base class for all elastoborn failures."""


class FieldError(ElastobornError):
    """A field does not satisfy the preconditions of an operator."""


class NonPeriodicFieldError(FieldError):
    """Spectral backend requested for a field that is not compact in the unit ball."""

    def __init__(self, detail: str = ''):
        message = 'non-periodic field'
        super().__init__(f'{message}: {detail}' if detail else message)


class GridMismatchError(FieldError):
    """Fields combined in one operation live on different grids."""

    def __init__(self, detail: str = ''):
        message = 'grid mismatch'
        super().__init__(f'{message}: {detail}' if detail else message)


class NotEllipticError(ElastobornError):
    """Symbol inversion requested for a symbol without the elliptic flag."""

    def __init__(self, symbol: object = None):
        super().__init__('not elliptic' if symbol is None else f'not elliptic: {symbol}')


class ResidualTooLargeError(ElastobornError):
    """An elliptic solve did not reproduce its right-hand side."""

    def __init__(self, residual: float, tolerance: float):
        self.residual = residual
        self.tolerance = tolerance
        super().__init__(f'residual too large: {residual:.3e} > {tolerance:.1e}')


class DegenerateFrequencyError(ElastobornError):
    """Frequency sample lies too close to a coordinate plane."""

    def __init__(self, xi: object):
        super().__init__(f'degenerate frequency: {xi}')


class DegenerateSpeedsError(ElastobornError):
    """P and S speeds coincide, so mode-conversion divisions are undefined."""

    def __init__(self, cp: float, cs: float):
        super().__init__(f'degenerate speeds: c_p={cp}, c_s={cs}')


class MaskTooSmallError(ElastobornError):
    """The valid region of a data functional does not cover the reconstruction zone."""

    def __init__(self, required_radius: float):
        super().__init__(f'mask too small: valid region does not cover |x| <= {required_radius}')


class DirectionError(ElastobornError):
    """Direction or polarization outside the supported axis set."""


class SlotSpecError(ElastobornError):
    """Contraction slots and divergence slots disagree."""

    def __init__(self, detail: str):
        super().__init__(f'invalid slot spec: {detail}')


class FieldFormatError(ElastobornError):
    """A field file or its sidecar is malformed."""


class SupportViolationError(ElastobornError):
    """A bump primitive reaches outside {|x| <= 0.95}."""


class ConfigError(ElastobornError):
    """Configuration file could not be parsed or validated."""


class SupportLeakageWarning(UserWarning):
    """A double antiderivative did not return to zero on the downstream faces."""
