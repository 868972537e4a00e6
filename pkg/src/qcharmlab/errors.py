"""Exception hierarchy shared by all stages of the pipeline."""


class QcHarmError(Exception):
    """Base class. ``witness`` carries the offending point/angle when known."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness

    def to_dict(self):
        out = {"error": type(self).__name__, "message": str(self)}
        if self.witness is not None:
            out["witness"] = _jsonable(self.witness)
        return out


def _jsonable(value):
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if hasattr(value, "item"):
        return _jsonable(value.item())
    return value


# curve_geometry
class SelfIntersecting(QcHarmError):
    pass


class DegenerateInput(QcHarmError):
    pass


class OutsideDomain(QcHarmError):
    pass


class AmbiguousFoot(QcHarmError):
    pass


class SingularCollar(QcHarmError):
    pass


# harmonic_extension
class InvalidRadius(QcHarmError, ValueError):
    pass


class BoundaryDivergence(QcHarmError):
    pass


class AliasWarning(UserWarning):
    pass


# qc_analysis
class OrientationFailure(QcHarmError):
    pass


class NotHomeomorphism(QcHarmError):
    pass


# distance_barrier
class EmptyCollar(QcHarmError):
    pass


# lipschitz_certifier
class CollarEscape(QcHarmError):
    pass


class NotSubharmonic(QcHarmError):
    pass


class SignError(QcHarmError):
    pass


class VerificationFailure(QcHarmError):
    pass


class LewyViolation(QcHarmError):
    pass


class MaxPrincipleFailure(QcHarmError):
    pass


# scenarios
class ConfigError(QcHarmError):
    pass
