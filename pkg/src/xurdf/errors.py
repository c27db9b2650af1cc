"""Exception hierarchy shared across the package.

Every domain error carries a stable ``code`` string so CLI findings and
service payloads can report machine-readable causes without string-matching
exception messages.
"""

from __future__ import annotations


class XurdfError(Exception):
    """Base class for all errors raised by this package."""

    code: str = "XurdfError"

    def __init__(self, message: str, *, code: str | None = None, subject: str | None = None):
        super().__init__(message)
        if code is not None:
            self.code = code
        self.subject = subject


class AngleNearPiError(XurdfError):
    """Rotation angle too close to pi for a well-conditioned logarithm."""

    code = "AngleNearPi"

    def __init__(self, angle: float, message: str | None = None):
        self.angle = angle
        super().__init__(message or f"rotation angle {angle!r} is within the cut locus guard band of pi")


class UrdfParseError(XurdfError):
    """Raised for syntactic or structural problems in a URDF document."""

    code = "XmlSemantics"


class UrdfSyntaxError(UrdfParseError):
    """Malformed XML; carries the (line, column) reported by the parser."""

    code = "XmlSyntax"

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        super().__init__(message)
        self.line = line
        self.column = column


class ExtensionError(XurdfError):
    """Raised for syntactic or semantic problems in the YAML extension."""

    code = "ExtensionError"


class GenerationError(ExtensionError):
    """Raised when convention-driven extension generation cannot pair frames."""

    code = "GenerationError"


class BuildError(XurdfError):
    """Raised when a parsed document pair cannot be assembled into a model."""

    code = "BuildError"


class SubstitutionError(BuildError):
    """Raised when a requested spherical substitution is not applicable."""

    code = "ReplacementNotApplicable"


class ConfigurationError(XurdfError):
    """Configuration vector violates the model's layout invariants."""

    code = "ConfigurationError"


class FrameIndexError(XurdfError, IndexError):
    """Frame index outside the model's frame table."""

    code = "FrameIndexOutOfRange"


class ClosureAngleError(XurdfError):
    """A 6D closure's relative rotation hit the logarithm's guard band."""

    code = "AngleNearPi"

    def __init__(self, closure: str, angle: float):
        self.closure = closure
        self.angle = angle
        super().__init__(
            f"closure {closure!r}: relative rotation angle {angle!r} is too close to pi",
            subject=closure,
        )


class ProjectionError(XurdfError):
    """Projection onto the constraint manifold failed to converge."""

    code = "MaxIterations"

    def __init__(self, message: str, final_norm: float, stats=None):
        super().__init__(message)
        self.final_norm = final_norm
        self.stats = stats


class UnknownFixtureError(XurdfError):
    code = "UnknownFixture"
