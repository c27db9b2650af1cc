"""xurdf: closed-loop robot descriptions built on URDF plus a YAML extension.

Parses standard URDF together with a sidecar YAML file declaring loop
closures, actuated joints, and joint replacements; builds a reduced robot
model; and provides kinematics, closure residuals, constraint Jacobians,
manifold projection, and mobility analysis on top of it.
"""

from .builder import (
    build_model,
    matched_configuration,
    reduce_closure,
    substitute_spherical,
    validate_model,
)
from .constraints import (
    ConstraintResidual,
    MobilityReport,
    ProjectOptions,
    ProjectionStats,
    acceleration_bias,
    jacobian,
    mobility_report,
    project,
    residual,
    residual_rows,
    residual_slices,
)
from .errors import (
    AngleNearPiError,
    BuildError,
    ClosureAngleError,
    ConfigurationError,
    ExtensionError,
    FrameIndexError,
    GenerationError,
    ProjectionError,
    SubstitutionError,
    UnknownFixtureError,
    UrdfParseError,
    UrdfSyntaxError,
    XurdfError,
)
from .fixtures import (
    FixtureExpectation,
    fixture_dir,
    list_fixtures,
    load_fixture,
)
from .extension import (
    ClosureSpec,
    ExtensionDoc,
    NamingConvention,
    ReplacementItem,
    generate_extension,
    parse_extension,
    serialize_extension,
)
from .kinematics import (
    KinematicsCache,
    check_configuration,
    forward_kinematics,
    frame_jacobian,
    frame_placement,
    crba,
    integrate,
    neutral,
)
from .model import (
    BodyInertia,
    BuildOptions,
    ClosureModel,
    FrameModel,
    JointKind,
    JointModel,
    RobotModel,
    SubstitutionTolerances,
    ValidationFinding,
    ValidationReport,
)
from .se3 import (
    Placement,
    Rotation,
    Twist,
    adjoint,
    exp_se3,
    log_se3,
    log_se3_with_jacobian,
    min_eigenvalue,
    numerical_rank,
    right_jacobian_se3,
    singular_values,
    skew,
)
from .urdf import (
    InertialDesc,
    JointDesc,
    JointLimits,
    LinkDesc,
    UrdfDocument,
    parse_urdf,
    serialize_urdf,
)

__version__ = "0.1.0"

__all__ = [
    "AngleNearPiError",
    "BodyInertia",
    "BuildError",
    "BuildOptions",
    "ClosureAngleError",
    "ClosureModel",
    "ClosureSpec",
    "ConfigurationError",
    "ConstraintResidual",
    "ExtensionDoc",
    "FixtureExpectation",
    "ExtensionError",
    "FrameIndexError",
    "FrameModel",
    "GenerationError",
    "InertialDesc",
    "JointDesc",
    "JointKind",
    "JointLimits",
    "JointModel",
    "KinematicsCache",
    "list_fixtures",
    "load_fixture",
    "LinkDesc",
    "MobilityReport",
    "NamingConvention",
    "Placement",
    "ProjectOptions",
    "ProjectionError",
    "ProjectionStats",
    "ReplacementItem",
    "RobotModel",
    "Rotation",
    "SubstitutionError",
    "SubstitutionTolerances",
    "Twist",
    "UnknownFixtureError",
    "UrdfDocument",
    "UrdfParseError",
    "UrdfSyntaxError",
    "ValidationFinding",
    "ValidationReport",
    "XurdfError",
    "acceleration_bias",
    "adjoint",
    "build_model",
    "check_configuration",
    "crba",
    "exp_se3",
    "forward_kinematics",
    "frame_jacobian",
    "fixture_dir",
    "frame_placement",
    "generate_extension",
    "integrate",
    "jacobian",
    "log_se3",
    "log_se3_with_jacobian",
    "matched_configuration",
    "min_eigenvalue",
    "mobility_report",
    "neutral",
    "numerical_rank",
    "parse_extension",
    "parse_urdf",
    "project",
    "reduce_closure",
    "residual",
    "residual_rows",
    "residual_slices",
    "right_jacobian_se3",
    "singular_values",
    "serialize_extension",
    "serialize_urdf",
    "skew",
    "substitute_spherical",
    "validate_model",
]
