"""Command handlers shared by the command line tool and the HTTP service.

Every handler returns a HandlerResult: a report dict with the fixed envelope
{schema_version, command, status, payload} plus the process exit code the
command line tool maps it to. The HTTP layer serializes the report as-is and
always answers 200; the exit code is a CLI concern.

Exit code contract:
  0  success, possibly with warnings (status "ok" or "warnings")
  1  the input documents could not be parsed (XML, YAML, bad pattern)
  2  the documents parsed but do not form a sound model, or the request
     references things the model does not have
  3  a numerical procedure failed (projection did not converge, rotation
     angle at the logarithm's cut locus)

status is "error" exactly when the exit code is nonzero.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from ..builder import BuildOptions, build_model, substitute_spherical, validate_model
from ..constraints import ROWS, ProjectOptions, mobility_report, project, residual
from ..errors import (
    AngleNearPiError,
    ClosureAngleError,
    ExtensionError,
    GenerationError,
    ProjectionError,
    UrdfParseError,
    XurdfError,
)
from ..extension import NamingConvention, generate_extension, parse_extension, serialize_extension
from ..kinematics import check_configuration, forward_kinematics, neutral
from ..model import RobotModel
from ..urdf import parse_urdf

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_MODEL = 2
EXIT_NUMERIC = 3

# residuals above this are reported as leaving the constraint manifold
_FEASIBLE = 1e-6


@dataclass(frozen=True)
class HandlerResult:
    report: dict
    exit_code: int


def make_report(command: str, status: str, payload: dict) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "status": status,
        "payload": payload,
    }


def report_schema() -> dict:
    """The published JSON schema every report conforms to."""
    text = resources.files("xurdf").joinpath("data/cli_report.schema.json").read_text("utf-8")
    return json.loads(text)


def error_payload(exc: XurdfError) -> dict:
    payload = {"code": exc.code, "subject": exc.subject, "message": str(exc)}
    # instances may carry a more specific code than their class; keep the
    # class-level family visible so callers can match on either
    category = type(exc).code
    if category != exc.code:
        payload["category"] = category
    return payload


def classify_error(exc: XurdfError) -> int:
    """Map an exception to the exit code class it belongs to."""
    if isinstance(exc, (ProjectionError, ClosureAngleError, AngleNearPiError)):
        return EXIT_NUMERIC
    if isinstance(exc, GenerationError):
        # an unusable regex is an input problem; unpaired or ambiguous
        # closure frames are a document-content problem
        return EXIT_INPUT if exc.code == "BadPattern" else EXIT_MODEL
    if isinstance(exc, (UrdfParseError, ExtensionError)):
        return EXIT_INPUT
    return EXIT_MODEL


def _run(command: str, body) -> HandlerResult:
    try:
        return body()
    except XurdfError as exc:
        code = classify_error(exc)
        return HandlerResult(
            make_report(command, "error", {"error": error_payload(exc)}), code)


def build_from_text(
    urdf_text: str,
    extension_text: str | None = None,
    *,
    floating_base: bool = False,
    auto_spherical: bool = True,
) -> RobotModel:
    """Parse both documents and assemble the reduced model.

    Replacements named in the extension are always applied; auto_spherical
    additionally fuses any detected massless revolute triples.
    """
    urdf = parse_urdf(urdf_text)
    extension = parse_extension(extension_text) if extension_text is not None else None
    model = build_model(urdf, extension, BuildOptions(floating_base=floating_base))
    model, _ = substitute_spherical(model, auto=auto_spherical)
    return model


def _resolve_configuration(model: RobotModel, configuration) -> tuple[np.ndarray, str, dict | None]:
    """Either take the caller's configuration or project the neutral one."""
    if configuration is not None:
        q = check_configuration(model, configuration)
        return q, "provided", None
    q, stats = project(model, neutral(model))
    return q, "projected-neutral", {
        "iterations": stats.iterations,
        "final_norm": stats.final_norm,
    }


def closure_residuals(model: RobotModel, q: np.ndarray) -> list[dict]:
    """Per-closure violation inf-norms at a configuration."""
    res = residual(model, forward_kinematics(model, q))
    out = []
    for c, (_, s) in zip(model.closures, res.slices):
        block = res.values[s]
        norm = float(np.max(np.abs(block))) if block.size else 0.0
        out.append({
            "name": c.name,
            "type": c.ctype,
            "rows": ROWS[c.ctype],
            "residual_norm": norm,
        })
    return out


def layout_rows(model: RobotModel) -> list[dict]:
    """One row per joint: where its coordinates live in q and v."""
    rows = []
    for i, j in enumerate(model.joints):
        rows.append({
            "joint": j.name,
            "kind": j.kind.value,
            "parent": model.joints[j.parent].name if j.parent >= 0 else None,
            "q_offset": j.q_offset,
            "nq": j.nq,
            "v_offset": j.v_offset,
            "nv": j.nv,
            "actuated": i in model.actuated,
        })
    return rows


def handle_validate(
    urdf_text: str,
    extension_text: str | None = None,
    *,
    floating_base: bool = False,
    auto_spherical: bool = True,
) -> HandlerResult:
    command = "validate"

    def body() -> HandlerResult:
        model = build_from_text(
            urdf_text, extension_text,
            floating_base=floating_base, auto_spherical=auto_spherical)
        rep = validate_model(model)
        payload: dict = {
            "model": model.name,
            "n_q": model.n_q,
            "n_v": model.n_v,
            "closures": len(model.closures),
            "findings": [
                {"code": f.code, "severity": f.severity,
                 "subject": f.subject, "message": f.message}
                for f in rep.findings
            ],
            "summary": {"errors": len(rep.errors), "warnings": len(rep.warnings)},
        }
        if extension_text is None and not model.closures:
            payload["note"] = "serial model, no extension"
        if rep.errors:
            return HandlerResult(make_report(command, "error", payload), EXIT_MODEL)
        status = "warnings" if rep.warnings else "ok"
        return HandlerResult(make_report(command, status, payload), EXIT_OK)

    return _run(command, body)


def handle_info(
    urdf_text: str,
    extension_text: str | None = None,
    *,
    floating_base: bool = False,
    auto_spherical: bool = True,
    configuration=None,
    layout: bool = False,
) -> HandlerResult:
    command = "info"

    def body() -> HandlerResult:
        model = build_from_text(
            urdf_text, extension_text,
            floating_base=floating_base, auto_spherical=auto_spherical)
        q, source, projection = _resolve_configuration(model, configuration)
        rep = mobility_report(model, q)
        payload: dict = {
            "model": model.name,
            "report": rep.as_dict(),
            "configuration": [float(x) for x in q],
            "configuration_source": source,
            "closures": closure_residuals(model, q),
        }
        if projection is not None:
            payload["projection"] = projection
        if layout:
            payload["layout"] = layout_rows(model)
        status = "warnings" if rep.warnings else "ok"
        return HandlerResult(make_report(command, status, payload), EXIT_OK)

    return _run(command, body)


def handle_check(
    urdf_text: str,
    extension_text: str | None = None,
    *,
    floating_base: bool = False,
    auto_spherical: bool = True,
    configuration=None,
) -> HandlerResult:
    command = "check"

    def body() -> HandlerResult:
        model = build_from_text(
            urdf_text, extension_text,
            floating_base=floating_base, auto_spherical=auto_spherical)
        q, source, projection = _resolve_configuration(model, configuration)
        closures = closure_residuals(model, q)
        max_norm = max((c["residual_norm"] for c in closures), default=0.0)
        payload: dict = {
            "model": model.name,
            "n_q": model.n_q,
            "n_v": model.n_v,
            "configuration_source": source,
            "closures": closures,
            "max_residual": max_norm,
        }
        if projection is not None:
            payload["projection"] = projection
        status = "ok"
        if max_norm > _FEASIBLE:
            payload["warnings"] = [
                f"closure residual {max_norm:.3e} exceeds {_FEASIBLE:g}; "
                f"the configuration is off the constraint manifold"
            ]
            status = "warnings"
        return HandlerResult(make_report(command, status, payload), EXIT_OK)

    return _run(command, body)


def handle_gen_yaml(
    urdf_text: str,
    *,
    closure_pattern: str | None = None,
    actuated_pattern: str | None = None,
) -> HandlerResult:
    command = "gen-yaml"

    def body() -> HandlerResult:
        urdf = parse_urdf(urdf_text)
        convention = NamingConvention()
        if closure_pattern is not None:
            convention = NamingConvention(
                closure_link=closure_pattern,
                actuated_joint=convention.actuated_joint)
        if actuated_pattern is not None:
            convention = NamingConvention(
                closure_link=convention.closure_link,
                actuated_joint=actuated_pattern)
        doc = generate_extension(urdf, convention)
        payload: dict = {
            "yaml": serialize_extension(doc),
            "closures": len(doc.closures),
            "actuated": len(doc.actuated),
            "replacements": len(doc.replacements),
        }
        if not doc.closures and not doc.actuated:
            payload["warnings"] = [
                "no link or joint names matched the closure or actuation patterns"
            ]
            return HandlerResult(make_report(command, "warnings", payload), EXIT_OK)
        return HandlerResult(make_report(command, "ok", payload), EXIT_OK)

    return _run(command, body)


def handle_project(
    urdf_text: str,
    extension_text: str | None = None,
    *,
    floating_base: bool = False,
    auto_spherical: bool = True,
    configuration=None,
    tol: float = 1e-8,
    max_iterations: int = 100,
) -> HandlerResult:
    command = "project"

    def body() -> HandlerResult:
        model = build_from_text(
            urdf_text, extension_text,
            floating_base=floating_base, auto_spherical=auto_spherical)
        if configuration is not None:
            q0 = check_configuration(model, configuration)
        else:
            q0 = neutral(model)
        options = ProjectOptions(tol=tol, max_iters=max_iterations)
        try:
            q, stats = project(model, q0, options)
        except ProjectionError as exc:
            payload = {
                "error": error_payload(exc),
                "final_norm": exc.final_norm,
                "tolerance": tol,
            }
            if exc.stats is not None:
                payload["iterations"] = exc.stats.iterations
            return HandlerResult(make_report(command, "error", payload), EXIT_NUMERIC)
        payload = {
            "iterations": stats.iterations,
            "final_norm": stats.final_norm,
            "tolerance": tol,
            "already_feasible": stats.iterations == 0,
            "configuration": [float(x) for x in q],
        }
        return HandlerResult(make_report(command, "ok", payload), EXIT_OK)

    return _run(command, body)
