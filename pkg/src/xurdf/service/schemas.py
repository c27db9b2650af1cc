"""Request and response bodies for the HTTP service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field


class ModelRequest(BaseModel):
    """Inputs shared by every endpoint that assembles a model."""

    urdf: str = Field(description="URDF XML document")
    extension: Optional[str] = Field(
        default=None, description="closure and actuation YAML document")
    floating_base: bool = Field(
        default=False, description="mount the root body on a free 6-DoF joint")
    auto_spherical: bool = Field(
        default=True,
        description="fuse detected massless revolute triples into spherical "
                    "joints in addition to the replacements named in the YAML")


class ValidateRequest(ModelRequest):
    pass


class InfoRequest(ModelRequest):
    configuration: Optional[list[float]] = Field(
        default=None,
        description="configuration to evaluate at; the projected neutral "
                    "configuration when omitted")
    layout: bool = Field(
        default=False, description="include the per-joint q/v layout table")


class CheckRequest(ModelRequest):
    configuration: Optional[list[float]] = None


class ProjectRequest(ModelRequest):
    configuration: Optional[list[float]] = Field(
        default=None, description="starting point; neutral when omitted")
    tol: float = Field(default=1e-8, gt=0.0,
                       description="stop when the residual inf-norm falls below this")
    max_iterations: int = Field(default=100, ge=1)


class GenYamlRequest(BaseModel):
    urdf: str = Field(description="URDF XML document")
    closure_pattern: Optional[str] = Field(
        default=None,
        description="regex with named groups type/id/endpoint matched "
                    "against link names")
    actuated_pattern: Optional[str] = Field(
        default=None, description="regex matched against joint names")


class Report(BaseModel):
    """The envelope every endpoint answers with, HTTP 200 in all cases.

    status is "error" exactly when the equivalent CLI invocation would
    exit nonzero; the payload then carries an error object with code,
    subject and message.
    """

    schema_version: Literal[1]
    command: str
    status: Literal["ok", "warnings", "error"]
    payload: dict


class Health(BaseModel):
    status: Literal["ok"]
    version: str
