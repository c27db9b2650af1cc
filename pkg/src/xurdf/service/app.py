"""HTTP front end over the shared command handlers.

Run with: uvicorn xurdf.service.app:app

Every analysis endpoint answers 200 with a report envelope; problems with
the submitted documents surface as status "error" inside the envelope, not
as HTTP errors. 422 happens only when the request body itself is malformed.
"""

from __future__ import annotations

from fastapi import FastAPI

from .. import __version__
from . import handlers
from .schemas import (
    CheckRequest,
    GenYamlRequest,
    Health,
    InfoRequest,
    ProjectRequest,
    Report,
    ValidateRequest,
)


def create_app() -> FastAPI:
    app = FastAPI(
        title="xurdf",
        version=__version__,
        description="Parsing, validation and kinematic analysis of URDF "
                    "models with a YAML closure and actuation extension.",
    )

    @app.get("/health", response_model=Health)
    def health() -> Health:
        return Health(status="ok", version=__version__)

    @app.post("/validate", response_model=Report)
    def validate(req: ValidateRequest) -> dict:
        return handlers.handle_validate(
            req.urdf, req.extension,
            floating_base=req.floating_base,
            auto_spherical=req.auto_spherical,
        ).report

    @app.post("/info", response_model=Report)
    def info(req: InfoRequest) -> dict:
        return handlers.handle_info(
            req.urdf, req.extension,
            floating_base=req.floating_base,
            auto_spherical=req.auto_spherical,
            configuration=req.configuration,
            layout=req.layout,
        ).report

    @app.post("/check", response_model=Report)
    def check(req: CheckRequest) -> dict:
        return handlers.handle_check(
            req.urdf, req.extension,
            floating_base=req.floating_base,
            auto_spherical=req.auto_spherical,
            configuration=req.configuration,
        ).report

    @app.post("/gen-yaml", response_model=Report)
    def gen_yaml(req: GenYamlRequest) -> dict:
        return handlers.handle_gen_yaml(
            req.urdf,
            closure_pattern=req.closure_pattern,
            actuated_pattern=req.actuated_pattern,
        ).report

    @app.post("/project", response_model=Report)
    def project(req: ProjectRequest) -> dict:
        return handlers.handle_project(
            req.urdf, req.extension,
            floating_base=req.floating_base,
            auto_spherical=req.auto_spherical,
            configuration=req.configuration,
            tol=req.tol,
            max_iterations=req.max_iterations,
        ).report

    return app


app = create_app()
