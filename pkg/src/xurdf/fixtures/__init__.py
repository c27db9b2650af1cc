"""Bundled example robots with verified mobility expectations.

Each fixture directory holds the robot description (``robot.urdf``), its
closure and actuation document (``robot.yaml``) and a sidecar
(``expect.json``) recording the numbers the built model must reproduce.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from ..builder import build_model, substitute_spherical, validate_model
from ..errors import BuildError, UnknownFixtureError
from ..extension import parse_extension
from ..model import BuildOptions, RobotModel
from ..urdf import parse_urdf

__all__ = [
    "FixtureExpectation",
    "fixture_dir",
    "list_fixtures",
    "load_fixture",
]

_ROOT = Path(__file__).resolve().parent


@dataclass(frozen=True)
class FixtureExpectation:
    """Target numbers for a bundled robot, mirroring the mobility report."""

    name: str
    floating_base: bool
    n_q: int
    n_v: int
    constraint_rows: int
    rank: int
    n_actuated: int
    internal_mobilities: int
    net_dof: int
    tolerance: float
    validation_warnings: tuple[str, ...]
    configuration: tuple[float, ...]  # satisfies every closure


def list_fixtures() -> tuple[str, ...]:
    return tuple(sorted(p.name for p in _ROOT.iterdir()
                        if p.is_dir() and (p / "robot.urdf").exists()))


def fixture_dir(name: str) -> Path:
    path = _ROOT / name
    if not (path / "robot.urdf").exists():
        raise UnknownFixtureError(
            f"no bundled robot named {name!r}; available: {', '.join(list_fixtures())}",
            subject=name)
    return path


def load_fixture(name: str) -> tuple[RobotModel, FixtureExpectation]:
    """Build a bundled robot and return it with its expectation sidecar.

    The model comes back with joint replacements applied and collapsible
    pivot triples already fused.  Building a fixture never produces
    validation errors; that invariant is re-checked here.
    """
    path = fixture_dir(name)
    raw = json.loads((path / "expect.json").read_text())
    expectation = FixtureExpectation(
        name=raw["name"],
        floating_base=raw["floating_base"],
        n_q=raw["n_q"],
        n_v=raw["n_v"],
        constraint_rows=raw["constraint_rows"],
        rank=raw["rank"],
        n_actuated=raw["n_actuated"],
        internal_mobilities=raw["internal_mobilities"],
        net_dof=raw["net_dof"],
        tolerance=raw["tolerance"],
        validation_warnings=tuple(raw["validation_warnings"]),
        configuration=tuple(raw["configuration"]),
    )
    urdf = parse_urdf((path / "robot.urdf").read_text())
    extension = parse_extension((path / "robot.yaml").read_text())
    options = BuildOptions(floating_base=expectation.floating_base)
    model = build_model(urdf, extension, options)
    model, _ = substitute_spherical(model)
    report = validate_model(model)
    if report.errors:
        raise BuildError(
            f"bundled robot {name!r} no longer builds cleanly: {report.errors}",
            code="FixtureInvalid", subject=name)
    return model, expectation
