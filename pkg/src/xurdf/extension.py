"""Sidecar YAML extension: loop closures, actuation, joint replacements.

The document has three top-level keys, all optional on input and all present
on output:

    closed_loop:
    - name: knee
      type: 6D
      link_1: closure_6d_knee_A
      link_2: closure_6d_knee_B
    actuated:
    - motor_hip_pitch
    joint_replacements:
      knee_ball: spherical
      "j1,j2,j3": spherical

A replacement key with one joint name retypes that joint; a comma-separated
triple asks for three consecutive revolutes to be fused into one joint.
Unknown top-level keys are preserved and re-emitted deterministically.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import yaml

from .errors import ExtensionError, GenerationError
from .urdf import UrdfDocument

CLOSURE_TYPES = ("3D", "6D")

DEFAULT_CLOSURE_LINK_PATTERN = r"^closure_(?P<type>3d|6d)_(?P<id>.+)_(?P<endpoint>[AB])$"
DEFAULT_ACTUATED_JOINT_PATTERN = r"^motor_"


@dataclass(frozen=True)
class ClosureSpec:
    name: str
    ctype: str  # "3D" or "6D"
    link_a: str
    link_b: str


@dataclass(frozen=True)
class ReplacementItem:
    joints: tuple[str, ...]  # one name, or three consecutive joint names
    target: str


@dataclass(frozen=True)
class ExtensionDoc:
    closures: tuple[ClosureSpec, ...] = ()
    actuated: tuple[str, ...] = ()
    replacements: tuple[ReplacementItem, ...] = ()
    extras: tuple[tuple[str, object], ...] = ()

    @staticmethod
    def empty() -> "ExtensionDoc":
        return ExtensionDoc()


@dataclass(frozen=True)
class NamingConvention:
    """Regexes that recover the extension from link and joint names.

    closure_link must expose named groups ``type``, ``id`` and ``endpoint``
    (endpoint values A and B). actuated_joint is a plain match on joint names.
    """

    closure_link: str = DEFAULT_CLOSURE_LINK_PATTERN
    actuated_joint: str = DEFAULT_ACTUATED_JOINT_PATTERN


def _err(message: str, code: str, subject: str | None = None) -> ExtensionError:
    return ExtensionError(message, code=code, subject=subject)


def _parse_closure(item: object, index: int) -> ClosureSpec:
    subject = f"closed_loop[{index}]"
    if not isinstance(item, dict):
        raise _err(f"{subject}: expected a mapping", "BadValue", subject)
    for key in ("name", "type", "link_1", "link_2"):
        if key not in item:
            raise _err(f"{subject}: missing key {key!r}", "MissingKey",
                       f"{subject}/{key}")
    unknown = set(item) - {"name", "type", "link_1", "link_2"}
    if unknown:
        raise _err(f"{subject}: unknown keys {sorted(unknown)}", "UnknownKey", subject)
    name, ctype = item["name"], item["type"]
    if not isinstance(name, str) or not name:
        raise _err(f"{subject}: name must be a non-empty string", "BadValue",
                   f"{subject}/name")
    if ctype not in CLOSURE_TYPES:
        raise _err(f"{subject}: constraint type must be one of {CLOSURE_TYPES}, "
                   f"got {ctype!r}", "BadConstraintType", f"{subject}/type")
    for key in ("link_1", "link_2"):
        if not isinstance(item[key], str) or not item[key]:
            raise _err(f"{subject}: {key} must be a non-empty string", "BadValue",
                       f"{subject}/{key}")
    return ClosureSpec(name, ctype, item["link_1"], item["link_2"])


def _parse_replacement(key: object, value: object) -> ReplacementItem:
    subject = f"joint_replacements[{key!r}]"
    if not isinstance(key, str) or not key:
        raise _err(f"{subject}: key must be a string", "BadValue", subject)
    if not isinstance(value, str) or not value:
        raise _err(f"{subject}: target must be a string", "BadValue", subject)
    joints = tuple(p.strip() for p in key.split(","))
    if any(not p for p in joints) or len(joints) not in (1, 3):
        raise _err(f"{subject}: key must name one joint or a comma-separated "
                   f"triple", "BadValue", subject)
    return ReplacementItem(joints, value)


def parse_extension(text: str | bytes) -> ExtensionDoc:
    """Parse extension YAML. An empty document yields an empty extension."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ExtensionError(f"YAML syntax error: {exc}", code="YamlSyntax") from None
    if data is None:
        return ExtensionDoc.empty()
    if not isinstance(data, dict):
        raise _err("extension document must be a mapping", "BadValue", "document")

    closures: list[ClosureSpec] = []
    raw = data.get("closed_loop")
    if raw is not None:
        if not isinstance(raw, list):
            raise _err("closed_loop must be a list", "BadValue", "closed_loop")
        closures = [_parse_closure(item, i) for i, item in enumerate(raw)]
    seen: set[str] = set()
    for c in closures:
        if c.name in seen:
            raise _err(f"duplicate closure name {c.name!r}", "DuplicateClosureName",
                       f"closed_loop/{c.name}")
        seen.add(c.name)

    actuated: list[str] = []
    raw = data.get("actuated")
    if raw is not None:
        if not isinstance(raw, list) or not all(isinstance(x, str) and x for x in raw):
            raise _err("actuated must be a list of joint names", "BadValue", "actuated")
        actuated = list(raw)
    dup = {x for x in actuated if actuated.count(x) > 1}
    if dup:
        raise _err(f"duplicate actuated joints: {sorted(dup)}", "DuplicateName",
                   "actuated")

    replacements: list[ReplacementItem] = []
    raw = data.get("joint_replacements")
    if raw is not None:
        if not isinstance(raw, dict):
            raise _err("joint_replacements must be a mapping", "BadValue",
                       "joint_replacements")
        replacements = [_parse_replacement(k, v) for k, v in raw.items()]

    extras = tuple(sorted(
        (k, v) for k, v in data.items()
        if k not in ("closed_loop", "actuated", "joint_replacements")))
    return ExtensionDoc(tuple(closures), tuple(actuated), tuple(replacements), extras)


def serialize_extension(doc: ExtensionDoc) -> str:
    """Emit canonical YAML. All three main keys are always present."""
    data: dict = {
        "closed_loop": [
            {"name": c.name, "type": c.ctype, "link_1": c.link_a, "link_2": c.link_b}
            for c in doc.closures
        ],
        "actuated": list(doc.actuated),
        "joint_replacements": {",".join(r.joints): r.target for r in doc.replacements},
    }
    for key, value in sorted(doc.extras):
        data[key] = value
    return yaml.safe_dump(data, sort_keys=False, default_flow_style=False, width=100)


def generate_extension(urdf: UrdfDocument,
                       convention: NamingConvention = NamingConvention()) -> ExtensionDoc:
    """Recover the extension document from naming conventions in a URDF.

    Closure pairs are read off link names, actuated joints off joint names.
    Closures come out sorted by id; actuated joints keep document order.
    """
    try:
        link_re = re.compile(convention.closure_link)
        joint_re = re.compile(convention.actuated_joint)
    except re.error as exc:
        raise GenerationError(f"invalid naming pattern: {exc}", code="BadPattern") from None
    for group in ("type", "id", "endpoint"):
        if group not in link_re.groupindex:
            raise GenerationError(
                f"closure link pattern lacks the {group!r} named group",
                code="BadPattern")

    groups: dict[str, dict[str, tuple[str, str]]] = {}
    for link in urdf.links:
        m = link_re.match(link.name)
        if m is None:
            continue
        cid, ctype, endpoint = m.group("id"), m.group("type").upper(), m.group("endpoint")
        if endpoint in groups.setdefault(cid, {}):
            raise GenerationError(
                f"closure id {cid!r}: endpoint {endpoint} matched by both "
                f"{groups[cid][endpoint][0]!r} and {link.name!r}",
                code="AmbiguousPair", subject=cid)
        groups[cid][endpoint] = (link.name, ctype)

    closures = []
    for cid in sorted(groups):
        eps = groups[cid]
        if set(eps) != {"A", "B"}:
            have = ", ".join(f"{eps[e][0]} ({e})" for e in sorted(eps))
            raise GenerationError(
                f"closure id {cid!r} is missing an endpoint: have {have}",
                code="UnpairedClosureFrame", subject=cid)
        if eps["A"][1] != eps["B"][1]:
            raise GenerationError(
                f"closure id {cid!r}: endpoints disagree on constraint type",
                code="AmbiguousPair", subject=cid)
        closures.append(ClosureSpec(cid, eps["A"][1], eps["A"][0], eps["B"][0]))

    actuated = tuple(j.name for j in urdf.joints if joint_re.match(j.name))
    return ExtensionDoc(tuple(closures), actuated, (), ())
