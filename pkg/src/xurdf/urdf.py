"""URDF reading and writing.

The document model keeps origin vectors and inertia entries as the raw floats
found in the file, so that parse followed by serialize is byte-stable once a
file is in canonical form. Geometry and other elements this package does not
interpret (visual, collision, dynamics, transmissions, ...) are carried
through as canonical one-line XML strings.
"""

from __future__ import annotations

import math
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from xml.sax.saxutils import escape, quoteattr

from .errors import UrdfParseError, UrdfSyntaxError

Vec3 = tuple[float, float, float]

JOINT_TYPES = ("revolute", "continuous", "prismatic", "fixed", "floating", "planar")

# joint types that move along/about an axis
_AXIS_TYPES = ("revolute", "continuous", "prismatic", "planar")


@dataclass(frozen=True)
class InertialDesc:
    origin_xyz: Vec3 = (0.0, 0.0, 0.0)
    origin_rpy: Vec3 = (0.0, 0.0, 0.0)
    mass: float = 0.0
    # (ixx, ixy, ixz, iyy, iyz, izz) about the inertial origin, in its frame
    inertia: tuple[float, float, float, float, float, float] = (0.0,) * 6

    def inertia_matrix(self):
        import numpy as np
        ixx, ixy, ixz, iyy, iyz, izz = self.inertia
        return np.array([[ixx, ixy, ixz], [ixy, iyy, iyz], [ixz, iyz, izz]])


@dataclass(frozen=True)
class LinkDesc:
    name: str
    inertial: InertialDesc | None = None
    extras: tuple[str, ...] = ()


@dataclass(frozen=True)
class JointLimits:
    lower: float | None = None
    upper: float | None = None
    effort: float | None = None
    velocity: float | None = None


@dataclass(frozen=True)
class JointDesc:
    name: str
    type: str
    parent: str
    child: str
    origin_xyz: Vec3 = (0.0, 0.0, 0.0)
    origin_rpy: Vec3 = (0.0, 0.0, 0.0)
    axis: Vec3 | None = None
    limits: JointLimits | None = None
    extras: tuple[str, ...] = ()


@dataclass(frozen=True)
class UrdfDocument:
    name: str
    links: tuple[LinkDesc, ...]
    joints: tuple[JointDesc, ...]
    extras: tuple[str, ...] = ()

    def link_map(self) -> dict[str, LinkDesc]:
        return {l.name: l for l in self.links}

    def joint_map(self) -> dict[str, JointDesc]:
        return {j.name: j for j in self.joints}

    def root_link(self) -> str:
        children = {j.child for j in self.joints}
        roots = [l.name for l in self.links if l.name not in children]
        return roots[0]


def _err(message: str, code: str, subject: str | None = None) -> UrdfParseError:
    return UrdfParseError(message, code=code, subject=subject)


def _float(text: str, subject: str) -> float:
    try:
        v = float(text)
    except (TypeError, ValueError):
        raise _err(f"{subject}: not a number: {text!r}", "BadAttribute", subject) from None
    if math.isnan(v) or math.isinf(v):
        raise _err(f"{subject}: non-finite value {text!r}", "BadAttribute", subject)
    return v


def _vec3(text: str, subject: str) -> Vec3:
    parts = text.split()
    if len(parts) != 3:
        raise _err(f"{subject}: expected 3 numbers, got {text!r}", "BadAttribute", subject)
    return tuple(_float(p, subject) for p in parts)  # type: ignore[return-value]


def _blob(el: ET.Element) -> str:
    """Canonical one-line serialization of an element subtree."""
    attrs = "".join(f" {k}={quoteattr(v)}" for k, v in el.attrib.items())
    children = list(el)
    text = (el.text or "").strip()
    if not children and not text:
        return f"<{el.tag}{attrs}/>"
    inner = escape(text) if text else ""
    for c in children:
        inner += _blob(c)
        tail = (c.tail or "").strip()
        if tail:
            inner += escape(tail)
    return f"<{el.tag}{attrs}>{inner}</{el.tag}>"


def _origin(el: ET.Element | None, subject: str) -> tuple[Vec3, Vec3]:
    xyz = (0.0, 0.0, 0.0)
    rpy = (0.0, 0.0, 0.0)
    if el is not None:
        if "xyz" in el.attrib:
            xyz = _vec3(el.attrib["xyz"], f"{subject}/origin/xyz")
        if "rpy" in el.attrib:
            rpy = _vec3(el.attrib["rpy"], f"{subject}/origin/rpy")
    return xyz, rpy


def _parse_inertial(el: ET.Element, subject: str) -> InertialDesc:
    import numpy as np

    xyz, rpy = _origin(el.find("origin"), subject)
    mass_el = el.find("mass")
    if mass_el is None or "value" not in mass_el.attrib:
        raise _err(f"{subject}: inertial without mass value", "MissingAttribute",
                   f"{subject}/mass")
    mass = _float(mass_el.attrib["value"], f"{subject}/mass")
    if mass < 0.0:
        raise _err(f"{subject}: negative mass {mass}", "BadAttribute", f"{subject}/mass")
    inertia = (0.0,) * 6
    in_el = el.find("inertia")
    if in_el is not None:
        vals = []
        for key in ("ixx", "ixy", "ixz", "iyy", "iyz", "izz"):
            if key not in in_el.attrib:
                raise _err(f"{subject}: inertia missing {key}", "MissingAttribute",
                           f"{subject}/inertia/{key}")
            vals.append(_float(in_el.attrib[key], f"{subject}/inertia/{key}"))
        inertia = tuple(vals)  # type: ignore[assignment]
        desc = InertialDesc(xyz, rpy, mass, inertia)
        eigs = np.linalg.eigvalsh(desc.inertia_matrix())
        if eigs[0] < -1e-9 * max(1.0, abs(eigs[-1])):
            raise _err(f"{subject}: inertia has negative eigenvalue {eigs[0]:.3e}",
                       "BadAttribute", f"{subject}/inertia")
        return desc
    return InertialDesc(xyz, rpy, mass, inertia)


def _parse_link(el: ET.Element) -> LinkDesc:
    name = el.attrib.get("name")
    if not name:
        raise _err("link without a name", "MissingAttribute", "link/name")
    subject = f"link[{name}]"
    inertial = None
    extras = []
    for child in el:
        if child.tag == "inertial":
            if inertial is not None:
                raise _err(f"{subject}: repeated inertial", "BadAttribute",
                           f"{subject}/inertial")
            inertial = _parse_inertial(child, subject)
        else:
            extras.append(_blob(child))
    return LinkDesc(name, inertial, tuple(extras))


def _parse_limit(el: ET.Element, subject: str) -> JointLimits:
    def get(key):
        return _float(el.attrib[key], f"{subject}/limit/{key}") if key in el.attrib else None

    return JointLimits(get("lower"), get("upper"), get("effort"), get("velocity"))


def _parse_joint(el: ET.Element) -> JointDesc:
    name = el.attrib.get("name")
    if not name:
        raise _err("joint without a name", "MissingAttribute", "joint/name")
    subject = f"joint[{name}]"
    jtype = el.attrib.get("type")
    if jtype is None:
        raise _err(f"{subject}: missing type", "MissingAttribute", f"{subject}/type")
    if jtype not in JOINT_TYPES:
        raise _err(f"{subject}: unknown joint type {jtype!r}", "UnknownJointType",
                   subject)

    parent = child_link = None
    origin_el = axis_el = limit_el = None
    extras = []
    for child in el:
        if child.tag == "parent":
            parent = child.attrib.get("link")
        elif child.tag == "child":
            child_link = child.attrib.get("link")
        elif child.tag == "origin":
            origin_el = child
        elif child.tag == "axis":
            axis_el = child
        elif child.tag == "limit":
            limit_el = child
        else:
            extras.append(_blob(child))

    if not parent:
        raise _err(f"{subject}: missing parent link", "MissingAttribute",
                   f"{subject}/parent")
    if not child_link:
        raise _err(f"{subject}: missing child link", "MissingAttribute",
                   f"{subject}/child")

    xyz, rpy = _origin(origin_el, subject)

    axis: Vec3 | None = None
    if jtype in _AXIS_TYPES:
        axis = (1.0, 0.0, 0.0)
        if axis_el is not None:
            if "xyz" not in axis_el.attrib:
                raise _err(f"{subject}: axis without xyz", "MissingAttribute",
                           f"{subject}/axis/xyz")
            axis = _vec3(axis_el.attrib["xyz"], f"{subject}/axis/xyz")
        n = math.sqrt(sum(a * a for a in axis))
        if n < 1e-12:
            raise _err(f"{subject}: zero-length axis", "BadAttribute", f"{subject}/axis")
        axis = (axis[0] / n, axis[1] / n, axis[2] / n)

    limits: JointLimits | None = None
    if limit_el is not None:
        limits = _parse_limit(limit_el, subject)
    if jtype in ("revolute", "prismatic"):
        if limits is None or limits.lower is None or limits.upper is None:
            raise _err(f"{subject}: {jtype} joint requires position limits",
                       "MissingAttribute", f"{subject}/limit")
        if limits.lower > limits.upper:
            raise _err(f"{subject}: limit lower > upper", "BadAttribute",
                       f"{subject}/limit")
    if jtype == "continuous" and limits is not None and (
            limits.lower is not None or limits.upper is not None):
        raise _err(f"{subject}: continuous joint cannot carry position limits",
                   "UnexpectedAttribute", f"{subject}/limit")

    return JointDesc(name, jtype, parent, child_link, xyz, rpy, axis, limits,
                     tuple(extras))


def parse_urdf(text: str | bytes) -> UrdfDocument:
    """Parse URDF text into a document, checking tree structure."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        line, col = exc.position
        raise UrdfSyntaxError(f"XML syntax error: {exc.msg}", line, col) from None

    if root.tag != "robot":
        raise _err(f"top-level element must be <robot>, got <{root.tag}>",
                   "BadAttribute", "robot")
    name = root.attrib.get("name")
    if not name:
        raise _err("robot without a name", "MissingAttribute", "robot/name")

    links: list[LinkDesc] = []
    joints: list[JointDesc] = []
    extras: list[str] = []
    for el in root:
        if el.tag == "link":
            links.append(_parse_link(el))
        elif el.tag == "joint":
            joints.append(_parse_joint(el))
        else:
            extras.append(_blob(el))

    seen = set()
    for l in links:
        if l.name in seen:
            raise _err(f"duplicate link name {l.name!r}", "DuplicateName",
                       f"link[{l.name}]")
        seen.add(l.name)
    seen = set()
    for j in joints:
        if j.name in seen:
            raise _err(f"duplicate joint name {j.name!r}", "DuplicateName",
                       f"joint[{j.name}]")
        seen.add(j.name)

    link_names = {l.name for l in links}
    if not links:
        raise _err("robot has no links", "MissingAttribute", "robot")
    parents: dict[str, str] = {}
    for j in joints:
        for ref in (j.parent, j.child):
            if ref not in link_names:
                raise _err(f"joint[{j.name}] references unknown link {ref!r}",
                           "DanglingLinkRef", f"joint[{j.name}]")
        if j.child in parents:
            raise _err(
                f"link {j.child!r} is the child of both {parents[j.child]!r} "
                f"and {j.name!r}", "MultipleParents", f"link[{j.child}]")
        parents[j.child] = j.name

    roots = [l.name for l in links if l.name not in parents]
    if len(roots) > 1:
        raise _err(f"multiple root links: {', '.join(sorted(roots))}",
                   "MultipleRoots", "robot")
    if not roots:
        raise _err("no root link: every link has a parent", "UnreachableLink", "robot")

    children: dict[str, list[str]] = {l.name: [] for l in links}
    for j in joints:
        children[j.parent].append(j.child)
    reached = set()
    stack = [roots[0]]
    while stack:
        cur = stack.pop()
        if cur in reached:
            continue
        reached.add(cur)
        stack.extend(children[cur])
    unreached = link_names - reached
    if unreached:
        raise _err(f"links not reachable from root: {', '.join(sorted(unreached))}",
                   "UnreachableLink", "robot")

    return UrdfDocument(name, tuple(links), tuple(joints), tuple(extras))


def _fmt(x: float) -> str:
    return repr(float(x))


def _fmt3(v: Vec3) -> str:
    return f"{_fmt(v[0])} {_fmt(v[1])} {_fmt(v[2])}"


def serialize_urdf(doc: UrdfDocument) -> str:
    """Emit canonical URDF text. parse(serialize(doc)) reproduces doc."""
    out = ['<?xml version="1.0"?>', f"<robot name={quoteattr(doc.name)}>"]

    for link in doc.links:
        if link.inertial is None and not link.extras:
            out.append(f"  <link name={quoteattr(link.name)}/>")
            continue
        out.append(f"  <link name={quoteattr(link.name)}>")
        if link.inertial is not None:
            ine = link.inertial
            out.append("    <inertial>")
            out.append(f'      <origin xyz="{_fmt3(ine.origin_xyz)}" '
                       f'rpy="{_fmt3(ine.origin_rpy)}"/>')
            out.append(f'      <mass value="{_fmt(ine.mass)}"/>')
            ixx, ixy, ixz, iyy, iyz, izz = ine.inertia
            out.append(f'      <inertia ixx="{_fmt(ixx)}" ixy="{_fmt(ixy)}" '
                       f'ixz="{_fmt(ixz)}" iyy="{_fmt(iyy)}" iyz="{_fmt(iyz)}" '
                       f'izz="{_fmt(izz)}"/>')
            out.append("    </inertial>")
        for blob in link.extras:
            out.append(f"    {blob}")
        out.append("  </link>")

    for j in doc.joints:
        out.append(f"  <joint name={quoteattr(j.name)} type={quoteattr(j.type)}>")
        out.append(f'    <origin xyz="{_fmt3(j.origin_xyz)}" rpy="{_fmt3(j.origin_rpy)}"/>')
        out.append(f"    <parent link={quoteattr(j.parent)}/>")
        out.append(f"    <child link={quoteattr(j.child)}/>")
        if j.axis is not None:
            out.append(f'    <axis xyz="{_fmt3(j.axis)}"/>')
        if j.limits is not None:
            parts = []
            for key in ("lower", "upper", "effort", "velocity"):
                val = getattr(j.limits, key)
                if val is not None:
                    parts.append(f'{key}="{_fmt(val)}"')
            if parts:
                out.append(f"    <limit {' '.join(parts)}/>")
        for blob in j.extras:
            out.append(f"    {blob}")
        out.append("  </joint>")

    for blob in doc.extras:
        out.append(f"  {blob}")
    out.append("</robot>")
    return "\n".join(out) + "\n"
