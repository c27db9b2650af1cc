"""Model construction and model-level surgery.

build_model turns a URDF document plus the closure extension into a
RobotModel: fixed joints are merged into their supporting body (emitting a
named frame), every link contributes a frame, and single-joint replacements
retype revolute joints as spherical. Triple replacements are recorded on the
model and applied geometrically by substitute_spherical, which also
auto-detects chains of three massless concurrent revolutes.

reduce_closure exchanges a spherical joint plus a 6D closure for a rigid
attachment plus a 3D point closure, which describes the same constraint
manifold with three fewer velocity coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import BuildError, SubstitutionError
from .extension import ExtensionDoc
from .kinematics import crba, forward_kinematics, neutral
from .model import (
    BodyInertia,
    BuildOptions,
    ClosureModel,
    FrameModel,
    JOINT_SIZES,
    JointKind,
    JointModel,
    RobotModel,
    SubstitutionTolerances,
    ValidationFinding,
    ValidationReport,
    add_inertia,
    assign_layout,
    transform_inertia,
)
from .se3 import Placement, Rotation, Vec3
from .urdf import LinkDesc, UrdfDocument


def plane_basis_for(axis: Vec3) -> tuple[Vec3, Vec3]:
    """Deterministic orthonormal in-plane basis (e1, e2, axis right-handed)."""
    a = np.array(axis)
    helper = np.array([1.0, 0.0, 0.0]) if abs(a[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(a, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(a, e1)
    return tuple(e1), tuple(e2)


def _link_body(link: LinkDesc) -> BodyInertia:
    if link.inertial is None:
        return BodyInertia.zero()
    ine = link.inertial
    r = Rotation.from_rpy(*ine.origin_rpy).as_matrix()
    m = r @ ine.inertia_matrix() @ r.T
    return BodyInertia(ine.mass, ine.origin_xyz,
                       (m[0, 0], m[0, 1], m[0, 2], m[1, 1], m[1, 2], m[2, 2]))


def _origin_placement(xyz: Vec3, rpy: Vec3) -> Placement:
    return Placement.from_parts(Rotation.from_rpy(*rpy), xyz)


_RETYPABLE = ("revolute", "continuous")


def build_model(urdf: UrdfDocument, extension: ExtensionDoc | None = None,
                options: BuildOptions = BuildOptions()) -> RobotModel:
    """Assemble the reduced model from a URDF and its extension document."""
    ext = extension if extension is not None else ExtensionDoc.empty()
    urdf_joints = urdf.joint_map()
    link_map = urdf.link_map()

    retype: dict[str, JointKind] = {}
    triples: list[tuple[str, str, str]] = []
    for item in ext.replacements:
        subject = ",".join(item.joints)
        if item.target != "spherical":
            raise BuildError(
                f"replacement target {item.target!r} is not supported",
                code="UnsupportedReplacement", subject=subject)
        for name in item.joints:
            if name not in urdf_joints:
                raise BuildError(f"replacement names unknown joint {name!r}",
                                 code="ReplacementTargetMissing", subject=name)
        if len(item.joints) == 1:
            jd = urdf_joints[item.joints[0]]
            if jd.type not in _RETYPABLE:
                raise BuildError(
                    f"cannot retype {jd.type} joint {jd.name!r} as spherical",
                    code="UnsupportedReplacement", subject=jd.name)
            retype[jd.name] = JointKind.SPHERICAL
        else:
            for name in item.joints:
                if urdf_joints[name].type != "revolute":
                    raise BuildError(
                        f"triple replacement requires revolute joints, "
                        f"{name!r} is {urdf_joints[name].type}",
                        code="UnsupportedReplacement", subject=subject)
            triples.append(item.joints)  # type: ignore[arg-type]

    children: dict[str, list] = {l.name: [] for l in urdf.links}
    for jd in urdf.joints:
        children[jd.parent].append(jd)

    root = urdf.root_link()
    root_kind = JointKind.FLOATING if options.floating_base else JointKind.FIXED
    joints: list[JointModel] = [JointModel("root", root_kind, -1, Placement.identity())]
    bodies: list[BodyInertia] = [_link_body(link_map[root])]
    frames: list[FrameModel] = [FrameModel(root, 0, Placement.identity())]
    replaced_limits: list[tuple[str, object]] = []

    def visit(link_name: str, sup: int, offset: Placement) -> None:
        for jd in children[link_name]:
            x = offset.compose(_origin_placement(jd.origin_xyz, jd.origin_rpy))
            if jd.type == "fixed":
                bodies[sup] = add_inertia(
                    bodies[sup], transform_inertia(_link_body(link_map[jd.child]), x))
                frames.append(FrameModel(jd.child, sup, x))
                visit(jd.child, sup, x)
                continue
            kind = retype.get(jd.name, JointKind(jd.type))
            limits = jd.limits
            if jd.name in retype and limits is not None:
                replaced_limits.append((jd.name, limits))
                limits = None
            axis = jd.axis if kind in (JointKind.REVOLUTE, JointKind.CONTINUOUS,
                                       JointKind.PRISMATIC, JointKind.PLANAR) else None
            basis = plane_basis_for(axis) if kind is JointKind.PLANAR else None
            idx = len(joints)
            joints.append(JointModel(jd.name, kind, sup, x, axis, limits=limits,
                                     plane_basis=basis))
            bodies.append(_link_body(link_map[jd.child]))
            frames.append(FrameModel(jd.child, idx, Placement.identity()))
            visit(jd.child, idx, Placement.identity())

    visit(root, 0, Placement.identity())

    frame_index = {f.name: i for i, f in enumerate(frames)}
    closures = []
    for c in ext.closures:
        for link in (c.link_a, c.link_b):
            if link not in frame_index:
                raise BuildError(f"closure {c.name!r} references unknown link {link!r}",
                                 code="UnknownClosureFrame", subject=c.name)
        closures.append(ClosureModel(c.name, c.ctype,
                                     frame_index[c.link_a], frame_index[c.link_b]))

    joint_index = {j.name: i for i, j in enumerate(joints)}
    actuated = []
    for name in ext.actuated:
        if name in joint_index:
            actuated.append(joint_index[name])
        elif name in urdf_joints and urdf_joints[name].type == "fixed":
            raise BuildError(f"actuated joint {name!r} is fixed",
                             code="ActuatedJointFixed", subject=name)
        else:
            raise BuildError(f"actuated joint {name!r} does not exist",
                             code="UnknownActuatedJoint", subject=name)

    laid, n_q, n_v = assign_layout(joints)
    return RobotModel(urdf.name, tuple(laid), tuple(bodies), tuple(frames),
                      tuple(closures), tuple(actuated), n_q, n_v,
                      tuple(replaced_limits), tuple(triples))


_ZERO_MASS = 1e-9
_MIN_EIG = 1e-10


def validate_model(model: RobotModel, q=None) -> ValidationReport:
    """Static soundness findings: degenerate inertias and closure wiring."""
    findings: list[ValidationFinding] = []
    for i, j in enumerate(model.joints):
        body = model.bodies[i]
        if j.nv > 0 and body.mass < _ZERO_MASS:
            findings.append(ValidationFinding(
                "ZeroInertiaBody", "warning", j.name,
                f"the body carried by joint {j.name!r} has (near) zero mass; "
                f"its motion is unconstrained by dynamics"))
        elif body.mass >= _ZERO_MASS:
            eigs = np.linalg.eigvalsh(body.inertia_matrix())
            if eigs[0] + eigs[1] < eigs[2] * (1.0 - 1e-6):
                findings.append(ValidationFinding(
                    "InertiaTriangle", "warning", j.name,
                    f"rotational inertia of the body on joint {j.name!r} violates "
                    f"the triangle inequality ({eigs[0]:.3e} + {eigs[1]:.3e} < "
                    f"{eigs[2]:.3e})"))

    cache = forward_kinematics(model, neutral(model) if q is None else q)
    mass = crba(model, cache)
    if model.n_v and np.linalg.eigvalsh(mass)[0] < _MIN_EIG:
        findings.append(ValidationFinding(
            "InertiaNotPositive", "error", "model",
            "the joint-space mass matrix is not positive definite; some motion "
            "carries no inertia"))

    for c in model.closures:
        if model.frames[c.frame_a].joint == model.frames[c.frame_b].joint:
            findings.append(ValidationFinding(
                "ClosureFrameCoincident", "warning", c.name,
                f"closure {c.name!r} ties two frames on the same body"))

    if model.closures and not model.actuated:
        findings.append(ValidationFinding(
            "NoActuation", "warning", "model",
            "the model declares closures but no actuated joints"))
    return ValidationReport(tuple(findings))


@dataclass(frozen=True)
class SphericalSubstitution:
    joints: tuple[str, str, str]  # the fused revolute chain, root to leaf
    joint: str  # name of the created spherical joint
    forced: bool  # requested in the extension rather than auto-detected


def _chain_lines(model: RobotModel, i1: int, i2: int, i3: int):
    """The three rotation axes as (point, direction) lines in the j1 frame."""
    a2 = model.joints[i2].placement
    a3 = a2.compose(model.joints[i3].placement)
    lines = [((0.0, 0.0, 0.0), model.joints[i1].axis),
             (a2.translation, a2.rotation.rotate(model.joints[i2].axis)),
             (a3.translation, a3.rotation.rotate(model.joints[i3].axis))]
    return lines, a2, a3


def _concurrency_point(lines) -> tuple[np.ndarray, float]:
    """Least-squares common point of three lines, and the worst distance."""
    lhs = np.zeros((3, 3))
    rhs = np.zeros(3)
    for p, d in lines:
        proj = np.eye(3) - np.outer(d, d)
        lhs += proj
        rhs += proj @ p
    w = np.linalg.lstsq(lhs, rhs, rcond=None)[0]
    worst = 0.0
    for p, d in lines:
        r = w - p
        dist = np.linalg.norm(r - np.dot(r, d) * np.array(d))
        worst = max(worst, float(dist))
    return w, worst


def _substitution_failure(model, names, reason) -> SubstitutionError:
    return SubstitutionError(
        f"cannot fuse {', '.join(names)} into a spherical joint: {reason}",
        subject=",".join(names))


def _check_triple(model: RobotModel, i1: int, i2: int, i3: int,
                  tol: SubstitutionTolerances, forced: bool):
    """Verify applicability; returns the fusion point in the j1 frame or,
    for auto candidates that merely fail a geometric test, None."""
    names = tuple(model.joints[i].name for i in (i1, i2, i3))

    def fail(reason):
        if forced:
            raise _substitution_failure(model, names, reason)
        return None

    for i in (i1, i2, i3):
        if model.joints[i].kind is not JointKind.REVOLUTE:
            return fail(f"{model.joints[i].name!r} is not revolute")
        if i in model.actuated:
            return fail(f"{model.joints[i].name!r} is actuated")
    if model.joints[i2].parent != i1 or model.joints[i3].parent != i2:
        return fail("joints are not a parent-child chain")
    for i in (i1, i2):
        if model.bodies[i].mass >= tol.mass:
            return fail(f"intermediate body on {model.joints[i].name!r} has mass "
                        f"{model.bodies[i].mass}")
        kids = [k for k in range(len(model.joints)) if model.joints[k].parent == i]
        expected = [i2] if i == i1 else [i3]
        if kids != expected:
            return fail(f"{model.joints[i].name!r} carries other joints")
        referenced = {f for c in model.closures for f in (c.frame_a, c.frame_b)}
        for fi in referenced:
            if model.frames[fi].joint == i:
                return fail(f"a closure references a frame on {model.joints[i].name!r}")

    lines, _, _ = _chain_lines(model, i1, i2, i3)
    stacked = np.array([d for _, d in lines])
    sigma = np.linalg.svd(stacked, compute_uv=False)
    if sigma[-1] <= tol.axis_rank:
        return fail(f"axes do not span three directions (smallest singular "
                    f"value {sigma[-1]:.3e})")
    w, worst = _concurrency_point(lines)
    if worst >= tol.concurrency:
        return fail(f"axes are not concurrent (distance {worst:.3e})")
    return w


def _apply_substitution(model: RobotModel, i1: int, i2: int, i3: int,
                        w, forced: bool) -> tuple[RobotModel, SphericalSubstitution]:
    j1, j2, j3 = model.joints[i1], model.joints[i2], model.joints[i3]
    new_name = f"{j1.name}+{j2.name}+{j3.name}"
    placement = j1.placement.compose(
        Placement.from_parts(Rotation.identity(), tuple(w)))
    chain_zero = j1.placement.compose(j2.placement).compose(j3.placement)
    align = placement.inverse().compose(chain_zero)  # spherical frame -> old j3 frame

    limits = list(model.replaced_limits)
    for j in (j1, j2, j3):
        if j.limits is not None:
            limits.append((j.name, j.limits))

    new_sph = JointModel(new_name, JointKind.SPHERICAL, j1.parent, placement)
    old_to_new: dict[int, int] = {}
    joints: list[JointModel] = []
    bodies: list[BodyInertia] = []
    for i, j in enumerate(model.joints):
        if i in (i2, i3):
            continue
        old_to_new[i] = len(joints)
        if i == i1:
            joints.append(new_sph)
            bodies.append(transform_inertia(model.bodies[i3], align))
        else:
            joints.append(j)
            bodies.append(model.bodies[i])
    old_to_new[i3] = old_to_new[i1]

    def remap_joint(j: JointModel) -> JointModel:
        if j.parent == i3:
            return replace(j, parent=old_to_new[i1],
                           placement=align.compose(j.placement))
        return replace(j, parent=old_to_new[j.parent]) if j.parent >= 0 else j

    joints = [remap_joint(j) if j is not new_sph else j for j in joints]

    frames: list[FrameModel] = []
    dropped: dict[int, int] = {}  # old frame idx -> new frame idx
    for fi, f in enumerate(model.frames):
        if f.joint in (i1, i2):
            continue  # intermediate link frames cannot survive the fusion
        dropped[fi] = len(frames)
        if f.joint == i3:
            frames.append(FrameModel(f.name, old_to_new[i1],
                                     align.compose(f.placement)))
        else:
            frames.append(replace(f, joint=old_to_new[f.joint]))

    closures = tuple(ClosureModel(c.name, c.ctype, dropped[c.frame_a],
                                  dropped[c.frame_b]) for c in model.closures)
    actuated = tuple(old_to_new[a] for a in model.actuated)
    remaining = tuple(t for t in model.requested_triples
                      if t != (j1.name, j2.name, j3.name))

    laid, n_q, n_v = assign_layout(joints)
    new_model = RobotModel(model.name, tuple(laid), tuple(bodies), tuple(frames),
                           closures, actuated, n_q, n_v, tuple(limits), remaining)
    record = SphericalSubstitution((j1.name, j2.name, j3.name), new_name, forced)
    return new_model, record


def substitute_spherical(
        model: RobotModel,
        tolerances: SubstitutionTolerances = SubstitutionTolerances(),
        auto: bool = True) -> tuple[RobotModel, tuple[SphericalSubstitution, ...]]:
    """Fuse chains of three concurrent massless revolutes into spherical
    joints: extension-requested triples first, then auto-detected ones.
    Applying it twice changes nothing."""
    records: list[SphericalSubstitution] = []

    for triple in model.requested_triples:
        try:
            ids = tuple(model.joint_index(n) for n in triple)
        except KeyError as missing:
            raise _substitution_failure(model, triple,
                                        f"joint {missing} not in the model")
        w = _check_triple(model, *ids, tolerances, forced=True)
        model, rec = _apply_substitution(model, *ids, w, forced=True)
        records.append(rec)

    if auto:
        progress = True
        while progress:
            progress = False
            for i1 in range(len(model.joints)):
                if model.joints[i1].kind is not JointKind.REVOLUTE:
                    continue
                kids1 = [k for k in range(len(model.joints))
                         if model.joints[k].parent == i1]
                if len(kids1) != 1:
                    continue
                i2 = kids1[0]
                kids2 = [k for k in range(len(model.joints))
                         if model.joints[k].parent == i2]
                if len(kids2) != 1:
                    continue
                i3 = kids2[0]
                w = _check_triple(model, i1, i2, i3, tolerances, forced=False)
                if w is None:
                    continue
                model, rec = _apply_substitution(model, i1, i2, i3, w, forced=False)
                records.append(rec)
                progress = True
                break

    return model, tuple(records)


def matched_configuration(old: RobotModel, new: RobotModel,
                          substitutions: tuple[SphericalSubstitution, ...],
                          q_old) -> np.ndarray:
    """Map a configuration of the pre-substitution model onto the fused model
    so that forward kinematics of all surviving frames agree."""
    from .kinematics import _joint_motion, check_configuration

    q_old = check_configuration(old, q_old)
    q_new = neutral(new)
    by_record = {rec.joint: rec for rec in substitutions}
    for nj in new.joints:
        if nj.name in by_record:
            rec = by_record[nj.name]
            i1, i2, i3 = (old.joint_index(n) for n in rec.joints)
            chain = Placement.identity()
            for i in (i1, i2, i3):
                chain = chain.compose(old.joints[i].placement).compose(
                    _joint_motion(old.joints[i], q_old))
            zero = (old.joints[i1].placement.compose(old.joints[i2].placement)
                    .compose(old.joints[i3].placement))
            align = nj.placement.inverse().compose(zero)
            sph = nj.placement.inverse().compose(chain).compose(align.inverse())
            q_new[nj.q_offset:nj.q_offset + 4] = sph.rotation.as_quaternion()
        elif nj.nq:
            oj = old.joints[old.joint_index(nj.name)]
            q_new[nj.q_offset:nj.q_offset + nj.nq] = \
                q_old[oj.q_offset:oj.q_offset + oj.nq]
    return q_new


def reduce_closure(model: RobotModel, closure_name: str) -> RobotModel:
    """Replace one 6D closure whose near-side body hangs on a spherical joint
    by a rigid attachment plus a 3D closure between the two ball centers."""
    ci = next((i for i, c in enumerate(model.closures) if c.name == closure_name), None)
    if ci is None:
        raise BuildError(f"no closure named {closure_name!r}",
                         code="UnknownClosureFrame", subject=closure_name)
    closure = model.closures[ci]
    if closure.ctype != "6D":
        raise BuildError(f"closure {closure_name!r} is {closure.ctype}, not 6D",
                         code="NotReducible", subject=closure_name)

    fa, fb = closure.frame_a, closure.frame_b
    if model.joints[model.frames[fa].joint].kind is not JointKind.SPHERICAL:
        if model.joints[model.frames[fb].joint].kind is JointKind.SPHERICAL:
            fa, fb = fb, fa
        else:
            raise BuildError(
                f"closure {closure_name!r}: neither side hangs on a spherical joint",
                code="NotReducible", subject=closure_name)
    s = model.frames[fa].joint
    y = model.frames[fb].joint
    if s in model.actuated:
        raise BuildError(f"closure {closure_name!r}: the spherical joint is actuated",
                         code="NotReducible", subject=closure_name)
    anc = y
    while anc >= 0:
        if anc == s:
            raise BuildError(
                f"closure {closure_name!r}: target frame hangs below the "
                f"spherical joint", code="NotReducible", subject=closure_name)
        anc = model.joints[anc].parent

    # weld the rod body under the target side so the 6D constraint holds
    # identically, then constrain the ball centers to coincide
    x_yr = model.frames[fb].placement.compose(model.frames[fa].placement.inverse())

    old_to_new: dict[int, int] = {}
    joints: list[JointModel] = []
    bodies: list[BodyInertia] = []
    for i, j in enumerate(model.joints):
        if i == s:
            continue
        old_to_new[i] = len(joints)
        joints.append(j)
        bodies.append(model.bodies[i])
    ny = old_to_new[y]
    bodies[ny] = add_inertia(bodies[ny], transform_inertia(model.bodies[s], x_yr))

    def remap_joint(j: JointModel) -> JointModel:
        if j.parent == s:
            return replace(j, parent=ny, placement=x_yr.compose(j.placement))
        return replace(j, parent=old_to_new[j.parent]) if j.parent >= 0 else j

    joints = [remap_joint(j) for j in joints]

    frames: list[FrameModel] = []
    for f in model.frames:
        if f.joint == s:
            frames.append(FrameModel(f.name, ny, x_yr.compose(f.placement)))
        else:
            frames.append(replace(f, joint=old_to_new[f.joint]))

    names = {f.name for f in frames}
    name_a = f"{closure.name}_center_a"
    name_b = f"{closure.name}_center_b"
    while name_a in names or name_b in names:
        name_a += "_"
        name_b += "_"
    sp = model.joints[s]
    frames.append(FrameModel(name_a, old_to_new[sp.parent], sp.placement))
    idx_a = len(frames) - 1
    frames.append(FrameModel(name_b, ny, x_yr))
    idx_b = len(frames) - 1

    closures = list(model.closures)
    closures[ci] = ClosureModel(closure.name, "3D", idx_a, idx_b)
    actuated = tuple(old_to_new[a] for a in model.actuated)

    laid, n_q, n_v = assign_layout(joints)
    return RobotModel(model.name, tuple(laid), tuple(bodies), tuple(frames),
                      tuple(closures), actuated, n_q, n_v,
                      model.replaced_limits, model.requested_triples)
