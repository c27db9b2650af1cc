"""Author the bundled example robots and their expectation sidecars.

Run from the repository root:

    python3 tools/make_fixtures.py

Each mechanism is constructed programmatically, closed exactly at the
neutral configuration by composing placements, and verified against its
target mobility numbers before anything is written to
src/xurdf/fixtures/<name>/.  A failed check aborts the run.
"""

from __future__ import annotations

import json
import re
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from xurdf import (
    BuildOptions,
    ClosureSpec,
    ExtensionDoc,
    InertialDesc,
    JointDesc,
    JointLimits,
    LinkDesc,
    Placement,
    ReplacementItem,
    UrdfDocument,
    build_model,
    crba,
    forward_kinematics,
    generate_extension,
    jacobian,
    min_eigenvalue,
    mobility_report,
    neutral,
    numerical_rank,
    parse_extension,
    parse_urdf,
    residual,
    serialize_extension,
    serialize_urdf,
    singular_values,
    substitute_spherical,
    validate_model,
)

OUT_ROOT = Path(__file__).resolve().parents[1] / "src" / "xurdf" / "fixtures"

REV = JointLimits(lower=-3.0, upper=3.0, effort=150.0, velocity=20.0)
SLIDE = JointLimits(lower=-0.25, upper=0.25, effort=400.0, velocity=2.0)


def box(mass: float, size, center=(0.0, 0.0, 0.0)) -> InertialDesc:
    a, b, c = size
    f = mass / 12.0
    return InertialDesc(
        origin_xyz=tuple(float(v) for v in center),
        mass=float(mass),
        inertia=(f * (b * b + c * c), 0.0, 0.0, f * (a * a + c * c), 0.0, f * (a * a + b * b)),
    )


class Author:
    """Accumulates links and joints while tracking neutral world placements."""

    def __init__(self, root: str, root_inertial: InertialDesc | None):
        self.links: list[LinkDesc] = [LinkDesc(root, root_inertial)]
        self.joints: list[JointDesc] = []
        self.world: dict[str, Placement] = {root: Placement.identity()}

    def add(self, joint: str, jtype: str, parent: str, child: str,
            xyz=(0.0, 0.0, 0.0), rpy=(0.0, 0.0, 0.0), axis=None,
            limits: JointLimits | None = None,
            inertial: InertialDesc | None = None) -> None:
        xyz = tuple(float(v) for v in xyz)
        rpy = tuple(float(v) for v in rpy)
        self.joints.append(JointDesc(joint, jtype, parent, child, xyz, rpy, axis, limits))
        self.links.append(LinkDesc(child, inertial))
        self.world[child] = self.world[parent].compose(Placement.from_xyz_rpy(xyz, rpy))

    def add_matching(self, joint: str, jtype: str, parent: str, child: str,
                     target: Placement, axis=None,
                     limits: JointLimits | None = None,
                     inertial: InertialDesc | None = None) -> None:
        """Place the child so its neutral world frame equals ``target``."""
        rel = self.world[parent].inverse().compose(target)
        self.add(joint, jtype, parent, child, rel.translation,
                 rel.rotation.as_rpy(), axis, limits, inertial)

    def add_at_point(self, joint: str, jtype: str, parent: str, child: str,
                     target_point, axis=None, limits: JointLimits | None = None,
                     inertial: InertialDesc | None = None) -> None:
        """Place the child frame at a world point, keeping the parent rotation."""
        rel = self.world[parent].inverse().act(target_point)
        self.add(joint, jtype, parent, child, rel, (0.0, 0.0, 0.0), axis, limits, inertial)

    def doc(self, name: str) -> UrdfDocument:
        return UrdfDocument(name, tuple(self.links), tuple(self.joints))


# ---------------------------------------------------------------------------
# four_bar: planar parallelogram, one 3D closure, crank actuated.

def four_bar() -> tuple[UrdfDocument, ExtensionDoc]:
    z = (0.0, 0.0, 1.0)
    a = Author("base", box(4.0, (0.3, 0.3, 0.1)))
    bar_y = box(1.2, (0.04, 0.3, 0.04), (0.0, 0.15, 0.0))
    bar_x = box(0.8, (0.4, 0.04, 0.04), (0.2, 0.0, 0.0))
    a.add("motor_crank", "revolute", "base", "crank",
          axis=z, limits=REV, inertial=bar_y)
    a.add("crank_coupler", "revolute", "crank", "coupler", (0.0, 0.3, 0.0),
          axis=z, limits=REV, inertial=bar_x)
    a.add("rocker_pivot", "revolute", "base", "rocker", (0.4, 0.0, 0.0),
          axis=z, limits=REV, inertial=box(1.0, (0.04, 0.3, 0.04), (0.0, 0.15, 0.0)))
    a.add("coupler_tip", "fixed", "coupler", "closure_3d_loop_A", (0.4, 0.0, 0.0))
    a.add("rocker_tip", "fixed", "rocker", "closure_3d_loop_B", (0.0, 0.3, 0.0))
    doc = a.doc("four_bar")
    return doc, generate_extension(doc)


# ---------------------------------------------------------------------------
# gimbal: serial wrist ending in three concurrent massless-separated pivots
# that collapse to one spherical joint, tied back to the base by a 6D weld.

def gimbal() -> tuple[UrdfDocument, ExtensionDoc]:
    a = Author("base", box(3.0, (0.25, 0.25, 0.08)))
    a.add("j1", "revolute", "base", "link1", (0.0, 0.0, 0.1),
          axis=(0.0, 0.0, 1.0), limits=REV,
          inertial=box(0.9, (0.05, 0.05, 0.2), (0.0, 0.0, 0.05)))
    a.add("j2", "revolute", "link1", "link2", (0.2, 0.25, 0.1),
          axis=(0.0, 1.0, 0.0), limits=REV,
          inertial=box(0.7, (0.2, 0.05, 0.05), (0.1, 0.1, 0.0)))
    a.add("j3", "revolute", "link2", "link3", (0.15, 0.2, 0.25),
          axis=(1.0, 0.0, 0.0), limits=REV,
          inertial=box(0.7, (0.2, 0.05, 0.05), (0.05, 0.1, 0.1)))
    a.add("ball_x", "revolute", "link3", "gimbal_inner", (0.1, 0.3, -0.2),
          axis=(1.0, 0.0, 0.0), limits=REV)
    a.add("ball_y", "revolute", "gimbal_inner", "gimbal_outer",
          axis=(0.0, 1.0, 0.0), limits=REV)
    a.add("ball_z", "revolute", "gimbal_outer", "rod",
          axis=(0.0, 0.0, 1.0), limits=REV,
          inertial=box(0.6, (0.3, 0.05, 0.05), (0.12, 0.0, 0.0)))
    a.add("rod_tip", "fixed", "rod", "closure_6d_tie_A", (0.18, 0.04, 0.06))
    a.add_matching("base_socket", "fixed", "base", "closure_6d_tie_B",
                   a.world["closure_6d_tie_A"])
    doc = a.doc("gimbal")
    return doc, generate_extension(doc)


# ---------------------------------------------------------------------------
# digit_leg: floating pelvis, three revolute hip motors, knee and ankle
# balls, and three prismatic truss actuators between thigh and foot.  Each
# actuator carriage welds to a rod anchored on the foot by a ball.  The
# three slide axes plus the knee and ankle centers carry the nine position
# rows and the three rod balls carry the nine orientation rows, so the 18
# constraint rows are independent by construction.

def digit_leg() -> tuple[UrdfDocument, ExtensionDoc]:
    a = Author("pelvis", box(6.0, (0.25, 0.3, 0.15)))
    a.add("motor_hip_roll", "revolute", "pelvis", "hip_roll_link",
          (0.0, -0.09, 0.0), (0.05, 0.0, -0.1), axis=(1.0, 0.0, 0.0), limits=REV,
          inertial=box(0.8, (0.1, 0.08, 0.08)))
    a.add("motor_hip_yaw", "revolute", "hip_roll_link", "hip_yaw_link",
          (-0.01, -0.05, -0.04), (0.0, 0.08, 0.0), axis=(0.0, 0.0, 1.0), limits=REV,
          inertial=box(0.8, (0.08, 0.08, 0.1)))
    a.add("motor_hip_pitch", "revolute", "hip_yaw_link", "thigh",
          (0.03, -0.02, -0.05), (0.0, 0.0, 0.06), axis=(0.0, 1.0, 0.0), limits=REV,
          inertial=box(2.0, (0.08, 0.08, 0.4), (0.01, 0.0, -0.18)))
    a.add("knee_ball", "revolute", "thigh", "shin",
          (0.02, 0.01, -0.36), (0.1, -0.05, 0.2), axis=(0.0, 1.0, 0.0), limits=REV,
          inertial=box(1.5, (0.06, 0.06, 0.36), (0.0, 0.01, -0.16)))
    a.add("ankle_ball", "revolute", "shin", "foot",
          (-0.03, 0.02, -0.33), (-0.15, 0.1, 0.05), axis=(1.0, 0.0, 0.0), limits=REV,
          inertial=box(1.0, (0.18, 0.08, 0.06), (0.04, 0.0, -0.03)))
    carriage = box(0.25, (0.08, 0.08, 0.08), (0.02, 0.02, -0.02))
    rod = box(0.2, (0.03, 0.03, 0.4), (0.0, 0.0, -0.15))
    a.add("motor_knee", "prismatic", "thigh", "closure_6d_knee_B",
          (0.07, -0.05, -0.1), (0.3, -0.2, 0.4), axis=(0.0, 0.8, 0.6), limits=SLIDE,
          inertial=carriage)
    a.add("motor_ankle1", "prismatic", "thigh", "closure_6d_ankle1_B",
          (-0.06, 0.04, -0.14), (-0.25, 0.35, 0.15), axis=(0.6, 0.0, 0.8), limits=SLIDE,
          inertial=carriage)
    a.add("motor_ankle2", "prismatic", "thigh", "closure_6d_ankle2_B",
          (0.02, 0.08, -0.2), (0.2, 0.15, -0.3), axis=(0.8, 0.6, 0.0), limits=SLIDE,
          inertial=carriage)
    a.add_matching("rod_knee_ball", "revolute", "foot", "closure_6d_knee_A",
                   a.world["closure_6d_knee_B"],
                   axis=(0.0, 0.0, 1.0), limits=REV, inertial=rod)
    a.add_matching("rod_ankle1_ball", "revolute", "shin", "closure_6d_ankle1_A",
                   a.world["closure_6d_ankle1_B"],
                   axis=(0.0, 1.0, 0.0), limits=REV, inertial=rod)
    a.add_matching("rod_ankle2_ball", "revolute", "foot", "closure_6d_ankle2_A",
                   a.world["closure_6d_ankle2_B"],
                   axis=(1.0, 0.0, 0.0), limits=REV, inertial=rod)
    a.add("sole_joint", "fixed", "foot", "sole_frame", (0.05, 0.0, -0.06))
    doc = a.doc("digit_leg")
    gen = generate_extension(doc)
    balls = ("knee_ball", "ankle_ball", "rod_knee_ball",
             "rod_ankle1_ball", "rod_ankle2_ball")
    ext = ExtensionDoc(
        closures=gen.closures,
        actuated=gen.actuated,
        replacements=tuple(ReplacementItem((b,), "spherical") for b in balls),
    )
    return doc, ext


# ---------------------------------------------------------------------------
# kangaroo_leg: fixed pelvis, a twelve-revolute chain, six prismatic sliders,
# three 6D drive rods, three 3D push rods and six 3D couplers.

CHAIN = [
    ((0.0, 0.02, -0.08), (0.1, 0.0, -0.2), (0.0, 0.0, 1.0)),
    ((0.05, -0.03, -0.1), (0.0, 0.15, 0.0), (0.0, 1.0, 0.0)),
    ((-0.04, 0.02, -0.09), (-0.1, 0.0, 0.1), (1.0, 0.0, 0.0)),
    ((0.03, 0.04, -0.11), (0.0, -0.12, 0.08), (0.0, 1.0, 0.0)),
    ((0.02, -0.05, -0.1), (0.2, 0.0, 0.0), (0.0, 0.0, 1.0)),
    ((-0.03, 0.01, -0.12), (0.0, 0.1, -0.15), (1.0, 0.0, 0.0)),
    ((0.04, 0.03, -0.09), (-0.08, 0.05, 0.0), (0.0, 1.0, 0.0)),
    ((0.01, -0.02, -0.11), (0.0, -0.2, 0.1), (0.0, 0.0, 1.0)),
    ((-0.05, 0.04, -0.1), (0.12, 0.0, -0.05), (0.0, 1.0, 0.0)),
    ((0.03, 0.02, -0.08), (0.0, 0.08, 0.2), (1.0, 0.0, 0.0)),
    ((0.02, -0.04, -0.12), (-0.15, 0.1, 0.0), (0.0, 0.0, 1.0)),
    ((-0.02, 0.03, -0.09), (0.0, 0.0, 0.18), (0.0, 1.0, 0.0)),
]

SLIDERS = [
    ((0.1, 0.06, -0.02), (0.0, 0.3, 0.0), (0.0, 0.0, 1.0)),
    ((-0.08, 0.05, -0.03), (0.2, 0.0, 0.1), (0.6, 0.0, 0.8)),
    ((0.06, -0.09, -0.01), (0.0, -0.25, 0.0), (0.0, 0.8, 0.6)),
    ((-0.05, -0.07, -0.02), (0.1, 0.1, 0.0), (1.0, 0.0, 0.0)),
    ((0.09, -0.03, -0.04), (0.0, 0.0, -0.3), (0.0, 1.0, 0.0)),
    ((-0.1, 0.02, -0.05), (-0.2, 0.15, 0.0), (0.8, 0.0, -0.6)),
]

DRIVE_ANCHORS = ("seg4", "seg8", "seg12")
PUSH_ANCHORS = ("seg2", "seg6", "seg10")
COUPLER_PAIRS = (("seg1", "seg3"), ("seg3", "seg5"), ("seg5", "seg7"),
                 ("seg7", "seg9"), ("seg9", "seg11"), ("seg10", "seg12"))

UPPER_BALLS = [(0.02, 0.03, -0.06), (-0.01, 0.04, -0.05), (0.03, -0.02, -0.07)]
PUSH_BALLS = [(0.01, -0.02, -0.05), (-0.02, 0.03, -0.04), (0.02, 0.01, -0.06)]
COUPLER_BALLS = [(0.03, 0.04, -0.02), (-0.04, 0.02, -0.03), (0.02, -0.03, -0.04),
                 (-0.03, -0.02, -0.05), (0.04, 0.01, -0.03), (-0.02, 0.04, -0.04)]


def kangaroo_leg() -> tuple[UrdfDocument, ExtensionDoc]:
    a = Author("pelvis", box(8.0, (0.3, 0.35, 0.2)))
    seg = box(0.6, (0.05, 0.05, 0.14), (0.0, 0.0, -0.06))
    parent = "pelvis"
    for i, (xyz, rpy, axis) in enumerate(CHAIN, start=1):
        a.add(f"chain_{i}", "revolute", parent, f"seg{i}", xyz, rpy,
              axis=axis, limits=REV, inertial=seg)
        parent = f"seg{i}"
    slider = box(0.25, (0.06, 0.06, 0.12), (0.0, 0.0, -0.04))
    for i, (xyz, rpy, axis) in enumerate(SLIDERS, start=1):
        a.add(f"motor_{i}", "prismatic", "pelvis", f"slider{i}", xyz, rpy,
              axis=axis, limits=SLIDE, inertial=slider)
    rod = box(0.15, (0.025, 0.025, 0.35), (0.0, 0.0, -0.15))
    tie = box(0.08, (0.04, 0.04, 0.04))
    replacements: list[ReplacementItem] = []
    closures: list[ClosureSpec] = []
    for i, anchor in enumerate(DRIVE_ANCHORS, start=1):
        a.add(f"rod{i}_upper_ball", "revolute", f"slider{i}", f"drive_rod{i}",
              UPPER_BALLS[i - 1], axis=(0.0, 0.0, 1.0), limits=REV, inertial=rod)
        a.add_matching(f"rod{i}_lower_ball", "revolute", f"drive_rod{i}",
                       f"drive_tie{i}", a.world[anchor],
                       axis=(0.0, 1.0, 0.0), limits=REV, inertial=tie)
        replacements += [ReplacementItem((f"rod{i}_upper_ball",), "spherical"),
                         ReplacementItem((f"rod{i}_lower_ball",), "spherical")]
        closures.append(ClosureSpec(f"drive{i}", "6D", f"drive_tie{i}", anchor))
    for n, anchor in enumerate(PUSH_ANCHORS):
        i = n + 4
        a.add(f"rod{i}_ball", "revolute", f"slider{i}", f"push_rod{i}",
              PUSH_BALLS[n], axis=(1.0, 0.0, 0.0), limits=REV, inertial=rod)
        a.add_at_point(f"rod{i}_tip_weld", "fixed", f"push_rod{i}",
                       f"push_rod{i}_tip", a.world[anchor].translation)
        replacements.append(ReplacementItem((f"rod{i}_ball",), "spherical"))
        closures.append(ClosureSpec(f"push{i}", "3D", f"push_rod{i}_tip", anchor))
    for i, (la, lb) in enumerate(COUPLER_PAIRS, start=1):
        a.add(f"coupler{i}_ball", "revolute", la, f"coupler{i}",
              COUPLER_BALLS[i - 1], axis=(0.0, 1.0, 0.0), limits=REV, inertial=rod)
        a.add_at_point(f"coupler{i}_tip_weld", "fixed", f"coupler{i}",
                       f"coupler{i}_tip", a.world[lb].translation)
        replacements.append(ReplacementItem((f"coupler{i}_ball",), "spherical"))
        closures.append(ClosureSpec(f"sync{i}", "3D", f"coupler{i}_tip", lb))
    doc = a.doc("kangaroo_leg")
    ext = ExtensionDoc(
        closures=tuple(closures),
        actuated=tuple(f"motor_{i}" for i in range(1, 7)),
        replacements=tuple(replacements),
    )
    return doc, ext


# ---------------------------------------------------------------------------

EXPECTED = {
    "four_bar": dict(floating_base=False, n_q=3, n_v=3, constraint_rows=3,
                     rank=2, n_actuated=1, internal_mobilities=0, net_dof=1,
                     warnings=()),
    "gimbal": dict(floating_base=False, n_q=7, n_v=6, constraint_rows=6,
                   rank=6, n_actuated=0, internal_mobilities=0, net_dof=0,
                   warnings=("NoActuation",)),
    "digit_leg": dict(floating_base=True, n_q=33, n_v=27, constraint_rows=18,
                      rank=18, n_actuated=6, internal_mobilities=3, net_dof=9,
                      warnings=()),
    "kangaroo_leg": dict(floating_base=False, n_q=78, n_v=63, constraint_rows=45,
                         rank=45, n_actuated=6, internal_mobilities=12, net_dof=18,
                         warnings=()),
}

GENERATED_MATCH_YAML = ("four_bar", "gimbal")


def verify_and_write(name: str, doc: UrdfDocument, ext: ExtensionDoc) -> None:
    want = EXPECTED[name]
    urdf_text = serialize_urdf(doc)
    yaml_text = serialize_extension(ext)

    assert serialize_urdf(parse_urdf(urdf_text)) == urdf_text, f"{name}: urdf round trip"
    assert serialize_extension(parse_extension(yaml_text)) == yaml_text, f"{name}: yaml round trip"

    gen_a = serialize_extension(generate_extension(parse_urdf(urdf_text)))
    gen_b = serialize_extension(generate_extension(parse_urdf(urdf_text)))
    assert gen_a == gen_b, f"{name}: generation not deterministic"
    if name in GENERATED_MATCH_YAML:
        assert gen_a == yaml_text, f"{name}: yaml should equal the generated document"
    if name == "digit_leg":
        assert len(re.findall(r"<link\b", urdf_text)) == 13
        assert len(re.findall(r"<joint\b", urdf_text)) == 12
        gen = parse_extension(gen_a)
        assert len(gen.closures) == 3 and len(gen.actuated) == 6

    options = BuildOptions(floating_base=want["floating_base"])
    model = build_model(parse_urdf(urdf_text), parse_extension(yaml_text), options)
    model, subs = substitute_spherical(model)
    if name == "gimbal":
        assert len(subs) == 1, "gimbal: expected exactly one collapsed pivot triple"
    else:
        assert not subs, f"{name}: unexpected substitutions"

    q0 = neutral(model)
    cache = forward_kinematics(model, q0)
    res = residual(model, cache)
    assert res.inf_norm < 1e-12, f"{name}: open at neutral ({res.inf_norm:.3e})"

    K = jacobian(model, cache)
    sv = singular_values(K)
    rank = numerical_rank(K, 1e-8)
    assert rank == want["rank"], f"{name}: rank {rank}, wanted {want['rank']} (sv tail {sv[-4:]})"
    assert sv[rank - 1] > 1e-4, f"{name}: weakest retained singular value {sv[rank - 1]:.3e}"

    report = mobility_report(model, q0)
    got = {k: getattr(report, k) for k in
           ("n_q", "n_v", "constraint_rows", "rank", "n_actuated",
            "internal_mobilities", "net_dof")}
    wanted = {k: want[k] for k in got}
    assert got == wanted, f"{name}: mobility {got} != {wanted}"
    assert not report.warnings, f"{name}: mobility warnings {report.warnings}"

    validation = validate_model(model, q0)
    assert not validation.errors, f"{name}: validation errors {validation.errors}"
    codes = tuple(sorted({f.code for f in validation.warnings}))
    assert codes == tuple(sorted(want["warnings"])), f"{name}: warnings {codes}"

    mass = crba(model, cache)
    if model.n_v:
        eig = min_eigenvalue(mass)
        assert eig > 1e-8, f"{name}: mass matrix nearly singular ({eig:.3e})"

    out = OUT_ROOT / name
    out.mkdir(parents=True, exist_ok=True)
    (out / "robot.urdf").write_text(urdf_text)
    (out / "robot.yaml").write_text(yaml_text)
    expect = {
        "name": name,
        "floating_base": want["floating_base"],
        "n_q": report.n_q,
        "n_v": report.n_v,
        "constraint_rows": report.constraint_rows,
        "rank": report.rank,
        "n_actuated": report.n_actuated,
        "internal_mobilities": report.internal_mobilities,
        "net_dof": report.net_dof,
        "tolerance": 1e-8,
        "validation_warnings": list(codes),
        "configuration": [float(v) for v in q0],
    }
    (out / "expect.json").write_text(json.dumps(expect, indent=2) + "\n")
    print(f"{name}: ok (rank {rank}, sv_min {sv[rank - 1]:.3e}, "
          f"residual {res.inf_norm:.2e})")


def main() -> None:
    builders = {
        "four_bar": four_bar,
        "gimbal": gimbal,
        "digit_leg": digit_leg,
        "kangaroo_leg": kangaroo_leg,
    }
    for name, build in builders.items():
        doc, ext = build()
        verify_and_write(name, doc, ext)


if __name__ == "__main__":
    main()
