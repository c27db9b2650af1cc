"""Bundled robots: file integrity, expectations, and projection health."""

import json
import re

import numpy as np
import pytest

from xurdf import (
    ProjectOptions,
    UnknownFixtureError,
    fixture_dir,
    forward_kinematics,
    generate_extension,
    jacobian,
    list_fixtures,
    load_fixture,
    min_eigenvalue,
    mobility_report,
    crba,
    numerical_rank,
    parse_extension,
    parse_urdf,
    project,
    residual,
    serialize_extension,
    serialize_urdf,
    validate_model,
)

ALL = ("digit_leg", "four_bar", "gimbal", "kangaroo_leg")


def test_listing_contains_the_bundled_robots():
    assert list_fixtures() == ALL


def test_unknown_name_is_rejected():
    with pytest.raises(UnknownFixtureError) as err:
        load_fixture("hexapod")
    assert err.value.code == "UnknownFixture"
    assert "hexapod" in str(err.value)


@pytest.mark.parametrize("name", ALL)
def test_files_round_trip_byte_for_byte(name):
    path = fixture_dir(name)
    urdf_text = (path / "robot.urdf").read_text()
    yaml_text = (path / "robot.yaml").read_text()
    assert serialize_urdf(parse_urdf(urdf_text)) == urdf_text
    assert serialize_extension(parse_extension(yaml_text)) == yaml_text


@pytest.mark.parametrize("name", ALL)
def test_expectation_matches_the_mobility_report(name):
    model, expect = load_fixture(name)
    q = np.asarray(expect.configuration)
    report = mobility_report(model, q)
    assert report.n_q == expect.n_q
    assert report.n_v == expect.n_v
    assert report.constraint_rows == expect.constraint_rows
    assert report.rank == expect.rank
    assert report.n_actuated == expect.n_actuated
    assert report.internal_mobilities == expect.internal_mobilities
    assert report.net_dof == expect.net_dof
    assert not report.warnings
    assert report.residual_inf < expect.tolerance


@pytest.mark.parametrize("name", ALL)
def test_internal_mobility_arithmetic_holds(name):
    _, expect = load_fixture(name)
    assert expect.internal_mobilities == expect.n_v - expect.rank - expect.n_actuated


@pytest.mark.parametrize("name", ALL)
def test_sidecar_configuration_closes_every_loop(name):
    model, expect = load_fixture(name)
    cache = forward_kinematics(model, np.asarray(expect.configuration))
    assert residual(model, cache).inf_norm < 1e-10


@pytest.mark.parametrize("name", ALL)
def test_validation_warnings_match_the_sidecar(name):
    model, expect = load_fixture(name)
    report = validate_model(model)
    assert not report.errors
    assert tuple(sorted({f.code for f in report.warnings})) == expect.validation_warnings


def test_four_bar_has_one_redundant_planar_row():
    model, expect = load_fixture("four_bar")
    assert (expect.n_v, expect.constraint_rows, expect.rank) == (3, 3, 2)
    assert expect.n_actuated == 1 and expect.internal_mobilities == 0
    cache = forward_kinematics(model, np.asarray(expect.configuration))
    assert numerical_rank(jacobian(model, cache), 1e-8) == 2


def test_four_bar_projection_recovers_quickly():
    model, expect = load_fixture("four_bar")
    q = np.asarray(expect.configuration).copy()
    q[0] += 0.05
    projected, stats = project(model, q, ProjectOptions(tol=1e-10))
    assert stats.final_norm < 1e-10
    assert stats.iterations <= 20


def test_digit_leg_file_counts_by_raw_scan():
    text = (fixture_dir("digit_leg") / "robot.urdf").read_text()
    assert len(re.findall(r"<link\b", text)) == 13
    assert len(re.findall(r"<joint\b", text)) == 12
    doc = parse_urdf(text)
    assert len(doc.links) == 13
    assert len(doc.joints) == 12


def test_digit_leg_names_recover_three_loops_and_six_motors():
    doc = parse_urdf((fixture_dir("digit_leg") / "robot.urdf").read_text())
    gen = generate_extension(doc)
    assert [c.name for c in gen.closures] == ["ankle1", "ankle2", "knee"]
    assert all(c.ctype == "6D" for c in gen.closures)
    assert len(gen.actuated) == 6
    assert all(j.startswith("motor_") for j in gen.actuated)


def test_digit_leg_mass_matrix_is_positive_definite():
    model, expect = load_fixture("digit_leg")
    cache = forward_kinematics(model, np.asarray(expect.configuration))
    assert min_eigenvalue(crba(model, cache)) > 1e-8


@pytest.mark.parametrize("name", ("four_bar", "gimbal"))
def test_convention_named_fixtures_regenerate_their_extension(name):
    path = fixture_dir(name)
    doc = parse_urdf((path / "robot.urdf").read_text())
    generated = serialize_extension(generate_extension(doc))
    assert generated == (path / "robot.yaml").read_text()


def test_gimbal_collapses_to_a_single_spherical_joint():
    model, expect = load_fixture("gimbal")
    kinds = [j.kind.value for j in model.joints]
    assert kinds.count("spherical") == 1
    assert expect.n_q == 7 and expect.n_v == 6


def test_expect_sidecars_record_the_base_convention():
    for name in ALL:
        raw = json.loads((fixture_dir(name) / "expect.json").read_text())
        assert isinstance(raw["floating_base"], bool)
        assert len(raw["configuration"]) == raw["n_q"]
