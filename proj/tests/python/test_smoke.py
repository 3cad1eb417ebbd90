"""End-to-end smoke checks of the python module against closed forms."""

import math

import fractlab


def test_moving_branch_dimension_closed_form():
    fam = fractlab.AffineFamily.section4(4, 0.21)
    expected = math.log(5.0) / (-math.log(0.21))
    assert abs(fam.dimension([0.5]) - expected) < 1e-9


def test_uniform_pressure_identity():
    fam = fractlab.AffineFamily.uniform(3, 0.5)
    expected = math.log(3.0) + math.log(0.5)
    for depth in (1, 4, 7):
        assert abs(fam.pressure([0.5], depth, 1.0) - expected) < 1e-12


def test_cover_measure_closed_form():
    fam = fractlab.AffineFamily.cantor(2, 0.3)
    covers = fam.cover_measure([0.5], [1, 4])
    assert abs(covers[0] - 2.0 * 0.6) < 1e-12
    assert abs(covers[1] - 2.0 * 0.6**4) < 1e-12


def test_constant_address_hits_fixed_point():
    fam = fractlab.AffineFamily.uniform(2, 0.4)
    # Branch 0 of uniform(2, 0.4) has its fixed point at the cell center -0.5.
    assert abs(fam.code_point([0.5], [0], depth=200) - (-0.5)) < 1e-10


def test_closed_forms_and_counts():
    assert abs(fractlab.uniform_dimension(2, 0.5) - 1.0) < 1e-12
    assert fractlab.jet_dimension(2, 2) == 6
    assert fractlab.jet_dimension(1, 3) == 4


def test_rng_streams_are_deterministic():
    first = fractlab.rng_stream(7, 3, 0, 5)
    second = fractlab.rng_stream(7, 3, 0, 5)
    assert first == second
    assert len(first) == 5
    assert all(0.0 <= u < 1.0 for u in first)
    assert fractlab.rng_stream(7, 3, 1, 5) != first


def test_blender_summary():
    info = fractlab.blender_summary()
    assert info["branch_count"] == 3
    assert abs(info["base_entropy"] - math.log(3.0)) < 1e-15
    assert info["base_entropy"] > info["fiber_contraction_log"]
    assert info["vertical_fiber_dim"] == 1
    assert info["vertical_letters"] == 3
