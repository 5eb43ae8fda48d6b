import math

import numpy as np
import pytest
from conftest import random_point, random_triangle

from errors import ConfigError, DomainError, OracleConvergenceError, UnbalancedVertexError
from estimators import (
    area_estimate_balanced,
    area_estimate_naive,
    area_integral_oracle,
    balanced_mean_bivector,
    balanced_numerator_alternative,
    convergence_study,
    generalized_balanced_bivector,
    jacobian_estimate,
    mean_bivector_naive,
    relaxation_ratio,
    schwarz_balanced_closed_form,
    schwarz_naive_closed_form,
    schwarz_shifted_triangle,
)
from ga import Multivector, isclose, norm, outer_product
from geom import OrientedTriangle2, Point2, balanced_vertex_choice, reflected_triangle
from partition import (
    Polygon2,
    lantern_area_closed_form,
    lantern_balanced_closed_form,
    refine_times,
    schwarz_lantern_partition,
    schwarz_local_triangles,
    triangulate,
)
from surfaces import (
    PlaneTransform,
    Rectangle,
    Surface,
    component_transform,
    make_custom,
    make_custom_transform,
    make_cylinder,
    make_flat,
    make_graph,
    make_identity_transform,
    tangent_bivector,
)

E12 = Multivector.blade(3, 1, 2)
E23 = Multivector.blade(3, 2, 3)
SCHWARZ_MS = [4, 8, 16, 32, 64, 128, 256]
QUARTER_CYLINDER = Polygon2.rect(0.0, math.pi / 2, 0.0, 1.0)


def equilateral(at, size):
    """꼭짓점 하나가 at에 있는 한 변 size의 정삼각형"""
    return OrientedTriangle2.from_coords(
        (at.chi1, at.chi2), (at.chi1 + size, at.chi2), (at.chi1 + size / 2, at.chi2 + size * math.sqrt(3) / 2)
    )


def smooth_surfaces():
    return [
        make_cylinder(1.0),
        make_graph("sin(u)*cos(v)"),
        make_custom(["u + v^2", "exp(u/2)*cos(v)", "u*v", "sin(u+v)"]),
    ]


def random_affine_surface(rng, dim):
    matrix = rng.uniform(-2.0, 2.0, size=(dim, 2))
    offset = rng.uniform(-1.0, 1.0, size=dim)
    components = [
        (lambda u, v, row=row, t=t: row[0] * u + row[1] * v + t) for row, t in zip(matrix, offset)
    ]
    surface = Surface("affine", components)
    exact = outer_product(Multivector.vector(matrix[:, 0]), Multivector.vector(matrix[:, 1]))
    return surface, exact


def random_affine_transform(rng):
    matrix = rng.uniform(-2.0, 2.0, size=(2, 2))
    offset = rng.uniform(-1.0, 1.0, size=2)
    transform = PlaneTransform(
        "affine",
        (
            lambda u, v: matrix[0, 0] * u + matrix[0, 1] * v + offset[0],
            lambda u, v: matrix[1, 0] * u + matrix[1, 1] * v + offset[1],
        ),
    )
    return transform, float(np.linalg.det(matrix)), float(np.sum(matrix**2))


# 슈바르츠 삼각형
@pytest.mark.parametrize("exponent", [1, 2, 3])
def test_schwarz_balanced_estimate_is_exact(exponent):
    cylinder = make_cylinder(1.0)
    for m in SCHWARZ_MS:
        estimate = balanced_mean_bivector(cylinder, schwarz_local_triangles(m, m**exponent), which="A")
        expected = schwarz_balanced_closed_form(m)
        assert norm(estimate.value - expected) <= 1e-12 * norm(expected)


def test_schwarz_balanced_error_is_second_order():
    cylinder = make_cylinder(1.0)
    table = convergence_study(
        lambda m: balanced_mean_bivector(cylinder, schwarz_local_triangles(m, m**3), which="A").value,
        SCHWARZ_MS,
        E23,
        parameter="m",
    )
    assert table.slope == pytest.approx(-2.0, abs=0.02)
    assert table.r_squared >= 0.999
    assert table.observed_order == pytest.approx(2.0, abs=0.02)
    assert list(table.frame.columns[:7]) == ["m", "est_e12", "ref_e12", "est_e13", "ref_e13", "est_e23", "ref_e23"]


@pytest.mark.parametrize("exponent", [1, 2, 3])
def test_schwarz_naive_matches_closed_form(exponent):
    cylinder = make_cylinder(1.0)
    for m in SCHWARZ_MS:
        naive = mean_bivector_naive(cylinder, schwarz_local_triangles(m, m**exponent))
        expected = schwarz_naive_closed_form(m, m**exponent)
        assert norm(naive - expected) <= 1e-9 * norm(expected)


def test_schwarz_naive_regimes():
    cylinder = make_cylinder(1.0)

    def naive(m, n):
        return mean_bivector_naive(cylinder, schwarz_local_triangles(m, n))

    # n = m: h1∧h2 성분이 π²/m로 줄어든다
    errors = [norm(naive(m, m) - E23) for m in SCHWARZ_MS]
    assert all(later < earlier for earlier, later in zip(errors, errors[1:]))
    assert errors[-1] == pytest.approx(math.pi**2 / 256, rel=1e-3)

    # n = m²: π² h1∧h2 + h2∧h3
    limit = naive(256, 256**2)
    assert limit.coeffs[0b011] == pytest.approx(math.pi**2, rel=1e-2)
    assert limit.coeffs[0b110] == pytest.approx(1.0, rel=1e-3)

    # n = m³: h1∧h2 성분이 m에 비례해 커진다
    growth = [naive(m, m**3).coeffs[0b011] for m in [16, 32, 64, 128, 256]]
    assert all(later >= 1.9 * earlier for earlier, later in zip(growth, growth[1:]))


def test_schwarz_non_mirror_point():
    cylinder = make_cylinder(1.0)
    triangle, d = schwarz_shifted_triangle(256, 256)
    denominator = triangle.double_signed_area - OrientedTriangle2(d, triangle.b, triangle.c).double_signed_area
    assert denominator == pytest.approx(2 * math.pi / (256 * 256), rel=1e-12)
    assert relaxation_ratio(triangle, d) == pytest.approx(0.5)
    errors = []
    for m in [16, 64, 256]:
        triangle, d = schwarz_shifted_triangle(m, m)
        errors.append(norm(generalized_balanced_bivector(cylinder, triangle, d) - E23))
    assert errors[-1] <= 1e-2
    assert errors[0] > errors[1] > errors[2]


def test_generalized_estimate_reduces_to_balanced(rng):
    for surface in smooth_surfaces():
        for _ in range(50):
            triangle = random_triangle(rng, scale=0.5)
            triangle = triangle.rotated(balanced_vertex_choice(triangle))
            estimate = balanced_mean_bivector(surface, triangle, which="A")
            general = generalized_balanced_bivector(surface, triangle, estimate.mirror.x_prime)
            assert isclose(general, estimate.value, atol=1e-10, rtol=1e-10)


def test_generalized_estimate_kappa_limit():
    triangle, d = schwarz_shifted_triangle(8, 8)
    far = Point2(40.0, 0.0)
    with pytest.raises(UnbalancedVertexError):
        generalized_balanced_bivector(make_cylinder(1.0), triangle, far, kappa=4.0)
    generalized_balanced_bivector(make_cylinder(1.0), triangle, d, kappa=4.0)


# 항등식
def test_balanced_numerator_identity(rng):
    for surface in smooth_surfaces():
        for _ in range(300):
            center = random_point(rng, scale=2.0)
            triangle = random_triangle(rng, scale=0.3).translated(center)
            estimate = balanced_mean_bivector(surface, triangle)
            numerator = estimate.value * estimate.plane_bivector_scalar
            alternative = balanced_numerator_alternative(surface, estimate)
            assert norm(numerator - alternative) <= 1e-10 * max(norm(alternative), 1e-3)


def test_mean_of_means_identity(rng):
    for surface in smooth_surfaces():
        for _ in range(300):
            center = random_point(rng, scale=2.0)
            triangle = random_triangle(rng, scale=0.3).translated(center)
            estimate = balanced_mean_bivector(surface, triangle)
            mean = (
                mean_bivector_naive(surface, estimate.triangle)
                + mean_bivector_naive(surface, reflected_triangle(estimate.mirror))
            ) * 0.5
            assert norm(mean - estimate.value) <= 1e-10 * max(1.0, norm(estimate.value))


def test_orientation_invariance(rng):
    for surface in smooth_surfaces():
        for _ in range(100):
            triangle = random_triangle(rng, scale=0.5)
            forward = balanced_mean_bivector(surface, triangle).value
            backward = balanced_mean_bivector(surface, triangle.reversed()).value
            assert isclose(backward, forward, atol=1e-12)
            assert isclose(mean_bivector_naive(surface, triangle.reversed()), mean_bivector_naive(surface, triangle))


# 아핀 정확성
def test_affine_surface_exactness(rng):
    for _ in range(1000):
        surface, exact = random_affine_surface(rng, int(rng.integers(2, 6)))
        triangle = random_triangle(rng)
        value = balanced_mean_bivector(surface, triangle).value
        assert norm(value - exact) <= 1e-11 * max(1.0, norm(exact))


def test_affine_exactness_for_every_balanced_vertex(rng):
    surface, exact = random_affine_surface(rng, 3)
    right = OrientedTriangle2.from_coords((0, 0), (2, 0), (0, 1))
    for which in "ABC":
        assert isclose(balanced_mean_bivector(surface, right, which=which, relaxed=True, kappa=10.0).value, exact)


def test_affine_jacobian_exactness(rng):
    for _ in range(1000):
        transform, det, scale = random_affine_transform(rng)
        triangle = random_triangle(rng)
        assert abs(jacobian_estimate(transform, triangle) - det) <= 1e-11 * max(1.0, scale)


def test_flat_surface_estimates_are_exact(rng):
    flat = make_flat()
    for _ in range(100):
        triangle = random_triangle(rng, scale=3.0)
        assert isclose(balanced_mean_bivector(flat, triangle).value, E12, atol=1e-12)
        assert isclose(mean_bivector_naive(flat, triangle), E12, atol=1e-12)


def test_coordinatewise_equivalence(rng):
    surface = make_custom(["u + v^2", "exp(u/2)*cos(v)", "u*v", "sin(u+v)"])
    for _ in range(100):
        triangle = random_triangle(rng, scale=0.5)
        value = balanced_mean_bivector(surface, triangle).value
        for j in range(1, 5):
            for k in range(j + 1, 5):
                jacobian = jacobian_estimate(component_transform(surface, j, k), triangle)
                assert jacobian == pytest.approx(value.coeffs[(1 << (j - 1)) | (1 << (k - 1))], abs=1e-12)


# 야코비안
def test_jacobian_examples(rng):
    unit_right = OrientedTriangle2.from_coords((0, 0), (1, 0), (0, 1))
    assert jacobian_estimate(make_identity_transform(), unit_right, which="A") == 1.0
    shear = make_custom_transform(["2*u+v", "u-v"])
    for _ in range(20):
        assert jacobian_estimate(shear, random_triangle(rng)) == pytest.approx(-3.0, rel=1e-12)


def test_jacobian_converges_with_first_order():
    transform = make_custom_transform(["u*u", "v"])
    at = Point2(1.0, 0.0)
    table = convergence_study(
        lambda size: jacobian_estimate(transform, equilateral(at, size)),
        [2.0**-k for k in range(1, 9)],
        2.0,
        parameter="diameter",
    )
    assert not table.increasing
    assert table.observed_order == pytest.approx(1.0, abs=0.05)
    assert table.frame["estimate"].iloc[-1] == pytest.approx(2.0, abs=1e-2)
    assert table.frame["abs_error"].iloc[0] == pytest.approx(1.5 * 0.5)


def test_jacobian_study_on_affine_map_is_exact():
    shear = make_custom_transform(["2*u+v", "u-v"])
    table = convergence_study(
        lambda size: jacobian_estimate(shear, equilateral(Point2(0.3, 0.4), size)),
        [2.0**-k for k in range(6)],
        -3.0,
        parameter="diameter",
    )
    assert table.exact
    assert table.order_label == "exact"
    assert math.isnan(table.frame["local_order"].iloc[0])


# 접평면 이중벡터 수렴
def test_graph_balanced_bivector_converges():
    surface = make_graph("u^2+v^2")
    at = Point2(0.3, 0.4)
    table = convergence_study(
        lambda size: balanced_mean_bivector(surface, equilateral(at, size)).value,
        [2.0**-k for k in range(2, 10)],
        tangent_bivector(surface, at),
        parameter="diameter",
    )
    assert table.observed_order >= 0.9
    assert table.frame["abs_error"].iloc[-1] < table.frame["abs_error"].iloc[0]


# 완화 모드와 정의역
def test_unbalanced_vertex_requires_relaxed_mode():
    obtuse = OrientedTriangle2.from_coords((0, 0), (3, 1), (-3, 1))
    flat = make_flat()
    with pytest.raises(UnbalancedVertexError):
        balanced_mean_bivector(flat, obtuse, which="B")
    estimate = balanced_mean_bivector(flat, obtuse, which="B", relaxed=True)
    assert estimate.relaxed
    assert isclose(estimate.value, E12)
    with pytest.raises(UnbalancedVertexError):
        balanced_mean_bivector(flat, obtuse, which="B", relaxed=True, kappa=1.5)
    assert not balanced_mean_bivector(flat, obtuse).relaxed


def test_reflection_outside_domain_raises():
    surface = make_cylinder(1.0).restricted(Rectangle(0, 1, 0, 1))
    triangle = OrientedTriangle2.from_coords((0.1, 0.1), (0.9, 0.1), (0.5, 0.5))
    with pytest.raises(DomainError):
        balanced_mean_bivector(surface, triangle)


# 넓이
def test_balanced_area_on_quarter_cylinder():
    cylinder = make_cylinder(1.0)
    base = triangulate(QUARTER_CYLINDER)
    table = convergence_study(
        lambda level: area_estimate_balanced(cylinder, refine_times(base, level)),
        range(7),
        math.pi / 2,
        parameter="mesh_norm",
        measure=lambda level: base.mesh_norm / 2**level,
    )
    errors = table.frame["abs_error"].to_list()
    assert all(later < earlier for earlier, later in zip(errors, errors[1:]))
    assert errors[-1] <= 1e-3
    assert table.observed_order >= 0.9


def test_flat_area_is_exact():
    flat = make_flat()
    polygon = Polygon2(((0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)))
    partition = refine_times(triangulate(polygon), 2)
    assert area_estimate_balanced(flat, partition) == pytest.approx(3.0, rel=1e-12)
    assert area_estimate_naive(flat, partition) == pytest.approx(3.0, rel=1e-12)


def test_graph_area_matches_oracle():
    surface = make_graph("u^2+v^2")
    square = Polygon2.rect(0, 1, 0, 1)
    partition = refine_times(triangulate(square), 7)
    assert partition.mesh_norm <= 1 / 64
    oracle = area_integral_oracle(surface, square)
    assert area_estimate_balanced(surface, partition) == pytest.approx(oracle, abs=1e-3)


def test_area_is_deterministic_across_threads():
    cylinder = make_cylinder(1.0)
    partition = refine_times(triangulate(QUARTER_CYLINDER), 3)
    single = area_estimate_balanced(cylinder, partition, threads=1)
    assert area_estimate_balanced(cylinder, partition, threads=4) == single
    assert area_estimate_naive(cylinder, partition, threads=4) == area_estimate_naive(cylinder, partition, threads=1)


# 적분 오라클
@pytest.mark.parametrize(
    "surface,polygon,expected",
    [
        (make_flat(), Polygon2.rect(0, 1, 0, 1), 1.0),
        (make_cylinder(2.0), Polygon2.rect(0, 1, 0, 1), 2.0),
        (make_graph("u"), Polygon2.rect(0, 1, 0, 1), math.sqrt(2.0)),
        (make_cylinder(1.0), QUARTER_CYLINDER, math.pi / 2),
    ],
)
def test_oracle_examples(surface, polygon, expected):
    assert area_integral_oracle(surface, polygon) == pytest.approx(expected, rel=1e-10)


def test_oracle_reports_best_estimate():
    surface = make_graph("sin(3*u)*cos(2*v)")
    square = Polygon2.rect(0, 1, 0, 1)
    reference = area_integral_oracle(surface, square)
    with pytest.raises(OracleConvergenceError) as info:
        area_integral_oracle(surface, square, rtol=0.0, max_depth=2)
    assert info.value.best_estimate == pytest.approx(reference, rel=1e-3)


# 슈바르츠 랜턴
def test_lantern_naive_area_grows_with_cubic_rows():
    cylinder = make_cylinder(1.0)
    areas = []
    for m in [4, 8]:
        lantern = schwarz_lantern_partition(m, m**3)
        area = area_estimate_naive(cylinder, lantern)
        assert area == pytest.approx(lantern_area_closed_form(m, m**3), rel=1e-9)
        areas.append(area)
    assert areas[1] > areas[0] > 2 * math.pi
    closed = [lantern_area_closed_form(m, m**3) for m in [4, 8, 16, 32]]
    assert all(later > earlier for earlier, later in zip(closed, closed[1:]))
    assert closed[-1] > 2 * (2 * math.pi)


def test_lantern_naive_area_converges_with_linear_rows():
    assert lantern_area_closed_form(256, 256) == pytest.approx(2 * math.pi, rel=1e-3)


@pytest.mark.parametrize("m,n", [(4, 64), (8, 8), (16, 4)])
def test_lantern_balanced_area_matches_closed_form(m, n):
    lantern = schwarz_lantern_partition(m, n)
    assert area_estimate_balanced(make_cylinder(1.0), lantern) == pytest.approx(
        lantern_balanced_closed_form(m, n), rel=1e-9
    )


def test_lantern_balanced_area_within_one_percent():
    estimate = area_estimate_balanced(make_cylinder(1.0), schwarz_lantern_partition(16, 4))
    assert estimate == pytest.approx(2 * math.pi, rel=1e-2)
    for m in [16, 32]:
        assert lantern_balanced_closed_form(m, m**3) == pytest.approx(2 * math.pi, rel=1e-2)


# 수렴 표
def test_convergence_study_rejects_empty_schedule():
    with pytest.raises(ConfigError):
        convergence_study(lambda m: 0.0, [], 1.0)


def test_convergence_study_with_callable_reference():
    table = convergence_study(lambda m: 1.0 + 1.0 / m**2, [2, 4, 8], lambda m: 1.0, parameter="m")
    assert table.frame["reference"].to_list() == [1.0, 1.0, 1.0]
    assert table.frame["local_order"].iloc[1] == pytest.approx(2.0)
    assert table.order_label == format(2.0, ".6g")
    text = table.to_csv()
    assert text.splitlines()[0] == "m,estimate,reference,abs_error,rel_error,local_order"
