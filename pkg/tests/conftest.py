import numpy as np
import pytest

from geom import OrientedTriangle2, Point2


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_triangle(rng, scale=1.0, min_area=1e-3):
    """넓이가 min_area·scale² 이상인 반시계 무작위 삼각형"""
    while True:
        coords = rng.uniform(-scale, scale, size=(3, 2))
        triangle = OrientedTriangle2.from_coords(*coords)
        if triangle.double_signed_area < 0:
            triangle = triangle.reversed()
        if triangle.area > min_area * scale * scale:
            return triangle


def random_point(rng, scale=1.0):
    x, y = rng.uniform(-scale, scale, size=2)
    return Point2(float(x), float(y))
