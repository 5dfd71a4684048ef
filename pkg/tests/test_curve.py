import math

import numpy as np
import pytest

from convex_peano import curve
from convex_peano import geometry as geo
from convex_peano.construction import PartitionLevel

STRIP_DIAMETER = math.sqrt(0.2**2 + 0.4**2)


def test_partition_shape(strip_partition):
    assert strip_partition.depth == 2
    assert strip_partition.level(2).M == 16
    with pytest.raises(ValueError):
        strip_partition.level(3)


def test_levels_must_multiply(strip_partition):
    level1, level2 = strip_partition.levels
    short = PartitionLevel(2, level2.souls, 16, 4)
    with pytest.raises(ValueError):
        curve.CurvePartition([level1, short], strip_partition.domain)
    with pytest.raises(ValueError):
        curve.CurvePartition([], strip_partition.domain)


def test_cell_index():
    assert curve.cell_index(0.0, 16) == 1
    assert curve.cell_index(1.0, 16) == 16
    assert curve.cell_index(0.5, 16) == 9


def test_curve_starts_and_ends_in_the_first_strip(strip_partition):
    start, end = curve.eval_f(strip_partition, 0.0), curve.eval_f(strip_partition, 1.0)
    assert start.K == 1 and end.K == 16
    assert start.point == pytest.approx((-0.3, 0.0))
    assert end.point == pytest.approx((-0.3, 0.0))
    assert start.error_radius == pytest.approx(STRIP_DIAMETER)


def test_cell_boundaries_double_the_error_radius(strip_partition):
    mid = curve.eval_f(strip_partition, 0.5)
    assert mid.K == 9
    assert mid.point == pytest.approx((0.3, 0.0))
    assert mid.error_radius == pytest.approx(2 * STRIP_DIAMETER)
    coarse = curve.eval_f(strip_partition, 0.5, j=1)
    assert coarse.error_radius == pytest.approx(2 * math.hypot(0.8, 0.4))
    with pytest.raises(ValueError):
        curve.eval_f(strip_partition, 1.5)


def test_image_of_the_whole_range_is_the_domain(strip_partition):
    image = curve.image_of_interval(strip_partition, 0.0, 1.0)
    assert (image.K_a, image.K_b) == (1, 16)
    assert image.collar == ()
    assert geo.equal_regions(image.region, strip_partition.domain)


def test_image_of_a_partial_interval(strip_partition):
    image = curve.image_of_interval(strip_partition, 0.1, 0.3)
    assert (image.K_a, image.K_b) == (2, 5)
    assert image.collar == (2, 5)
    assert image.region.area == pytest.approx(0.16)
    assert image.inner.area == pytest.approx(0.08)
    with pytest.raises(ValueError):
        curve.image_of_interval(strip_partition, 0.3, 0.1)


def test_interval_images_are_convex(strip_partition, rng):
    for _ in range(100):
        a, b = sorted(rng.uniform(0.0, 1.0, size=2))
        image = curve.image_of_interval(strip_partition, a, b)
        assert geo.region_hull_deficiency(image.region) <= 1e-9


def test_sample_curve(strip_partition):
    pts = curve.sample_curve(strip_partition, 5)
    np.testing.assert_allclose(pts[:, 0], [-0.3, 0.1, 0.3, -0.1, -0.3], atol=1e-12)
    with pytest.raises(ValueError):
        curve.sample_curve(strip_partition, 1)
    table = curve.sample_table(strip_partition, [0.0, 1.0])
    assert [p.K for p in table] == [1, 16]


def test_reports_pass_on_strips(strip_partition):
    assert curve.continuity_bound(strip_partition) == pytest.approx(2 * STRIP_DIAMETER)
    assert curve.continuity_report(strip_partition).passed
    report = curve.surjectivity_report(strip_partition)
    assert report.passed
    assert report.tolerances["spread"] == pytest.approx(STRIP_DIAMETER + 0.05 * math.hypot(0.8, 0.4))


def test_transform_moves_points_and_scales_radii(strip_partition):
    moved = curve.CurvePartition(
        strip_partition.levels,
        strip_partition.domain,
        geo.FrameTransform(scale=2.0, offset=(1.0, 0.0)),
    )
    p = curve.eval_f(moved, 0.0)
    assert p.point == pytest.approx((0.4, 0.0))
    assert p.error_radius == pytest.approx(2 * STRIP_DIAMETER)
    assert moved.original_domain().area == pytest.approx(4 * strip_partition.domain.area)
    assert curve.surjectivity_report(moved).passed


def _hops_within_bound(cp, n):
    """Consecutive samples of ``n`` stay within the continuity bound per crossed cell."""
    pts = curve.sample_curve(cp, n)
    steps = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    hops = max(1, math.ceil(cp.level(cp.depth).M / (n - 1)))
    return float(steps.max()), hops * curve.continuity_report(cp).tolerances["limit"]


@pytest.mark.slow
def test_built_curve_is_continuous_on_4096_samples(thin_levels, thin_domain):
    _, levels = thin_levels
    cp = curve.CurvePartition(levels, thin_domain, geo.IDENTITY)
    assert curve.continuity_report(cp).passed
    assert curve.surjectivity_report(cp).passed
    worst, limit = _hops_within_bound(cp, 4096)
    assert worst <= limit
