import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from shapely.geometry import MultiPoint, Polygon

from convex_peano import geometry as geo


def test_clean_drops_slivers_and_orients():
    assert geo.clean(geo.rectangle(0, 0, 1e-6, 1e-6)).is_empty
    cw = Polygon([(0, 0), (0, 1), (1, 1), (1, 0)])
    assert geo.clean(cw).exterior.is_ccw


def test_clip_halfplane_is_exact():
    t = geo.rectangle(0, 0, 1, 1)
    assert geo.clip_halfplane(t, "x", 0.4, "<=").area == pytest.approx(0.4)
    assert geo.clip_halfplane(t, "y", 0.25, ">=").area == pytest.approx(0.75)
    assert geo.clip_halfplane(t, "x", -0.5, "<=").is_empty
    assert geo.equal_regions(geo.clip_halfplane(t, "x", 2.0, "<="), t)


def test_clip_halfplane_rejects_bad_arguments():
    t = geo.rectangle(0, 0, 1, 1)
    with pytest.raises(ValueError):
        geo.clip_halfplane(t, "z", 0.5, "<=")
    with pytest.raises(ValueError):
        geo.clip_halfplane(t, "x", 0.5, "<")


def test_clip_disc_stays_inside_the_disc():
    t = geo.rectangle(-1, -1, 1, 1)
    clipped = geo.clip_disc(t, geo.Disc((0.0, 0.0), 0.5))
    radii = np.hypot(*np.asarray(clipped.exterior.coords).T)
    assert radii.max() <= 0.5 + 1e-12
    with pytest.raises(ValueError):
        geo.clip_disc(t, geo.Disc((0.0, 0.0), 0.5), n_arc=4)


def test_disc_polygons_bracket_the_disc():
    d = geo.Disc((0.2, -0.1), 0.3)
    inner, outer = d.polygon(32), d.polygon(32, circumscribed=True)
    assert inner.area < math.pi * 0.09 < outer.area
    assert outer.covers(inner)
    with pytest.raises(ValueError):
        geo.Disc((0.0, 0.0), 0.0)


def test_arc_tolerance():
    assert geo.arc_tolerance(2.0, 64) == pytest.approx(2.0 * (1 - math.cos(math.pi / 64)))


def test_extent_modes():
    t = geo.rectangle(0, 0, 0.3, 0.4)
    assert geo.extent(t, "x") == pytest.approx(0.3)
    assert geo.extent(t, "y") == pytest.approx(0.4)
    assert geo.extent(t) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        geo.extent(Polygon())


def test_hausdorff_of_shifted_squares():
    a = geo.rectangle(0, 0, 1, 1)
    b = geo.rectangle(0.1, 0, 1.1, 1)
    assert geo.hausdorff(a, b) == pytest.approx(0.1)
    assert geo.hausdorff(a, Polygon()) == math.inf
    assert geo.equal_regions(a, geo.rectangle(0, 0, 1 + 1e-9, 1))
    assert not geo.equal_regions(a, b)


def test_min_dist_projection():
    t = geo.rectangle(0, 0, 1, 1)
    assert geo.min_dist_projection(t, (2.0, 0.5)) == pytest.approx((1.0, 0.5))
    with pytest.raises(ValueError):
        geo.min_dist_projection(t, (0.5, 0.5))


def test_separated_and_covers_within():
    a, b = geo.rectangle(0, 0, 1, 1), geo.rectangle(1.1, 0, 2, 1)
    assert geo.separated(a, b)
    assert not geo.separated(a, geo.rectangle(1, 0, 2, 1))
    assert geo.covers_within(a, geo.rectangle(0, 0, 1.05, 1), 0.05 + 1e-12)
    assert not geo.covers_within(a, b, 0.05)


def test_convex_union_snaps_to_the_hull():
    u = geo.convex_union(geo.rectangle(0, 0, 1, 1), geo.rectangle(1, 0, 2, 1))
    assert isinstance(u, Polygon)
    assert len(u.exterior.coords) == 5
    apart = geo.convex_union(geo.rectangle(0, 0, 1, 1), geo.rectangle(2, 0, 3, 1))
    assert geo.region_hull_deficiency(apart) > 0.5


def test_fingerprint_ignores_vertex_order():
    a = geo.region([(0, 0), (1, 0), (1, 1), (0, 1)])
    b = geo.region([(1, 1), (0, 1), (0, 0), (1, 0)])
    assert geo.fingerprint(a) == geo.fingerprint(b)
    assert geo.fingerprint(a) != geo.fingerprint(geo.rectangle(0, 0, 1, 2))
    assert geo.fingerprint(Polygon()) == "empty"


def test_hull_deficiency_oracle():
    square = geo.rectangle(0, 0, 1, 1)
    assert geo.hull_deficiency(geo.sample_region(square, 0.02)).area <= 1e-9
    ell = geo.region([(0, 0), (1, 0), (1, 0.3), (0.3, 0.3), (0.3, 1), (0, 1)])
    assert geo.hull_deficiency(geo.sample_region(ell, 0.02)).area > 0.1
    assert geo.hull_deficiency([(0, 0), (1, 1), (2, 2)]).degenerate
    with pytest.raises(ValueError):
        geo.hull_deficiency([(0, 0), (1, 1)])


def test_frame_transform_inverse():
    f = geo.FrameTransform(scale=2.5, offset=(1.0, -3.0), axis_swap=True)
    pts = np.array([[0.1, 0.2], [-0.3, 0.4]])
    back = f.inverse().apply_points(f.apply_points(pts))
    np.testing.assert_allclose(back, pts, atol=1e-12)
    assert geo.FrameTransform.from_dict(f.to_dict()) == f


@pytest.mark.parametrize("swap,nx,ny", [(True, True, False), (True, False, True), (False, True, True), (True, True, True)])
def test_every_frame_symmetry_inverts(swap, nx, ny):
    f = geo.FrameTransform(0.5, (0.2, -0.1), swap, nx, ny)
    pts = np.array([[0.1, 0.2], [-0.3, 0.4], [0.0, -0.25]])
    np.testing.assert_allclose(f.inverse().apply_points(f.apply_points(pts)), pts, atol=1e-12)
    np.testing.assert_allclose(f.apply_points(f.inverse().apply_points(pts)), pts, atol=1e-12)
    # swap followed by x negation is a quarter turn
    if (swap, nx, ny) == (True, True, False):
        np.testing.assert_allclose(f.linear() @ [1.0, 0.0], [0.0, 1.0])
        assert f.inverse().y_negate and f.inverse().axis_swap and not f.inverse().x_negate


def test_normalize_domain():
    raw = geo.rectangle(0, 0, 1, 1)
    domain, back = geo.normalize_domain(raw)
    assert geo.extent(domain) == pytest.approx(1.0)
    assert domain.centroid.x == pytest.approx(0.0, abs=1e-12)
    assert domain.centroid.y == pytest.approx(0.0, abs=1e-12)
    assert geo.equal_regions(geo.apply_transform(domain, back), raw, 1e-9)
    small = geo.rectangle(-0.3, -0.3, 0.3, 0.3)
    assert geo.normalize_domain(small)[1].is_identity()


def test_normalize_domain_rejects_non_convex():
    ell = geo.region([(0, 0), (1, 0), (1, 0.3), (0.3, 0.3), (0.3, 1), (0, 1)])
    with pytest.raises(ValueError, match="convex"):
        geo.normalize_domain(ell)
    with pytest.raises(ValueError):
        geo.normalize_domain(Polygon())


def _split(poly, axis, lo, hi):
    """Two overlapping pieces of ``poly`` whose differences are ``hi - lo`` apart."""
    r = geo.clip_halfplane(poly, axis, hi, "<=")
    s = geo.clip_halfplane(poly, axis, lo, ">=")
    return r, s


def test_union_of_overlapping_pieces_with_separated_differences_is_convex():
    rng = np.random.default_rng(11)
    checked = 0
    while checked < 500:
        poly = geo.clean(MultiPoint(rng.uniform(-0.5, 0.5, size=(8, 2))).convex_hull)
        if poly.is_empty or poly.area < 1e-2:
            continue
        axis = "x" if checked % 2 else "y"
        i0, i1 = (0, 2) if axis == "x" else (1, 3)
        a, b = poly.bounds[i0], poly.bounds[i1]
        lo = a + (b - a) * rng.uniform(0.2, 0.5)
        hi = lo + (b - a) * rng.uniform(0.05, 0.3)
        r, s = _split(poly, axis, lo, hi)
        assert not geo.is_empty(r.intersection(s))
        assert geo.separated(geo.clean(r.difference(s)), geo.clean(s.difference(r)))
        u = geo.convex_union(r, s)
        assert geo.region_hull_deficiency(u) <= 1e-9
        assert u.area == pytest.approx(poly.area, rel=1e-9)
        checked += 1


@settings(max_examples=40, deadline=None)
@given(
    st.lists(
        st.tuples(st.floats(-0.5, 0.5), st.floats(-0.5, 0.5)),
        min_size=5,
        max_size=12,
    )
)
def test_sampled_convex_hulls_have_no_deficiency(points):
    poly = geo.clean(MultiPoint(points).convex_hull)
    if poly.is_empty or poly.area < 1e-2:
        return
    spacing = geo.extent(poly) / 25.0
    if poly.buffer(-2.0 * spacing).is_empty:
        return
    assert geo.hull_deficiency(geo.sample_region(poly, spacing)).area <= 1e-9


def test_separation():
    a, b = geo.rectangle(0, 0, 1, 1), geo.rectangle(3, 0, 4, 1)
    assert geo.separation(a, b) == pytest.approx(2.0)
    assert geo.separation(a, geo.rectangle(1, 0, 2, 1)) == 0.0
    assert geo.separation(a, Polygon()) == math.inf
