import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from shapely.geometry import Polygon

from convex_peano import geometry as geo
from convex_peano import nets_stations as ns
from convex_peano import offspring as osp
from convex_peano import rho_convex as rc
from convex_peano import seq_algebra as sa
from convex_peano.construction import make_schedule
from convex_peano.state import ConstructionError, ValidationReport


# -----------------------------------------------------------------------------
# Stretches and skeleton merging
# -----------------------------------------------------------------------------

def test_stretch_maps():
    assert osp.StretchMap.identity(3).targets == (0, 1, 2)
    assert osp.StretchMap.repeat_at(3, 1, 2).targets == (0, 1, 1, 1, 2)
    with pytest.raises(ValueError):
        osp.StretchMap((0, 2), 3)
    with pytest.raises(ValueError):
        osp.StretchMap((1, 0), 2)
    with pytest.raises(ValueError):
        osp.StretchMap((0, 1), 2, target_len=3)


def test_stretch_keeps_type_and_identity():
    a, b = geo.rectangle(0, 0, 1, 1), geo.rectangle(1, 0, 2, 1)
    smap = osp.StretchMap((0, 0, 1), 2)
    out = osp.stretch((a, b), smap)
    assert isinstance(out, tuple)
    assert out[0] is a and out[1] is a and out[2] is b
    assert osp.stretch([1, 2], smap) == [1, 1, 2]
    np.testing.assert_array_equal(osp.stretch(np.array([0.5, 0.7]), smap), [0.5, 0.5, 0.7])
    with pytest.raises(ValueError):
        osp.stretch((a,), smap)


def test_merge_single_entries():
    a, b = osp.merge_skeletons((0.0,), (0.1,), 0.2)
    assert a.targets == (0, 0) and b.targets == (0, 0)


def test_merge_example():
    chi, psi = (0.0, 0.1, 0.2), (0.05, 0.15)
    a, b = osp.merge_skeletons(chi, psi, 0.2)
    assert a.target_len == b.target_len == 5
    gaps = [abs(chi[i] - psi[j]) for i, j in zip(a.targets, b.targets)]
    assert max(gaps) <= 0.2


def test_merge_rejects_distant_endpoints():
    with pytest.raises(ValueError):
        osp.merge_skeletons((0.0, 0.2), (0.5, 0.6), 0.2)
    with pytest.raises(ValueError):
        osp.merge_skeletons((), (0.1,), 0.2)


steps = st.lists(st.floats(0.0, 0.2), min_size=0, max_size=6)


@settings(max_examples=150, deadline=None)
@given(steps, steps, st.floats(-0.2, 0.2))
def test_merged_skeletons_stay_within_gamma(chi_steps, psi_steps, shift):
    gamma = 0.2
    chi = tuple(np.concatenate([[0.0], np.cumsum(chi_steps)]))
    psi = tuple(np.concatenate([[shift], shift + np.cumsum(psi_steps)]))
    assume(abs(chi[-1] - psi[-1]) <= gamma)
    a, b = osp.merge_skeletons(chi, psi, gamma)
    assert a.target_len == b.target_len == len(chi) + len(psi)
    gaps = [abs(chi[i] - psi[j]) for i, j in zip(a.targets, b.targets)]
    assert max(gaps) <= gamma + 1e-9


# -----------------------------------------------------------------------------
# Doubling
# -----------------------------------------------------------------------------

def test_expand_doubled_shares_cores(strips, strip_population):
    souls = strip_population
    assert souls.bases() == (strips[0], strips[0], strips[1], strips[1], strips[2], strips[2])
    assert souls[0].disturbance.is_empty and souls[-1].disturbance.is_empty
    assert souls[1].core is souls[2].core
    assert souls[3].core is souls[4].core
    assert souls[1].disturbance.area == pytest.approx(0.15)


def test_expand_doubled_pads_with_the_last_cell(strips):
    souls = osp.expand_doubled(strips, pad_to=5)
    assert len(souls) == 10
    assert all(s.base is strips[2] for s in souls.souls[4:])
    assert all(s.disturbance.is_empty for s in souls.souls[5:])
    assert sa.validate(souls, "regular").passed
    with pytest.raises(ValueError):
        osp.expand_doubled(strips, pad_to=2)
    with pytest.raises(ValueError):
        osp.expand_doubled(())


def test_insert_station_needs_an_empty_start():
    a = geo.rectangle(0, 0, 1, 1)
    aligned = osp.Aligned((a,), (a,), (0.0,))
    with pytest.raises(ValueError):
        osp.insert_station(aligned, (a,), a, 0.2)


def test_offspring_params():
    with pytest.raises(ValueError):
        osp.OffspringParams(None, 3)
    with pytest.raises(ValueError):
        osp.OffspringParams(None, None, "z")


# -----------------------------------------------------------------------------
# Preconditions
# -----------------------------------------------------------------------------

def test_soul_class_report_measures_the_disturbance(thin_domain):
    fam = rc.RhoFamily(1.0, thin_domain)
    narrow = sa.Soul(thin_domain, geo.clip_halfplane(thin_domain, "x", 0.4, ">="))
    assert osp.soul_class_report(narrow, fam, 0.2).passed
    wide = sa.Soul(thin_domain, geo.clip_halfplane(thin_domain, "x", 0.0, ">="))
    report = osp.soul_class_report(wide, fam, 0.2, check_family=False)
    assert not report.passed
    assert report.witness["reason"] == "disturbance too wide"
    assert report.witness["diameter"] > 0.4
    empty_core = osp.soul_class_report(sa.Soul(thin_domain, thin_domain), fam, 0.2)
    assert empty_core.witness["reason"] == "empty base or core"


def test_soul_class_report_samples_the_family(square):
    fam = rc.RhoFamily(1.0, square)
    half = sa.Soul(geo.clip_halfplane(square, "x", 0.0, "<="))
    report = osp.soul_class_report(half, fam, 0.2)
    assert not report.passed
    assert report.witness["reason"] == "base outside F_rho"
    assert osp.soul_class_report(half, fam, 0.2, check_family=False).passed
    assert osp.soul_class_report(sa.Soul(square), fam, 0.2).passed


def test_offspring_rejects_a_soul_outside_the_class(x_builder, thin_domain):
    wide = sa.Soul(thin_domain, geo.clip_halfplane(thin_domain, "x", 0.0, ">="))
    with pytest.raises(ConstructionError) as info:
        x_builder.offspring(wide)
    assert info.value.context["condition"] == "precondition"
    assert info.value.context["reason"] == "disturbance too wide"
    assert x_builder.cache_sizes()["nets"] == 0


# -----------------------------------------------------------------------------
# Builder
# -----------------------------------------------------------------------------

@pytest.fixture
def x_builder(level_params, thin_domain):
    return osp.OffspringBuilder(level_params, thin_domain, "x")


def test_offspring_of_the_whole_domain(x_builder, thin_domain):
    child = x_builder.offspring(sa.Soul(thin_domain))
    cells = child.cells
    plus, _ = x_builder.net(thin_domain)
    minus, _ = x_builder.anti_net(thin_domain)
    assert geo.equal_regions(cells[0], plus[0])
    assert geo.equal_regions(cells[-1], minus[-1])
    assert max(geo.extent(c, "x") for c in cells) <= 11 * 0.2 + 1e-2
    gap = geo.clean(thin_domain.difference(geo.union_all(cells))).area
    assert gap <= 1e-3 * thin_domain.area
    assert all(geo.region_hull_deficiency(c) <= 1e-3 * thin_domain.area for c in cells)
    sizes = x_builder.cache_sizes()
    assert sizes["nets"] == 1 and sizes["anti_nets"] == 1


def test_doubled_offspring_is_a_population(x_builder, thin_domain):
    souls = x_builder.offspring(sa.Soul(thin_domain)).souls()
    report = sa.validate(souls, "population_of_souls")
    assert report.passed, report.witness
    assert sa.validate(souls.bases(), "population_of_sets").passed


def test_y_offspring_is_the_swapped_x_offspring(level_params, thin_domain):
    tall = geo.apply_transform(thin_domain, geo.SWAP_XY)
    x_cells = osp.OffspringBuilder(level_params, thin_domain, "x").offspring(sa.Soul(thin_domain)).cells
    y_cells = osp.OffspringBuilder(level_params, tall, "y").offspring(sa.Soul(tall)).cells
    assert len(x_cells) == len(y_cells)
    for a, b in zip(x_cells, y_cells):
        assert geo.equal_regions(geo.apply_transform(a, geo.SWAP_XY), b, 1e-7)


def test_make_offspring_pads_to_m_prime(level_params, thin_domain):
    natural = len(osp.OffspringBuilder(level_params, thin_domain).offspring(sa.Soul(thin_domain)))
    m_prime = 2 * natural + 4
    bases, disturbances = osp.make_offspring(
        sa.Soul(thin_domain), osp.OffspringParams(level_params, m_prime), thin_domain
    )
    assert len(bases) == len(disturbances) == m_prime
    assert bases[-1] is bases[-2]
    assert isinstance(disturbances[-1], Polygon) and disturbances[-1].is_empty


def test_builder_rejects_unknown_axis(level_params, thin_domain):
    with pytest.raises(ValueError):
        osp.OffspringBuilder(level_params, thin_domain, "z")
    with pytest.raises(ValueError):
        osp.OffspringBuilder(level_params, thin_domain, "x", mode="lazy")


def test_shared_station_is_checked_against_each_new_base(x_builder, thin_domain, monkeypatch):
    builder, fam = x_builder, x_builder.fam
    core = geo.clip_halfplane(thin_domain, "x", 0.3, "<=")
    t1 = geo.clean(thin_domain.difference(core))
    station = builder.station(thin_domain, t1, fam, core)
    assert builder.station(thin_domain, t1, fam) is station
    half = geo.clip_halfplane(thin_domain, "x", 0.0, ">=")
    assert builder.station(half, t1, fam) is station
    assert builder.cache_sizes()["stations"] == 1

    def failing(*args, **kwargs):
        return ValidationReport("station", False, {"base": 0, "reason": "increment too large"}, {}, 1)

    monkeypatch.setattr(ns, "validate_station", failing)
    # already served, so no new check
    assert builder.station(thin_domain, t1, fam) is station
    narrower = geo.clip_halfplane(thin_domain, "x", -0.2, ">=")
    with pytest.raises(ConstructionError) as info:
        builder.station(narrower, t1, fam)
    assert info.value.context["condition"] == "station reuse"
    assert info.value.context["reason"] == "increment too large"


@pytest.mark.slow
def test_offspring_of_a_four_term_population(level_params, thin_domain):
    c1 = geo.clip_halfplane(thin_domain, "x", 0.4, "<=")
    c2 = geo.clip_halfplane(thin_domain, "x", -0.4, ">=")
    parents = osp.expand_doubled((c1, c2))
    assert sa.validate(parents, "population_of_souls").passed
    builder = osp.OffspringBuilder(level_params, thin_domain, "x")
    children = [builder.offspring(p) for p in parents]
    pad = max(len(c) for c in children)
    pairs = [(p, c.souls(pad)) for p, c in zip(parents, children)]
    for criterion in ("dust", "anti_dust", "filling"):
        report = sa.validate(pairs, criterion)
        assert report.passed, (criterion, report.witness)
    population = sa.anti_order_souls([c for _, c in pairs])
    report = sa.validate(population, "population_of_souls")
    assert report.passed, report.witness


@pytest.mark.slow
def test_offspring_of_built_parents_share_dust(thin_levels, thin_domain):
    _, levels = thin_levels
    parents = list({id(s): s for s in levels[-1].souls}.values())[:20]
    params = make_schedule(3, 0.2).net_params(2)
    builder = osp.OffspringBuilder(params, thin_domain, "y")
    children = [builder.offspring(p) for p in parents]
    pad = max(len(c) for c in children)
    pairs = [(p, c.souls(pad)) for p, c in zip(parents, children)]
    for criterion in ("dust", "anti_dust", "filling"):
        report = sa.validate(pairs, criterion)
        assert report.passed, (criterion, report.witness)
