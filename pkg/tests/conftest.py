"""Shared fixtures: normalized domains, hand-made populations and partitions."""

from __future__ import annotations

import numpy as np
import pytest

from convex_peano import construction
from convex_peano import geometry as geo
from convex_peano import nets_stations as ns
from convex_peano import offspring as osp
from convex_peano import rho_convex as rc
from convex_peano import seq_algebra as sa
from convex_peano.curve import CurvePartition


@pytest.fixture
def square():
    """Centred square of diameter just under one."""
    return geo.rectangle(-0.35, -0.35, 0.35, 0.35)


@pytest.fixture
def fam(square):
    return rc.RhoFamily(2.0, square)


@pytest.fixture
def rng():
    return np.random.default_rng(7)


@pytest.fixture(scope="session")
def thin_domain():
    """Normalized 1 x 0.05 rectangle, cheap to refine."""
    domain, _ = construction.ShapeSpec("rectangle", aspect=0.05).domain()
    return domain


@pytest.fixture(scope="session")
def level_params():
    return ns.compute_params(1.0, 0.2, 0.125)


@pytest.fixture
def strips():
    """Three overlapping vertical strips of [0, 1] x [0, 0.5]."""
    return (
        geo.rectangle(0.0, 0.0, 0.4, 0.5),
        geo.rectangle(0.3, 0.0, 0.7, 0.5),
        geo.rectangle(0.6, 0.0, 1.0, 0.5),
    )


@pytest.fixture
def strip_population(strips):
    return osp.expand_doubled(strips)


@pytest.fixture
def station_setup(square):
    """A square whose right crescent is the disturbance of a curved core."""
    core = geo.clean(square.intersection(geo.Disc((-2.3, 0.0), 2.6).polygon(512)))
    t1 = geo.clean(square.difference(core))
    params = ns.compute_params(1.0, 0.2, 0.125)
    fam = rc.RhoFamily(params.beta_prime, square)
    return square, core, t1, params, fam


def _strip_stack() -> CurvePartition:
    domain = geo.rectangle(-0.4, -0.2, 0.4, 0.2)
    cuts = np.linspace(-0.4, 0.4, 5)
    cells = tuple(geo.rectangle(a, -0.2, b, 0.2) for a, b in zip(cuts[:-1], cuts[1:]))
    block = osp.expand_doubled(cells)
    level1 = construction.PartitionLevel(1, sa.SoulSequence((sa.Soul(domain), sa.Soul(domain))), 2)
    level2 = construction.PartitionLevel(2, sa.anti_order_souls([block, block]), 16, 8)
    return CurvePartition([level1, level2], domain, geo.IDENTITY, {"gamma": [0.2, 0.125], "beta": [1.0, 5.2]})


@pytest.fixture
def strip_partition():
    """Two-level stack: the domain, then four strips doubled and anti-ordered."""
    return _strip_stack()


@pytest.fixture(scope="session")
def thin_levels(thin_domain):
    """Levels 1 and 2 of the thin rectangle (slow)."""
    schedule = construction.make_schedule(2, 0.2)
    return schedule, construction.run(thin_domain, 2, schedule)
