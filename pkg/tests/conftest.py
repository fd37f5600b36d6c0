import itertools

import pytest

from compbcast import (
    CoverDistribution,
    Partition,
    broadcast_graph,
    enumerate_mis,
    load_bundled_instance,
)


@pytest.fixture(scope="session")
def example1():
    return load_bundled_instance("example1_boolean")


@pytest.fixture(scope="session")
def example2():
    return load_bundled_instance("example2_linear")


@pytest.fixture(scope="session")
def example1_family(example1):
    return enumerate_mis(broadcast_graph(example1))


@pytest.fixture(scope="session")
def example2_family(example2):
    return enumerate_mis(broadcast_graph(example2))


def table1_assignment(family):
    """The optimal deterministic cover of the Boolean example: 000 and 111
    share the set {000,010,111}, the four weight-compatible middle tuples
    share {001,010,011,100}, and 101, 110 share {101,110}."""
    sets = {s: i for i, s in enumerate(family.sets)}
    middle = {(0, 0, 1), (0, 1, 0), (0, 1, 1), (1, 0, 0)}
    w_a = tuple(sorted([(0, 0, 0), (0, 1, 0), (1, 1, 1)]))
    w_b = tuple(sorted(middle))
    w_c = ((1, 0, 1), (1, 1, 0))
    assign = []
    for x in itertools.product((0, 1), repeat=3):
        if x in ((0, 0, 0), (1, 1, 1)):
            assign.append(sets[w_a])
        elif x in middle:
            assign.append(sets[w_b])
        else:
            assign.append(sets[w_c])
    return assign


@pytest.fixture(scope="session")
def table1_cover(example1_family):
    return CoverDistribution.from_assignment(
        len(example1_family.sets), table1_assignment(example1_family)
    )


@pytest.fixture(scope="session")
def table1_partition():
    return Partition.from_cells(
        [
            [(0, 0, 0), (1, 1, 1)],
            [(0, 0, 1), (0, 1, 0), (0, 1, 1), (1, 0, 0)],
            [(1, 0, 1), (1, 1, 0)],
        ]
    )
