import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mtasep.core import HOLE, BoundaryError, InfeasibleError, RingConfig, ShapeError, swap_adjacent
from mtasep.multiline import (
    MultiLineConfig,
    assign_classes_ring,
    assign_classes_window,
    bell_cascade,
    commutation_check,
    forward_jump,
    forward_map,
    multiline_from_json,
    multiline_to_json,
    reverse_cascade,
    reverse_jump,
    reverse_map,
)
from mtasep.queueing import QueueState

import oracles

P, H = 1, HOLE


def ml(N, *sets):
    return MultiLineConfig.from_sets(N, sets)


@st.composite
def multilines(draw, max_N=6, max_n=3, nested=False):
    N = draw(st.integers(1, max_N))
    n = draw(st.integers(1, max_n))
    lines = []
    for _ in range(n):
        lines.append(tuple(draw(st.lists(st.sampled_from((P, H)), min_size=N, max_size=N))))
    if nested:
        lines.sort(key=lambda line: line.count(P))
    return MultiLineConfig(tuple(lines))


def test_cascade_examples():
    assert bell_cascade(ml(3, [], []), 0) == (0, 1, 2)
    assert bell_cascade(ml(3, [0], [0, 1]), 2) == (2, 0, 0)
    full = ml(4, range(4), range(4), range(4))
    assert bell_cascade(full, 3) == (3, 3, 3, 3)


def test_forward_examples():
    x = ml(3, [], [])
    assert forward_jump(x, 1) == x
    single = MultiLineConfig(((H, P),))
    assert forward_jump(single, 1).lines == ((P, H),)
    y = forward_jump(ml(3, [0], [0, 1]), 2)
    assert y.lines == ((H, H, P), (P, P, H))


def test_forward_map_examples():
    x = ml(3, [], [])
    assert forward_map(x, 0) == (x, 2)
    x = MultiLineConfig(((P, H, P), (H, P, P)))
    y, b0 = forward_map(x, 1)
    assert b0 == 2
    assert y.lines == ((P, H, P), (P, H, P))


def test_reverse_examples():
    assert reverse_cascade(ml(3, [], []), 2) == (2, 1, 0)
    full = ml(3, range(3), range(3))
    assert reverse_cascade(full, 1) == (1, 1, 1)
    y = MultiLineConfig(((P, H),))
    assert reverse_jump(y, 1).lines == ((H, P),)
    x = ml(3, [], [])
    assert reverse_map(x, 2) == (x, 0)


def test_reverse_of_worked_example():
    x = ml(3, [0], [0, 1])
    y, b0 = forward_map(x, 2)
    # the reverse bell meets line m at the forward bell site of line m - 1
    assert reverse_cascade(y, b0) == (0, 0, 2)
    assert reverse_map(y, b0) == (x, 2)


@given(multilines(), st.integers(0, 11))
def test_reverse_undoes_forward(x, i):
    i %= x.n_sites
    y, b0 = forward_map(x, i)
    assert reverse_map(y, b0) == (x, i)


@given(multilines(), st.integers(0, 11))
def test_forward_undoes_reverse(y, j):
    j %= y.n_sites
    x, c = reverse_map(y, j)
    assert forward_map(x, c) == (y, j)


@given(multilines(), st.integers(0, 11))
def test_cascade_matches_rule_and_steps(x, i):
    b = bell_cascade(x, i)
    assert list(b) == oracles.cascade(x.lines, i)
    N = x.n_sites
    assert all((lo - hi) % N in (0, 1) for hi, lo in zip(b, b[1:]))
    c = reverse_cascade(x, i)
    assert all((lo - hi) % N in (0, 1) for lo, hi in zip(c, c[1:]))


@given(multilines(), st.integers(0, 11))
def test_jumps_conserve_line_counts(x, i):
    assert forward_jump(x, i).particle_counts() == x.particle_counts()
    assert reverse_jump(x, i).particle_counts() == x.particle_counts()


def test_bijection_exhaustive_small():
    N, n = 3, 2
    domain = [(lines, i) for lines in itertools.product(
        itertools.product((P, H), repeat=N), repeat=n) for i in range(N)]
    images = {forward_map(MultiLineConfig(lines), i) for lines, i in domain}
    assert len(images) == len(domain)


def test_assign_examples():
    v = assign_classes_ring(ml(3, [0], [0, 1]))
    assert v.bottom.sites == (1, 2, H)
    v = assign_classes_ring(ml(3, [2], [0, 1]))
    assert v.bottom.sites == (1, 2, H)
    same = ml(4, [1, 3], [1, 3], [1, 3])
    for m, line in enumerate(assign_classes_ring(same).lines, start=1):
        assert line.sites == (H, 1, H, 1)


def test_assign_infeasible():
    with pytest.raises(InfeasibleError):
        assign_classes_ring(ml(3, [0, 1], [2]))


@given(multilines(nested=True))
def test_assign_keeps_particle_positions(x):
    v = assign_classes_ring(x)
    for m in range(1, x.n + 1):
        assert all((a == H) == (b == H) for a, b in zip(v.line(m).sites, x.lines[m - 1]))
        assert v.line(m).n_classes == m


@given(multilines(nested=True))
def test_assign_lines_match_interval_rule(x):
    v = x.lines[0]
    for m in range(1, x.n):
        v = oracles.departures(v, x.lines[m], m)
    assert assign_classes_ring(x).bottom.sites == v


def test_assign_window_examples():
    x = MultiLineConfig(((1, H, 1, 1), (H, P, P, H)), ring=False)
    v = assign_classes_window(x, [QueueState((0,))])
    assert v.bottom.sites == (H, 1, 1, H)
    x = MultiLineConfig(((H, H, H), (P, H, P), (P, P, H)), ring=False, lo=-1)
    v = assign_classes_window(x)
    # no first-class customers exist, but line-2 particles still pass through
    assert v.line(2).sites == (2, H, 2)
    assert v.bottom.sites == (2, 3, H)
    assert v.bottom.lo == -1
    empty = MultiLineConfig(((), ()), ring=False)
    assert len(assign_classes_window(empty).bottom) == 0


def test_assign_window_init_count():
    x = MultiLineConfig(((P,), (P,)), ring=False)
    with pytest.raises(ShapeError):
        assign_classes_window(x, [])


def test_window_cascade_boundary():
    x = MultiLineConfig(((H, H), (H, H)), ring=False)
    with pytest.raises(BoundaryError):
        forward_jump(x, 1)
    with pytest.raises(BoundaryError):
        forward_jump(x, 5)


def test_commutation_examples():
    assert commutation_check(ml(4, [], []), 2)
    single = MultiLineConfig(((P, H, P, H),))
    assert all(commutation_check(single, i) for i in range(4))


@given(multilines(max_N=5, nested=True), st.integers(0, 9))
def test_commutation_random(x, i):
    assert commutation_check(x, i)


def test_commutation_matches_swap_on_bottom():
    x = ml(5, [1], [1, 4], [0, 1, 4])
    for i in range(5):
        b = bell_cascade(x, i)
        before = assign_classes_ring(x).bottom
        after = assign_classes_ring(forward_jump(x, i)).bottom
        assert after == swap_adjacent(before, b[0])


def test_multiline_json_round_trip():
    x = ml(4, [1], [1, 3])
    assert multiline_to_json(x) == {"lines": [[0, 1, 0, 0], [0, 1, 0, 1]]}
    assert multiline_from_json(multiline_to_json(x)) == x
    w = MultiLineConfig(((P, H),), ring=False, lo=-3)
    assert multiline_from_json(multiline_to_json(w)) == w


def test_line_accessor_types():
    x = ml(3, [0], [0, 2])
    assert x.line(2) == RingConfig((P, H, P), 1)
    with pytest.raises(ShapeError):
        MultiLineConfig(((P,), (P, H)))
    with pytest.raises(ValueError):
        MultiLineConfig(((2, H),))
