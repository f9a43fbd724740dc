import math
import random

import pytest
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

from lll_lab.errors import ValidationError
from lll_lab.instance import KIND_MONOCHROMATIC, BadEvent, LLLInstance, Variable
from lll_lab.randomness import default_depth_hint, sample_table, value


def _uniform_bits(n_vars):
    variables = [Variable(i, 2, (0.5, 0.5)) for i in range(n_vars)]
    events = [BadEvent(0, tuple(range(n_vars)), KIND_MONOCHROMATIC)]
    return LLLInstance(variables, events)


def test_reads_are_pure(tiny):
    t = sample_table(tiny, seed=42)
    first = [value(t, v, i) for v in range(4) for i in range(50)]
    second = [value(t, v, i) for v in range(4) for i in range(50)]
    assert first == second
    t2 = sample_table(tiny, seed=42)
    assert first == [value(t2, v, i) for v in range(4) for i in range(50)]


def test_distinct_seeds_differ():
    inst = _uniform_bits(4)
    a = sample_table(inst, seed=1)
    b = sample_table(inst, seed=2)
    probes = [(v, i) for v in range(4) for i in range(25)]
    assert any(a.value(v, i) != b.value(v, i) for v, i in probes)


def test_uniform_bit_frequency():
    inst = _uniform_bits(2)
    t = sample_table(inst, seed=7)
    zeros = sum(1 for i in range(10_000) if t.value(0, i) == 0)
    assert abs(zeros / 10_000 - 0.5) <= 0.02


def test_degenerate_distribution_always_zero():
    variables = [Variable(0, 2, (1.0, 0.0)), Variable(1, 2, (0.5, 0.5))]
    inst = LLLInstance(variables, [BadEvent(0, (0, 1), KIND_MONOCHROMATIC)])
    t = sample_table(inst, seed=3)
    assert all(t.value(0, i) == 0 for i in range(200))


def test_access_order_independence():
    inst = _uniform_bits(3)
    probes = [(v, i) for v in range(3) for i in range(40)]
    rng = random.Random(0)
    order1 = probes[:]
    order2 = probes[:]
    rng.shuffle(order1)
    rng.shuffle(order2)
    t1 = sample_table(inst, seed=11)
    t2 = sample_table(inst, seed=11)
    got1 = {p: t1.value(*p) for p in order1}
    got2 = {p: t2.value(*p) for p in order2}
    assert got1 == got2


def test_chi_squared_sanity():
    dist = (0.5, 0.3, 0.2)
    variables = [Variable(0, 3, dist), Variable(1, 3, dist)]
    inst = LLLInstance(variables, [BadEvent(0, (0, 1), KIND_MONOCHROMATIC)])
    t = sample_table(inst, seed=13)
    n = 10_000
    counts = [0, 0, 0]
    for i in range(n):
        counts[t.value(0, i)] += 1
    expected = [p * n for p in dist]
    _stat, pvalue = scipy.stats.chisquare(counts, expected)
    assert pvalue > 1e-4


def test_lazy_growth_beyond_hint():
    inst = _uniform_bits(2)
    t = sample_table(inst, seed=5, depth_hint=2)
    v = t.value(1, 500)
    assert v in (0, 1)
    assert t.value(1, 500) == v


def test_default_depth_hint(desk):
    expected = math.ceil(10 * desk.log1p_n()) + 8
    assert default_depth_hint(desk) == expected
    assert sample_table(desk, 0).depth_hint == expected


def test_errors():
    inst = _uniform_bits(2)
    t = sample_table(inst, seed=1)
    with pytest.raises(ValidationError):
        t.value(9, 0)
    with pytest.raises(ValidationError):
        t.value(0, -1)
    with pytest.raises(ValidationError):
        sample_table(inst, seed=1, depth_hint=0)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 64 - 1), st.integers(0, 3), st.integers(0, 100))
def test_value_pure_function_property(seed, var, index):
    inst = _uniform_bits(4)
    a = sample_table(inst, seed)
    b = sample_table(inst, seed)
    assert a.value(var, index) == b.value(var, index)
