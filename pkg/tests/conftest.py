import pytest

from lll_lab.generators import gen_ksat, make_cycle_instance, make_desk_instance
from lll_lab.instance import KIND_CLAUSE, BadEvent, LLLInstance, Variable


@pytest.fixture(scope="session")
def tiny():
    """8-cycle of 2-var clause events: n=8, d=2, p=1/4."""
    return make_cycle_instance(8)


@pytest.fixture(scope="session")
def pressure():
    """Small instance with long runs: k=3 clauses, occurrence 4."""
    return gen_ksat(60, 3, 4, seed=3)


@pytest.fixture(scope="session")
def desk():
    """Default desk profile: n=2000, k=10, max_occurrence=2."""
    return make_desk_instance(seed=11)


@pytest.fixture()
def single_event():
    """One event over one boolean-ish pair: bad iff (x0, x1) == (0, 0)."""
    variables = [Variable(0, 2, (0.5, 0.5)), Variable(1, 2, (0.5, 0.5))]
    events = [BadEvent(0, (0, 1), KIND_CLAUSE, (0, 0))]
    return LLLInstance(variables, events)


def make_path_instance(num_events):
    """Path of 2-var clause events: event i on vars (i, i+1)."""
    variables = [Variable(i, 2, (0.5, 0.5)) for i in range(num_events + 1)]
    events = [BadEvent(i, (i, i + 1), KIND_CLAUSE, (0, 0))
              for i in range(num_events)]
    return LLLInstance(variables, events)
