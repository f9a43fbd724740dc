import pytest

from lll_lab.classify import derive_params
from lll_lab.localsim import LocalRunReport, node_averaged, run_meta
from lll_lab.randomness import sample_table
from lll_lab.resampler import assignment_digest, run_cps
from test_classify import loose_params


def _report(rounds):
    return LocalRunReport(
        rounds=rounds, node_averaged=sum(rounds) / len(rounds),
        worst_case=max(rounds), phase1_steps=1, secure_round=1,
        insecure_fraction=0.0, e_good=True, fallback_used=False,
        terminated=True, T_global=0, params=None, classification=None)


def test_node_averaged_examples():
    assert node_averaged(_report([7, 7, 7])) == 7
    assert node_averaged(_report([2, 2, 4, 4])) == 3


def test_quiet_instance_uniform_rounds(tiny):
    # find a seed where nothing is ever satisfied
    for seed in range(50):
        table = sample_table(tiny, seed)
        log, _ = run_cps(tiny, table)
        if log.total_steps == 0:
            break
    else:
        pytest.skip("no quiet seed found")
    values, report = run_meta(tiny, seed)
    assert report.T_global == 0
    assert not report.fallback_used
    assert report.node_averaged == report.worst_case == report.secure_round
    assert report.insecure_fraction == 0.0


def test_output_equals_global_run(desk):
    for seed in range(5):
        values, report = run_meta(desk, seed)
        table = sample_table(desk, seed)
        log, global_values = run_cps(desk, table)
        assert values == global_values
        assert assignment_digest(values) == assignment_digest(global_values)
        assert report.terminated


def test_empty_risky_with_e_good_outputs_phase1(desk):
    values, report = run_meta(desk, seed=3)
    params = report.params
    assert report.e_good
    assert len(report.classification.risky) == 0
    assert report.T_global <= params.phase1_steps
    # with no phase 2, the output is the phase-1 assignment
    table = sample_table(desk, 3)
    log, global_values = run_cps(desk, table)
    assert values == global_values


def test_rounds_accounting(desk):
    _, report = run_meta(desk, seed=7)
    assert all(r >= report.secure_round for r in report.rounds)
    assert report.node_averaged <= report.worst_case
    assert report.secure_round == 2 * report.params.R_max + 2 + 2 * report.phase1_steps
    hist = report.round_histogram()
    assert sum(n for _r, n in hist) == desk.n


def test_fallback_flagged_and_output_still_global(pressure):
    # phase1_steps = 1 with empty risky forces the fallback branch whenever
    # the run needs more than one step
    params = loose_params(size_threshold=10 ** 6, phase1_steps=1, R_max=2)
    fallback_seen = False
    for seed in range(10):
        values, report = run_meta(pressure, seed, params=params)
        table = sample_table(pressure, seed)
        _, global_values = run_cps(pressure, table)
        assert values == global_values
        if report.fallback_used:
            fallback_seen = True
            assert report.rounds == [report.secure_round
                                     + 2 * max(0, report.T_global - 1)] * pressure.n
    assert fallback_seen


def test_phase2_with_loose_params(pressure):
    # small thresholds make risky sets non-empty so phase 2 really runs;
    # seed range chosen to include clean (non-fallback) multi-phase runs
    params = loose_params(eps=0.5, size_threshold=2, R_max=4, phase1_steps=2)
    ran_phase2 = False
    for seed in range(80):
        values, report = run_meta(pressure, seed, params=params)
        table = sample_table(pressure, seed)
        _, global_values = run_cps(pressure, table)
        assert values == global_values
        if not report.fallback_used and report.classification.risky \
                and report.T_global > params.phase1_steps:
            ran_phase2 = True
            insec = report.classification.insecure
            assert any(report.rounds[u] > report.secure_round for u in insec)
    assert ran_phase2


def test_insecure_fraction_consistency(pressure):
    params = loose_params(eps=0.5, size_threshold=2, R_max=4, phase1_steps=2)
    _, report = run_meta(pressure, seed=5, params=params)
    assert report.insecure_fraction == pytest.approx(
        len(report.classification.insecure) / pressure.n)


def test_determinism(desk):
    v1, r1 = run_meta(desk, seed=9)
    v2, r2 = run_meta(desk, seed=9)
    assert v1 == v2
    assert r1.rounds == r2.rounds
    assert r1.node_averaged == r2.node_averaged


def test_fallback_rate_desk_200_seeds(desk):
    fallbacks = sum(1 for seed in range(200)
                    if run_meta(desk, seed)[1].fallback_used)
    assert fallbacks / 200 <= 0.02
