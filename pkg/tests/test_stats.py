import json

import numpy as np
import pytest

from mtasep.stats import (
    INCONCLUSIVE,
    TestReport,
    burke_test,
    coupling_experiment,
    couple_paths,
    factorization_test,
    hole_independence_test,
    independence_pvalue,
    is_renewal_string,
    lindley,
    line_marginal_test,
    make_rng,
    queue_length_fit,
    renewal_emptiness_check,
)


def test_renewal_string_examples():
    assert is_renewal_string((4, 1, 2, 3, 1, 2), 4)
    assert is_renewal_string((3, 2), 3)
    assert is_renewal_string((2,), 2)
    assert not is_renewal_string((3, 1), 3)
    assert not is_renewal_string((4, 1, 2, 1, 2), 4)
    assert not is_renewal_string((4, 3, 4, 2), 4)
    assert not is_renewal_string((), 3)
    assert not is_renewal_string((3, 0, 2), 3)


def test_report_json_keys():
    r = TestReport("x", np.float64(0.5), 0.1, np.bool_(True), 10, "n")
    doc = json.loads(json.dumps(r.to_json()))
    assert {"name", "statistic", "threshold", "pass", "samples", "notes"} <= set(doc)
    assert doc["pass"] is True and doc["status"] == "pass"
    assert TestReport("y", 1, 0, False, 0).status == "fail"


def test_lindley_matches_loop():
    rng = make_rng(0)
    a = rng.random(2000) < 0.3
    s = rng.random(2000) < 0.4
    q, out = 3, []
    for x, y in zip(a, s):
        q = max(q + int(x) - int(y), 0)
        out.append(q)
    assert np.array_equal(lindley(3, a, s), out)


def test_independence_pvalue_degenerate_and_dependent():
    p, _ = independence_pvalue(np.zeros(100, dtype=int), np.arange(100) % 2)
    assert p is None
    x = np.arange(2000) % 2
    p, _ = independence_pvalue(x, x)
    assert p < 1e-10


def test_renewal_emptiness_small():
    r = renewal_emptiness_check((0.2, 0.2, 0.2), 3000, seed=1, w=(3, 2))
    assert r.passed and r.samples > 0 and r.statistic == 0
    with pytest.raises(ValueError):
        renewal_emptiness_check((0.2, 0.2, 0.2), 100, seed=1, w=(3, 1))


def test_renewal_emptiness_inconclusive_when_absent():
    r = renewal_emptiness_check((0.05, 0.05, 0.05, 0.05), 20, seed=0, w=(4, 1, 2, 3, 1, 2))
    assert r.status == INCONCLUSIVE and not r.passed


def test_non_renewal_string_queues_are_sometimes_busy():
    # the same check on a non-renewal string would find violations
    from mtasep.simulate import sample_window_trace
    from mtasep.stats import _occurrences

    tr = sample_window_trace(5000, (0.2, 0.2, 0.2), 150, seed=2)
    ends = _occurrences(tr.bottom(), (1, 2)) + 1
    assert (tr.queue_totals()[:, ends] != 0).any()


def test_factorization_small_and_control():
    r = factorization_test((0.2, 0.2, 0.2), (3, 2), samples=1000, seed=3, batch=200,
                           row_length=2000)
    assert r.samples == 1000 and r.passed
    c = factorization_test((0.2, 0.2, 0.2), (1, 2), samples=1000, seed=3, batch=200,
                           row_length=2000, require_renewal=False)
    assert c.status == INCONCLUSIVE and c.details["control"]
    with pytest.raises(ValueError):
        factorization_test((0.2, 0.2, 0.2), (1, 2))


def test_factorization_inconclusive_when_starved():
    r = factorization_test((0.2, 0.2, 0.2), (3, 2), samples=1000, seed=0, batch=2,
                           row_length=50, max_sites=100)
    assert r.status == INCONCLUSIVE


def test_hole_independence_small():
    r = hole_independence_test((0.3, 0.2), K=3, samples=5000, seed=4)
    assert r.passed
    assert set(r.details) == {"p_holes", "p_first_class"}


def test_burke_small():
    r = burke_test(0.2, 0.5, 100000, seed=1)
    assert r.passed, r.notes
    with pytest.raises(ValueError):
        burke_test(0.6, 0.5, 100, seed=0)


def test_queue_length_fit_reports_both_ratios():
    r = queue_length_fit(0.2, 0.3, 200000, seed=0)
    assert r.details["ratio_detailed_balance"] == pytest.approx(0.25)
    assert r.details["ratio_arrival_over_service"] == pytest.approx(0.4)
    assert r.details["closer"] == "detailed_balance"
    assert queue_length_fit(0.0, 0.3, 100, seed=0).status == INCONCLUSIVE


def test_couple_paths_invariants():
    q, qp, u, up = couple_paths(0.2, 0.5, 200, 300, make_rng(5))
    assert (q >= qp).all() and (qp >= 0).all()
    assert (u <= up).all()
    assert set(np.unique(u)) <= {1, 2, 3}


def test_coupling_small():
    r = coupling_experiment(0.2, 0.3, K=200, paths=2000, seed=6)
    assert r.statistic == 0, r.notes
    assert r.details["slope"] < 0
    with pytest.raises(ValueError):
        coupling_experiment(0.6, 0.5)


def test_line_marginal_small():
    r = line_marginal_test(4, (1, 2), line=2, samples=2000, seed=7)
    assert r.passed
