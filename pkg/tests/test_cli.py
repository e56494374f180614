import json

import pytest

from mtasep.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_exact_json_with_balance(capsys):
    code, out, _ = run(capsys, "exact", "--sites", "3", "--classes", "2", "--counts", "1,1",
                       "--check-balance")
    doc = json.loads(out)
    assert code == 0 and doc["M"] == "9" and doc["balance"] is True
    assert sorted(int(s["weight"]) for s in doc["states"]) == [1, 1, 1, 2, 2, 2]


def test_exact_counts_exceed_sites(capsys):
    code, _, err = run(capsys, "exact", "--sites", "3", "--classes", "2", "--counts", "4,1")
    assert code == 65 and "infeasible" in err


def test_exact_list_minimal(capsys):
    code, out, _ = run(capsys, "exact", "--sites", "4", "--classes", "4", "--counts", "1,1,1,1",
                       "--list-minimal")
    doc = json.loads(out)
    assert code == 0 and doc["M"] == "96"
    assert sorted(map(tuple, doc["minimal"])) == sorted(
        [(4, 3, 2, 1), (1, 4, 3, 2), (2, 1, 4, 3), (3, 2, 1, 4)])
    assert doc["minimal_check"] is True


def test_exact_csv(capsys):
    code, out, _ = run(capsys, "exact", "--sites", "3", "--classes", "2", "--counts", "1,1",
                       "--format", "csv", "--check-balance")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "s0,s1,s2,weight,M"
    assert lines[-1] == "# balance: true"


def test_exact_cap_and_usage(capsys):
    code, _, _ = run(capsys, "exact", "--sites", "12", "--classes", "3", "--counts", "3,3,3",
                     "--cap", "100")
    assert code == 65
    code, _, _ = run(capsys, "exact", "--sites", "3", "--classes", "2", "--counts", "1")
    assert code == 64
    with pytest.raises(SystemExit) as exc:
        main(["exact", "--sites", "x"])
    assert exc.value.code == 64


def test_sample_ring_deterministic(capsys):
    argv = ["sample", "ring", "--sites", "5", "--classes", "2", "--counts", "1,2",
            "--samples", "3", "--seed", "7"]
    code, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    assert code == 0 and first == second
    rows = [json.loads(x) for x in first.splitlines()]
    assert len(rows) == 3
    for r in rows:
        assert sorted(r["sites"]) == [0, 0, 1, 2, 2]


def test_sample_line_shape(capsys):
    code, out, _ = run(capsys, "sample", "line", "--rates", "0.2,0.3", "--window", "100",
                       "--burnin", "200", "--seed", "1")
    doc = json.loads(out)
    assert code == 0 and len(doc["sites"]) == 201 and doc["topology"] == "window"
    assert set(doc["sites"]) <= {0, 1, 2}


def test_sample_usage_errors(capsys):
    assert run(capsys, "sample", "line", "--rates", "0.2")[0] == 64
    assert run(capsys, "sample", "line", "--rates", "0.6,0.5", "--window", "3")[0] == 65


def test_sample_output_file(tmp_path, capsys):
    path = tmp_path / "s.jsonl"
    code, out, _ = run(capsys, "sample", "ring", "--sites", "4", "--classes", "1",
                       "--counts", "2", "--samples", "2", "--output", str(path))
    assert code == 0 and out == ""
    assert len(path.read_text().splitlines()) == 2


@pytest.mark.parametrize("suite,N,n", [("bijection", 4, 2), ("commutation", 4, 3),
                                       ("balance", 4, 2), ("minimal", 4, 3)])
def test_verify_suites(capsys, suite, N, n):
    code, out, _ = run(capsys, "verify", suite, "--sites", str(N), "--lines", str(n),
                       "--exhaustive")
    assert code == 0 and json.loads(out)["pass"] is True


def test_verify_queues_five_sites(capsys):
    code, out, _ = run(capsys, "verify", "queues", "--sites", "5", "--lines", "3", "--exhaustive")
    assert code == 0 and json.loads(out)["failures"] == 0


def test_verify_random_and_unknown(capsys):
    code, out, _ = run(capsys, "verify", "bijection", "--sites", "7", "--lines", "3",
                       "--trials", "50", "--seed", "2")
    assert code == 0 and json.loads(out)["cases"] == 350
    with pytest.raises(SystemExit) as exc:
        main(["verify", "nonsense", "--sites", "3", "--lines", "2"])
    assert exc.value.code == 64


def test_stats_burke(capsys):
    code, out, _ = run(capsys, "stats", "burke", "--arrival", "0.2", "--service", "0.5",
                       "--steps", "1000000", "--seed", "9")
    doc = json.loads(out.splitlines()[0])
    assert code == 0 and doc["pass"] is True and doc["name"] == "burke"


def test_stats_coupling_small(capsys):
    code, out, _ = run(capsys, "stats", "coupling", "--rates", "0.2,0.3", "--window", "200",
                       "--paths", "1000", "--seed", "4")
    doc = json.loads(out)
    assert doc["statistic"] == 0 and code == (0 if doc["pass"] else 2)


def test_stats_renewal(capsys):
    code, out, _ = run(capsys, "stats", "renewal", "--rates", "0.2,0.2,0.2", "--string", "3,2",
                       "--window", "100000", "--seed", "2", "--samples", "1000")
    docs = [json.loads(x) for x in out.splitlines()]
    assert code == 0
    assert [d["name"] for d in docs] == ["renewal_emptiness", "factorization"]
    assert all(d["pass"] for d in docs)


def test_stats_inconclusive_exit(capsys):
    code, out, _ = run(capsys, "stats", "renewal", "--rates", "0.05,0.05,0.05,0.05",
                       "--string", "4,1,2,3,1,2", "--window", "20", "--samples", "0")
    assert code == 3 and json.loads(out)["status"] == "inconclusive"


def test_stats_bad_string(capsys):
    code, _, _ = run(capsys, "stats", "renewal", "--rates", "0.2,0.2,0.2", "--string", "3,1",
                     "--window", "100")
    assert code == 65


def test_stats_missing_flags(capsys):
    assert run(capsys, "stats", "burke", "--arrival", "0.2")[0] == 64


def test_simulate_tasep_trace(capsys):
    argv = ["simulate", "tasep", "--state", "1,2,0,2,0", "--events", "20",
            "--record-every", "10", "--seed", "3"]
    code, out, _ = run(capsys, *argv)
    rows = [json.loads(x) for x in out.splitlines()]
    assert code == 0
    events = [r for r in rows if "site" in r]
    assert len(events) == 20
    assert all(a["t"] < b["t"] for a, b in zip(events, events[1:]))
    assert rows[-1]["final"] is True
    assert sorted(rows[-1]["snapshot"]["sites"]) == [0, 0, 1, 2, 2]
    assert run(capsys, *argv)[1] == out


def test_simulate_multiline_and_usage(capsys):
    code, out, _ = run(capsys, "simulate", "multiline", "--sites", "4", "--particles", "1,2",
                       "--time", "2.0", "--seed", "1")
    final = json.loads(out.splitlines()[-1])
    assert code == 0 and final["t"] == 2.0
    assert [sum(line) for line in final["snapshot"]["lines"]] == [1, 2]
    assert run(capsys, "simulate", "tasep", "--sites", "4", "--counts", "1")[0] == 64


def test_help_documents_every_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["stats", "--help"])
    assert exc.value.code == 0
    out = capsys.readouterr().out
    for flag in ("--arrival", "--service", "--rates", "--string", "--paths", "--seed"):
        assert flag in out
