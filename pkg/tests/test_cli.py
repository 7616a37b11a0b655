"""Command-line interface: exit codes, CSV/JSON output, verify suites,
exponent analysis."""

import csv
import io
import json

import pytest

from dpcount.cli import main, data_path


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def write_model(tmp_path, payload, name="model.json"):
    p = tmp_path / name
    p.write_text(json.dumps(payload))
    return str(p)


def test_count_csv_three_rows(tmp_path, capsys):
    out = tmp_path / "runs.csv"
    code, _, _ = run(["count", "--model", str(data_path("dp5_diagonal.json")),
                      "--heights", "5,10,20", "--method", "fiber",
                      "--out", str(out)], capsys)
    assert code == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 3
    assert list(rows[0]) == ["model_id", "field", "B", "method", "N_X",
                             "N_U", "seconds", "exc_bound"]
    assert [r["B"] for r in rows] == ["5", "10", "20"]
    assert all(r["model_id"] == "dp5_diagonal" for r in rows)


def test_count_workers_deterministic(tmp_path, capsys):
    outs = []
    for w, name in ((1, "a.csv"), (8, "b.csv")):
        out = tmp_path / name
        code, _, _ = run(["count", "--model",
                          str(data_path("dp5_diagonal.json")),
                          "--heights", "10,30,60", "--workers", str(w),
                          "--out", str(out)], capsys)
        assert code == 0
        rows = list(csv.DictReader(out.open()))
        outs.append([{k: v for k, v in r.items() if k != "seconds"}
                     for r in rows])
    assert outs[0] == outs[1]


def test_count_json_format(capsys):
    code, out, _ = run(["count", "--model",
                        str(data_path("dp1_sample.json")),
                        "--heights", "3,6", "--format", "json"], capsys)
    assert code == 0
    rows = json.loads(out)
    assert [r["N_U"] for r in rows] == [38, 130]


def test_count_bad_heights_is_usage_error(capsys):
    code, _, err = run(["count", "--model",
                        str(data_path("dp1_sample.json")),
                        "--heights", "10,5"], capsys)
    assert code == 2 and err


def test_count_fiber_rejects_non_conic_bundle(capsys):
    code, _, err = run(["count", "--model", str(data_path("fermat3.json")),
                        "--heights", "5", "--method", "fiber"], capsys)
    assert code == 2 and "conic-bundle" in err


def test_count_fiber_rejects_non_normal_dp4(tmp_path, capsys):
    model = write_model(tmp_path, {
        "field": {"field": "Q"}, "variant": "DP4", "model_id": "dp4_gen",
        "coeffs": {"Q1": {"2,0,0,0,0": 1, "0,2,0,0,0": 1, "0,0,2,0,0": 1,
                          "0,0,0,2,0": 1, "0,0,0,0,2": -4},
                   "Q2": {"2,0,0,0,0": 1, "0,2,0,0,0": 2, "0,0,2,0,0": 3,
                          "0,0,0,2,0": 5, "0,0,0,0,2": -7}}})
    code, _, err = run(["count", "--model", model, "--heights", "5",
                        "--method", "fiber"], capsys)
    assert code == 2


def test_count_undecided_smoothness_gate(capsys):
    model = str(data_path("dp5_diagonal_f3.json"))
    code, _, err = run(["count", "--model", model, "--heights", "3"], capsys)
    assert code == 3 and "UNDECIDED" in err
    code2, out, _ = run(["count", "--model", model, "--heights", "3",
                         "--allow-undecided"], capsys)
    assert code2 == 0
    assert "214" not in out   # sanity: output is dp5 data, parsed below
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rows[0]["N_X"] == "17"


def test_count_singular_model_rejected(tmp_path, capsys):
    model = write_model(tmp_path, {
        "field": {"field": "Q"}, "variant": "DP3", "model_id": "sing",
        "coeffs": {"F": {"3,0,0,0": 1, "0,3,0,0": 1, "0,0,3,0": 1}}})
    code, _, err = run(["count", "--model", model, "--heights", "5"], capsys)
    assert code == 2 and "singular" in err


def test_verify_unknown_suite(capsys):
    code, _, err = run(["verify", "--suite", "nope"], capsys)
    assert code == 2


@pytest.mark.parametrize("suite", ["lattices", "conics", "binforms",
                                   "vclasses", "sections"])
def test_verify_suites_pass(suite, capsys):
    code, out, _ = run(["verify", "--suite", suite, "--seed", "42"], capsys)
    assert code == 0, out
    assert "FAIL" not in out
    assert f"[{suite}] PASS" in out


def test_analyze_slope_and_exit_codes(tmp_path, capsys):
    good = tmp_path / "good.csv"
    with good.open("w") as f:
        w = csv.writer(f)
        w.writerow(["model_id", "field", "B", "method", "N_X", "N_U",
                    "seconds", "exc_bound"])
        for B in (10, 100, 1000):
            w.writerow(["dp5_test", "Q", B, "fiber", 2 * B, B, 0.0, 10])
    code, out, _ = run(["analyze", str(good)], capsys)
    assert code == 0
    assert "1.0000" in out

    short = tmp_path / "short.csv"
    with short.open("w") as f:
        w = csv.writer(f)
        w.writerow(["model_id", "field", "B", "method", "N_X", "N_U",
                    "seconds", "exc_bound"])
        for B in (10, 100):
            w.writerow(["dp5_test", "Q", B, "fiber", B, B, 0.0, 10])
    code, _, err = run(["analyze", str(short)], capsys)
    assert code == 2

    bad = tmp_path / "bad.csv"
    with bad.open("w") as f:
        w = csv.writer(f)
        w.writerow(["model_id", "field", "B", "method", "N_X", "N_U",
                    "seconds", "exc_bound"])
        for B in (10, 100, 1000):
            w.writerow(["dp3_test", "Q", B, "brute", B ** 3, B ** 3, 0.0, 10])
    code, out, _ = run(["analyze", str(bad)], capsys)
    assert code == 1 and "EXCEEDS" in out
