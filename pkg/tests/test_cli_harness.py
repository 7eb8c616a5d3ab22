import csv
import io
import json

import numpy as np
import pytest

from gradqem import cli_harness as ch
from gradqem.cli_harness import CSV_HEADER, RunConfig, UsageError, main


def _call(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_csv_header(capsys):
    code, out, _ = _call(capsys, "beam", "--bc", "ss", "--modes", "2")
    assert code == 0
    assert out.splitlines()[0] == ",".join(CSV_HEADER)


def test_beam_ss_example(capsys):
    code, out, _ = _call(capsys, "beam", "--bc", "ss", "--basis", "lagrange", "--n", "13", "--g", "1e-5",
                         "--modes", "3")
    assert code == 0
    rows = _rows(out)
    assert [r["source"] for r in rows] == ["qem"] * 3
    got = np.array([float(r["omega_bar"]) for r in rows])
    np.testing.assert_allclose(got, [9.870, 39.478, 88.826], rtol=5e-4)
    assert [int(r["mode_index"]) for r in rows] == [1, 2, 3]


def test_plate_with_oracle_example(capsys):
    code, out, _ = _call(capsys, "plate", "--bc", "ssss", "--basis", "ll", "--n", "11", "--g", "0.05",
                         "--modes", "1", "--with-oracle")
    assert code == 0
    rows = _rows(out)
    assert [r["source"] for r in rows] == ["qem", "oracle"]
    assert float(rows[0]["omega_bar"]) == pytest.approx(20.21, rel=1e-3)
    assert float(rows[1]["omega_bar"]) == pytest.approx(20.220, abs=5e-4)


def test_hermite_clamped_classical(capsys):
    code, out, _ = _call(capsys, "beam", "--bc", "clamped", "--basis", "hermite", "--n", "13", "--g", "0",
                         "--modes", "1")
    assert code == 0
    assert float(_rows(out)[0]["omega_bar"]) == pytest.approx(22.373, rel=1e-3)


def test_nine_significant_digits(capsys):
    _, out, _ = _call(capsys, "beam", "--bc", "ss", "--modes", "1")
    val = _rows(out)[0]["omega_bar"]
    assert len(val.replace(".", "").lstrip("0")) <= 9


def test_deterministic_output(capsys):
    args = ("plate", "--bc", "ffff", "--basis", "lh", "--n", "9", "--g", "0.1", "--with-oracle")
    # with-oracle is only valid for SSSS plates
    assert _call(capsys, *args)[0] == 1
    args = ("beam", "--bc", "cantilever", "--basis", "hermite", "--g", "0.05", "--with-oracle")
    first = _call(capsys, *args)[1]
    second = _call(capsys, *args)[1]
    assert first == second and first


def test_usage_errors(capsys):
    assert _call(capsys, "plate", "--bc", "cantilever")[0] == 1
    assert _call(capsys, "beam", "--bc", "ssss")[0] == 1
    assert _call(capsys, "beam", "--basis", "ll")[0] == 1
    assert _call(capsys, "beam", "--modes", "0")[0] == 1
    assert _call(capsys, "beam", "--g", "-1")[0] == 1
    assert _call(capsys, "plate", "--treatment", "slope")[0] == 1
    assert _call(capsys, "reproduce", "--table", "9")[0] == 1
    assert _call(capsys, "converge", "--n-range", "9,7")[0] == 1
    assert _call(capsys, "converge", "--n-range", "4:8")[0] == 1
    assert _call(capsys, "beam", "--bogus")[0] == 1
    assert _call(capsys, "beam", "--n", "13", "--modes", "40")[0] == 1


def test_numerical_failure_exit(capsys):
    code, _, err = _call(capsys, "oracle", "--bc", "ss", "--g", "0.5", "--modes", "200")
    assert code == 2
    assert "numerical failure" in err


def test_strict_reproduce_exit_codes(capsys):
    assert _call(capsys, "reproduce", "--table", "4", "--strict")[0] == 0
    code, out, err = _call(capsys, "reproduce", "--table", "6", "--strict")
    assert code == 3
    assert "strict" in err and "Table 6" in out
    # without --strict the same table is a plain success
    assert _call(capsys, "reproduce", "--table", "6")[0] == 0


def test_reproduce_csv_sources(capsys):
    code, out, _ = _call(capsys, "reproduce", "--table", "7", "--format", "csv")
    assert code == 0
    rows = _rows(out)
    assert {r["source"] for r in rows} == {"qem", "paper"}
    code, out, _ = _call(capsys, "reproduce", "--table", "6", "--format", "csv")
    assert {r["source"] for r in _rows(out)} == {"qem", "oracle", "paper"}


def test_reproduce_beam_has_both_readings(capsys):
    rep = ch.reproduce_table(1)
    assert "g reading: label" in rep.text and "g reading: scaled" in rep.text
    assert "documented" in rep.text


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"bc": "clamped", "basis": "lagrange", "n": 11, "g": 0.0, "modes": 2}))
    code, out, _ = _call(capsys, "beam", "--config", str(cfg))
    assert code == 0
    rows = _rows(out)
    assert rows[0]["bc"] == "clamped" and rows[0]["N"] == "11" and len(rows) == 2
    code, out, _ = _call(capsys, "beam", "--config", str(cfg), "--bc", "ss", "--modes", "1")
    rows = _rows(out)
    assert rows[0]["bc"] == "ss" and len(rows) == 1
    assert float(rows[0]["omega_bar"]) == pytest.approx(np.pi ** 2, rel=1e-6)


def test_bad_config(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"bc": "ss", "nested": {"a": 1}}))
    assert _call(capsys, "beam", "--config", str(p))[0] == 1
    p.write_text(json.dumps({"colour": "red"}))
    assert _call(capsys, "beam", "--config", str(p))[0] == 1
    p.write_text(json.dumps({"problem": "plate"}))
    assert _call(capsys, "beam", "--config", str(p))[0] == 1
    assert _call(capsys, "beam", "--config", str(tmp_path / "missing.json"))[0] == 1


def test_out_file(tmp_path, capsys):
    out = tmp_path / "r.csv"
    assert _call(capsys, "beam", "--modes", "2", "--out", str(out))[0] == 0
    assert capsys.readouterr().out == ""
    assert out.read_text().startswith("case_id,")


def test_table_format(capsys):
    code, out, _ = _call(capsys, "beam", "--modes", "2", "--format", "table")
    assert code == 0
    assert "," not in out.splitlines()[0]


def test_oracle_rows(capsys):
    code, out, _ = _call(capsys, "oracle", "--problem", "beam", "--bc", "ss", "--g", "0.05", "--modes", "3")
    assert code == 0
    rows = _rows(out)
    assert all(r["source"] == "oracle" and r["basis"] == "exact" for r in rows)
    k = np.arange(1, 4) * np.pi
    np.testing.assert_allclose([float(r["omega_bar"]) for r in rows], k ** 2 * np.sqrt(1 + 0.05 ** 2 * k ** 2),
                               rtol=1e-8)


def test_run_sorted_by_mode():
    rows = ch.run(RunConfig(problem="beam", bc="ss", g=0.05, modes=3, with_oracle=True))
    assert [r.mode_index for r in rows] == [1, 1, 2, 2, 3, 3]
    assert [r.source for r in rows[:2]] == ["qem", "oracle"]


def test_converge_rows(capsys):
    code, out, _ = _call(capsys, "converge", "--problem", "beam", "--bc", "ss", "--n-range", "7:10",
                         "--modes", "3", "--with-oracle")
    assert code == 0
    rows = _rows(out)
    qem = [r for r in rows if r["source"] == "qem"]
    ref = [r for r in rows if r["source"] == "oracle"]
    assert len(qem) == 12 and len(ref) == 3
    assert sorted({int(r["N"]) for r in qem}) == [7, 8, 9, 10]


def test_convergence_study_errors_shrink():
    # near-classical: errors fall monotonically until the roundoff floor
    cfg = RunConfig(problem="beam", bc="ss", g=1e-5, modes=3)
    rows = ch.convergence_study(cfg, range(7, 14))
    for m in range(1, 4):
        errs = [abs(r.omega_bar / (m * np.pi) ** 2 - 1) for r in rows if r.mode_index == m]
        for a, b in zip(errs, errs[1:]):
            assert b < a or b < 1e-8
        assert errs[3] < 1e-3   # N = 10


def test_convergence_study_gradient_beam():
    # with g > 0 the error alternates between odd and even N but is below 0.1% from N = 10
    cfg = RunConfig(problem="beam", bc="ss", g=0.05, modes=3)
    rows = ch.convergence_study(cfg, range(7, 14))
    ref = ch.oracle_frequencies(cfg.normalized(), 3)
    for m in range(1, 4):
        errs = [abs(r.omega_bar / ref[m - 1] - 1) for r in rows if r.mode_index == m]
        assert max(errs[3:]) < 1e-3
        assert errs[-1] < 1e-6
        assert errs[-1] < errs[-3] < errs[-5] or errs[-1] < 1e-10


def test_threads_env_same_result(monkeypatch):
    cfg = RunConfig(problem="plate", bc="ssss", basis="LL", g=0.05, modes=2)
    monkeypatch.setenv("GRADQEM_THREADS", "1")
    a = ch.convergence_study(cfg, [7, 9, 11])
    monkeypatch.setenv("GRADQEM_THREADS", "3")
    b = ch.convergence_study(cfg, [7, 9, 11])
    assert a == b
    monkeypatch.setenv("GRADQEM_THREADS", "junk")
    assert ch._threads() == 1


def test_reference_errata_applied():
    raw = ch.load_reference_tables(corrected=False)
    fixed = ch.load_reference_tables()
    assert raw["errata"]
    e = raw["errata"][0]
    col = raw["tables"][e["table"]]["g_labels"].index(e["g_label"])
    assert fixed["tables"][e["table"]]["rows"][e["row"]][e["mode"] - 1][col] == e["corrected"]


def test_normalized_rejects():
    with pytest.raises(UsageError):
        RunConfig(problem="shell").normalized()
    with pytest.raises(UsageError):
        RunConfig(format="xml").normalized()
    with pytest.raises(UsageError):
        RunConfig(treatment="soft").normalized()
