import csv
import io
import json
import subprocess
import sys

import pytest

from ghz_lhv.cli import fmt_decimal, main
from ghz_lhv.lhv import canonical_table, dump_table


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_fmt_decimal():
    assert fmt_decimal(0.1875) == "0.1875"
    assert fmt_decimal(1) == "1"
    assert fmt_decimal(1 / 3) == "0.333333"
    assert fmt_decimal(0) == "0"


def test_predict_caption_row(capsys):
    code, out, _ = run(capsys, "predict", "--model", "pinned", "--context", "yyx")
    assert code == 0
    assert "RRV' 6/32 0.1875" in out.splitlines()
    assert "RRH' 2/32 0.0625" in out.splitlines()


def test_predict_uniform_context(capsys):
    code, out, _ = run(capsys, "predict", "--model", "pinned", "--context", "xxy", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 8
    assert {r["exact"] for r in rows} == {"4/32"} and {r["value"] for r in rows} == {"0.125"}


def test_predict_bad_context(capsys):
    code, _, err = run(capsys, "predict", "--context", "zzz")
    assert code == 2
    assert "position 1" in err


def test_unknown_flag_rejected(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["predict", "--frobnicate"])
    assert exc.value.code == 2


def test_qm(capsys):
    code, out, _ = run(capsys, "qm", "--context", "xxx", "--format", "json")
    doc = json.loads(out)
    assert doc["experiments"][0]["expectation"] == pytest.approx(1, abs=1e-12)


def test_compare(capsys):
    code, out, _ = run(capsys, "compare", "--data", "data/pan-aggregates.json", "--format", "json")
    doc = json.loads(out)
    assert doc["winner"] == "model"
    assert doc["model_average"] == pytest.approx(0.105)
    assert doc["qm_average"] == pytest.approx(0.145)
    code, out, _ = run(capsys, "compare", "--format", "csv")
    assert out.splitlines()[-1] == "average,0.105,0.145,model"


def test_compare_bad_data(capsys, tmp_path):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"experiments": [{"context": "yyx", "aggregate": {"predicted": 1.3, "spurious": 0}}]}))
    code, _, err = run(capsys, "compare", "--data", str(p))
    assert code == 2
    assert "aggregate.predicted" in err


def test_mermin(capsys):
    code, out, _ = run(capsys, "mermin", "--model", "pinned")
    assert out.splitlines()[0] == "mermin 2.0"
    code, out, _ = run(capsys, "mermin", "--qm")
    assert out.splitlines()[0] == "mermin 4.0"
    code, out, _ = run(capsys, "mermin", "--model", "uniform", "--format", "json")
    assert json.loads(out)["exact"] == "0"


def test_sample(capsys):
    code, _, err = run(capsys, "sample", "--n", "0")
    assert code == 2
    code, a, _ = run(capsys, "sample", "--n", "1000", "--seed", "5", "--format", "json")
    code, b, _ = run(capsys, "sample", "--n", "1000", "--seed", "5", "--format", "json")
    assert a == b
    assert sum(json.loads(a)["counts"].values()) == 1000


def test_model_sources(capsys, tmp_path):
    table = tmp_path / "t.txt"
    table.write_text(dump_table(canonical_table()))
    code, out, _ = run(capsys, "predict", "--model", str(table), "--context", "yyx")
    assert "RRV' 6/32 0.1875" in out
    bad = tmp_path / "bad.txt"
    bad.write_text("nonsense\n")
    code, _, err = run(capsys, "predict", "--model", str(bad))
    assert code == 2 and "header" in err
    code, _, err = run(capsys, "predict", "--model", "nowhere")
    assert code == 2


def test_predict_json_round_trips_through_fit(capsys, tmp_path):
    out_path = tmp_path / "pred.json"
    run(capsys, "predict", "--model", "pinned", "--format", "json", "--out", str(out_path))
    code, out, _ = run(capsys, "fit", "--targets", str(out_path), "--format", "json")
    assert code == 0
    assert json.loads(out)["objective"] == pytest.approx(0, abs=1e-9)


def test_fit_json_as_model_source(capsys, tmp_path):
    p = tmp_path / "fit.json"
    run(capsys, "fit", "--targets", "qm", "--format", "json", "--out", str(p))
    code, out, _ = run(capsys, "mermin", "--model", str(p))
    assert out.splitlines()[0] == "mermin 2.0"


def test_fit_table_out(capsys, tmp_path):
    pred = tmp_path / "pred.json"
    run(capsys, "predict", "--format", "json", "--out", str(pred))
    code, _, err = run(capsys, "fit", "--targets", "qm", "--table-out", str(tmp_path / "t.txt"))
    assert code == 2 and "not a uniform" in err


def test_fit_logs_certificate(capsys, caplog):
    code, out, _ = run(capsys, "fit", "--targets", "qm")
    assert code == 0
    assert any("Mermin" in r.getMessage() for r in caplog.records)


def test_search_table(capsys, tmp_path):
    code, out, _ = run(capsys, "search-table", "--limit", "3", "--format", "json")
    doc = json.loads(out)
    assert doc["count"] == 1 and not doc["truncated"]
    assert doc["tables"][0] == [s.text for s in canonical_table()]
    cpath = tmp_path / "c.json"
    cpath.write_text(json.dumps({"required": ["H'R|H'R|V'L"]}))
    code, out, _ = run(capsys, "search-table", "--constraints", str(cpath), "--limit", "2")
    assert code == 0 and out.count("ghz-lhv-table v1") == 2


def test_report(capsys, tmp_path):
    code, _, _ = run(capsys, "report", "--out", str(tmp_path / "rep"))
    assert code == 0
    bars = list(csv.DictReader((tmp_path / "rep" / "bars.csv").open()))
    assert set(bars[0]) == {"context", "outcome", "series", "value"}
    assert {b["series"] for b in bars} == {"qm", "model"}
    agg = list(csv.DictReader((tmp_path / "rep" / "aggregate_bars.csv").open()))
    assert {a["series"] for a in agg} == {"qm", "experiment", "model"}
    comp = json.loads((tmp_path / "rep" / "comparison.json").read_text())
    assert comp["winner"] == "model"
    code, _, err = run(capsys, "report")
    assert code == 2


def test_report_deterministic(capsys, tmp_path):
    run(capsys, "report", "--out", str(tmp_path / "a"))
    run(capsys, "report", "--out", str(tmp_path / "b"))
    for name in ("bars.csv", "aggregate_bars.csv", "comparison.csv", "comparison.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "ghz_lhv", "predict", "--context", "yyx"],
                       capture_output=True, text=True)
    assert r.returncode == 0
    assert "RRV' 6/32 0.1875" in r.stdout
