import csv
import io
import json
import subprocess
import sys

import pytest

from polarber.cli import main
from polarber.symparam import SymParamList, list_to_json


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_construct_paper_style(capsys):
    code, out, _ = run(capsys, "construct", "--theta", "0.78", "--n", "4", "--mode", "exact", "--paper-style")
    assert code == 0
    table = {r["index_bits"]: r for r in rows(out)}
    assert len(table) == 16
    assert table["0000"]["ber_upper"].startswith("-")
    assert table["1111"]["ber_upper"] == table["1111"]["ber_lower"] or table["1111"]["ber_lower"] < table["1111"]["ber_upper"]


def test_bsc_canonicalizes_to_single_entry(capsys):
    a = run(capsys, "construct", "--bsc", "0.11", "--n", "3")[1]
    b = run(capsys, "construct", "--theta", "0.78", "--n", "3")[1]
    assert a == b


def test_pipeline_composes_through_files(tmp_path, capsys):
    t = tmp_path / "t.csv"
    s = tmp_path / "s.json"
    assert run(capsys, "construct", "--bsc", "0.11", "--n", "5", "--mode", "interval", "--Q", "8", "--out", str(t))[0] == 0
    assert run(capsys, "select", str(t), "--k", "12", "--out", str(s))[0] == 0
    spec = json.loads(s.read_text())
    assert len(spec["I0"]) == 12 and len(spec["I1"]) == 20
    code, out, _ = run(capsys, "bounds", str(t), "--spec", str(s))
    bounds = json.loads(out)
    assert code == 0 and bounds["block_upper"] == spec["block_upper"]
    code, out, _ = run(capsys, "simulate", "--bsc", "0.11", "--spec", str(s), "--trials", "3000", "--seed", "2")
    stats = json.loads(out)
    assert code == 0 and len(stats["per_index"]) == 32
    code, out, _ = run(capsys, "simulate", "--bsc", "0.11", "--spec", str(s), "--trials", "3000", "--sim-mode", "block")
    assert json.loads(out)["block"]["trials"] == 3000
    code, out, _ = run(capsys, "select", str(t), "--beta", "0.3")
    assert code == 0 and "I0" in json.loads(out)


def test_identical_configs_give_identical_bytes(tmp_path, capsys):
    outs = []
    for threads in ("1", "3"):
        path = tmp_path / f"t{threads}.csv"
        run(capsys, "construct", "--theta", "0.78", "--n", "5", "--threads", threads, "--out", str(path))
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    t = tmp_path / "t1.csv"
    s = tmp_path / "s.json"
    run(capsys, "select", str(t), "--k", "16", "--out", str(s))
    sims = [
        run(capsys, "simulate", "--bsc", "0.11", "--spec", str(s), "--trials", "5000", "--seed", "7", "--threads", k)[1]
        for k in ("1", "2")
    ]
    assert sims[0] == sims[1]


def test_sorted_output_orders_by_error(capsys):
    out = run(capsys, "construct", "--theta", "0.78", "--n", "4")[1]
    from polarber.construct import records_from_csv

    recs = records_from_csv(out)
    ordered = sorted(recs, key=lambda r: r.ber_upper, reverse=True)
    assert ordered[0].index == "0000" and ordered[-1].index == "1111"


def test_quantize_command(tmp_path, capsys):
    src = tmp_path / "one.json"
    src.write_text(list_to_json(SymParamList.from_pairs([(1, "0.78")])))
    code, out, _ = run(capsys, "quantize", "--list", str(src), "--Q", "512")
    assert code == 0 and json.loads(out) == json.loads(src.read_text())
    big = tmp_path / "big.csv"
    big.write_text("mu,theta\n0.3,0.1\n0.4,-0.5\n0.3,0.9\n")
    dst = tmp_path / "out.csv"
    cert = tmp_path / "cert.json"
    code, _, _ = run(capsys, "quantize", "--list", str(big), "--Q", "2", "--direction", "upgrade", "--out", str(dst), "--certificate", str(cert))
    assert code == 0
    assert dst.read_text() == "mu,theta\n1/2,1/10\n1/2,9/10\n"
    c = json.loads(cert.read_text())
    assert c["holds"] and c["actual_merge_loss_sum"] == "4/125"


def test_invalid_configs_exit_nonzero(tmp_path, capsys):
    assert run(capsys, "construct", "--theta", "0.78", "--n", "3", "--mode", "interval")[0] == 1
    assert run(capsys, "construct", "--bsc", "0.7", "--n", "3")[0] == 1
    assert run(capsys, "construct", "--theta", "1.5", "--n", "3")[0] == 1
    assert run(capsys, "construct", "--theta", "0.78", "--n", "0")[0] == 1
    code, _, err = run(capsys, "bounds", str(tmp_path / "missing.csv"), "--spec", "x.json")
    assert code == 1 and "error" in err
    assert run(capsys, "select", str(tmp_path / "missing.csv"))[0] == 1
    with pytest.raises(SystemExit) as exc:
        main(["construct", "--theta", "0.78", "--bsc", "0.11", "--n", "3"])
    assert exc.value.code == 2


def test_module_entry_point():
    done = subprocess.run(
        [sys.executable, "-m", "polarber", "construct", "--theta", "0.5", "--n", "1"],
        capture_output=True, text=True, check=True,
    )
    assert done.stdout.splitlines()[0] == "index_bits,ber_lower,ber_upper,m_lower,m_upper"
