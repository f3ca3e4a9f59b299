import json
import subprocess
import sys

import numpy as np
import pytest

from graphspace.cli import main
from graphspace.harmonic import read_table, write_table
from graphspace.measures import SampleBatch


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out else None), err


def test_sample_shape_and_determinism(capsys, tmp_path):
    a, b = tmp_path / "a.bin", tmp_path / "b.bin"
    code, rep, _ = run(capsys, "sample", "--p", "0.5", "--depth", 16, "--count", 1000,
                       "--seed", 7, "--out", a)
    assert code == 0 and rep["count"] == 1000
    batch = SampleBatch.from_bytes(a.read_bytes())
    assert batch.bits.shape == (1000, 16)
    run(capsys, "sample", "--p", "0.5", "--depth", 16, "--count", 1000, "--seed", 7, "--out", b)
    assert a.read_bytes() == b.read_bytes()
    assert rep["manifest"]["outputs"][0]["sha256"]


def test_sample_all_ones(capsys, tmp_path):
    out = tmp_path / "s.bin"
    run(capsys, "sample", "--p", "1", "--depth", 8, "--count", 2, "--seed", 0, "--out", out)
    assert SampleBatch.from_bytes(out.read_bytes()).bits.all()


def test_sample_table_and_json(capsys, tmp_path):
    out, js = tmp_path / "s.bin", tmp_path / "s.json"
    code, rep, _ = run(capsys, "sample", "--table", "0,1,1/2", "--p", "0", "--depth", 5,
                       "--count", 4, "--seed", 3, "--out", out, "--json-out", js)
    assert code == 0
    rows = json.loads(js.read_text())["rows"]
    assert all(r[0] == "0" and r[1] == "1" and r[3:] == "00" for r in rows)


def test_sample_missing_probability(capsys, tmp_path):
    code, _, err = run(capsys, "sample", "--depth", 4, "--count", 2, "--seed", 1,
                       "--out", tmp_path / "x.bin")
    assert code == 2 and "error" in json.loads(err)


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["sample", "--depth", "4"])
    assert exc.value.code == 2


def test_expect_psi(capsys):
    code, rep, _ = run(capsys, "expect", "--stat", "psi_k", "--k", 1, "--p", "0.5",
                       "--count", 200000, "--seed", 3)
    assert code == 0
    assert rep["closed_form"] == {"exact": "2/1", "decimal": 2.0}
    assert rep["agree_4sigma"] is True
    assert set(rep["mc"]) >= {"mean", "std_error"}


def test_expect_norm1(capsys):
    code, rep, _ = run(capsys, "expect", "--stat", "norm1", "--phi", "geometric:2", "--p", "0.5",
                       "--count", 50000, "--seed", 1)
    assert code == 0 and rep["closed_form"]["exact"] == "1/2"


def test_expect_divergent(capsys):
    code, _, err = run(capsys, "expect", "--stat", "psi_k", "--k", 1, "--p", "0")
    assert code == 2 and json.loads(err)["error"] == "DivergentExpectation"


def test_expect_disagreement_exit_code(capsys):
    # a 0-sigma band cannot contain a noisy estimate
    code, rep, _ = run(capsys, "expect", "--stat", "psi_k", "--p", "0.5", "--count", 1000,
                       "--seed", 1, "--sigmas", 0)
    assert code == 1 and rep["agree_4sigma"] is False


def test_expect_unknown_statistic():
    with pytest.raises(SystemExit) as exc:
        main(["expect", "--stat", "bogus", "--p", "0.5"])
    assert exc.value.code == 2


def test_transfer_commands(capsys):
    code, rep, _ = run(capsys, "transfer", "--f", "neg-floor-log2", "--count", 50000, "--seed", 2)
    assert code == 0 and rep["interval_side"] == pytest.approx(2.0)
    code, rep, _ = run(capsys, "transfer", "--f", "identity", "--count", 50000, "--seed", 2)
    assert code == 0 and rep["interval_side"] == pytest.approx(0.5)
    code, rep, _ = run(capsys, "transfer", "--f", "indicator:0.25:0.75", "--exact")
    assert code == 0
    assert rep["graph_side"]["exact"] == rep["interval_side"]["exact"] == "1/2"


def test_transfer_unknown_function(capsys):
    code, _, _ = run(capsys, "transfer", "--f", "cosine")
    assert code == 2


def test_measure_queries(capsys):
    code, rep, _ = run(capsys, "measure", "ball", "--radius", "0.011", "--kind", "open")
    assert code == 0 and rep["measure"] == {"exact": "3/8", "decimal": 0.375}
    code, rep, _ = run(capsys, "measure", "cylinder", "--forbidden", "1", "--required", "2",
                       "--p", "1/2")
    assert rep["measure"]["exact"] == "1/4"
    code, rep, _ = run(capsys, "measure", "atoms", "--p", "0.9", "--depth", 20)
    assert rep["pi_last"]["decimal"] == pytest.approx(0.121577, abs=1e-6)


def test_measure_ones_tail_radius(capsys):
    code, _, err = run(capsys, "measure", "ball", "--radius", "0.0(1)")
    assert code == 2 and json.loads(err)["error"] == "UnsupportedExactRadius"


def test_wht_commands(capsys, tmp_path):
    src, spec, back = tmp_path / "f.bin", tmp_path / "s.bin", tmp_path / "g.bin"
    src.write_bytes(write_table(np.ones(8)))
    code, rep, _ = run(capsys, "wht", "--depth", 3, "--in", src, "--out", spec)
    assert code == 0 and rep["nonzero_indices"] == [0]
    f = np.random.default_rng(0).normal(size=1 << 10)
    src.write_bytes(write_table(f))
    run(capsys, "wht", "--depth", 10, "--in", src, "--out", spec)
    run(capsys, "wht", "--inverse", "--in", spec, "--out", back)
    assert np.max(np.abs(read_table(back.read_bytes()) - f)) <= 1e-12


def test_wht_depth_mismatch(capsys, tmp_path):
    src = tmp_path / "f.bin"
    src.write_bytes(write_table(np.ones(8)))
    code, _, _ = run(capsys, "wht", "--depth", 4, "--in", src, "--out", tmp_path / "o.bin")
    assert code == 2


def test_pd_check(capsys, tmp_path):
    mu, gs = tmp_path / "mu.json", tmp_path / "g.json"
    mu.write_text(json.dumps({"support": [{"kind": "finite", "support": []},
                                          {"kind": "finite", "support": [1]}],
                              "weights": ["1/2", "1/2"]}))
    rng = np.random.default_rng(4)
    graphs = [{"kind": "cofinite" if rng.random() < 0.5 else "finite",
               "support": sorted(set(int(x) for x in rng.integers(1, 12, size=4)))}
              for _ in range(50)]
    gs.write_text(json.dumps(graphs))
    code, rep, _ = run(capsys, "pd-check", "--measure", mu, "--graphs", gs, "--tol", "1e-9")
    assert code == 0 and rep["psd"] is True and rep["size"] == 50
    assert rep["f_zero"]["exact"] == "1/1"


def test_manifest_file_and_reproduction(capsys, tmp_path):
    out, man = tmp_path / "s.bin", tmp_path / "m.json"
    run(capsys, "sample", "--p", "0.3", "--depth", 20, "--count", 500, "--seed", 5,
        "--out", out, "--manifest", man)
    manifest = json.loads(man.read_text())
    assert manifest["command"] == "sample" and manifest["seed"] == 5
    first = manifest["outputs"][0]["sha256"]
    p = manifest["parameters"]
    run(capsys, "sample", "--p", p["p"], "--depth", p["depth"], "--count", p["count"],
        "--seed", manifest["seed"], "--out", out, "--manifest", man)
    assert json.loads(man.read_text())["outputs"][0]["sha256"] == first


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "graphspace", "measure", "cylinder",
                          "--forbidden", "1", "--required", "2", "--p", "1/2"],
                         capture_output=True, text=True, check=True)
    assert json.loads(res.stdout)["measure"]["exact"] == "1/4"
