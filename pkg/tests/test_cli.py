import json
from pathlib import Path

import pytest

from qdifflab.cli import run

DATA = Path(__file__).parent / "data"


def call(capsys, *args):
    code = run([str(a) for a in args])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_surface_commands(capsys):
    code, out, _ = call(capsys, "surface", "check", DATA / "a2_surface.json")
    assert code == 0 and json.loads(out)["valid"]
    code, out, _ = call(capsys, "surface", "data", DATA / "qr_surface.json")
    d = json.loads(out)
    assert code == 0 and d["hat_rank"] == 6 and d["k"] == [7]


def test_quiver_verify_and_reduce(capsys):
    code, out, _ = call(capsys, "quiver", "verify", DATA / "a2_surface.json")
    assert code == 0 and json.loads(out)["d2_residues"] == []
    code, out, _ = call(capsys, "quiver", "reduce", DATA / "qr_surface.json", "--N", 3)
    d = json.loads(out)
    assert code == 0 and d["N"] == 3 and d["d2_residues"] == 0


def test_foliate_writes_svg(capsys, tmp_path):
    svg = tmp_path / "a2.svg"
    js = tmp_path / "a2.json"
    code, _, _ = call(capsys, "foliate", DATA / "a2.json", "--phase", 0, "--svg", svg, "--json", js)
    assert code == 0
    d = json.loads(js.read_text())
    assert d["saddle_free"] and (d["n_strips"], d["n_half_planes"]) == (2, 5)
    assert svg.read_text().startswith("<svg")
    period = d["strips"][0]["period"]
    assert isinstance(period, list) and len(period) == 2


def test_wind_and_periods(capsys):
    code, out, _ = call(capsys, "wind", DATA / "a2_cys.json", "--loop", DATA / "loops.json")
    rows = json.loads(out)["loops"]
    assert code == 0
    assert rows[1]["winding"] == pytest.approx(3.6, abs=1e-6)
    assert rows[0]["winding"] == pytest.approx(3 * 1.6 + 2, abs=1e-6)
    code, out, _ = call(capsys, "periods", DATA / "a2_cys.json", "--paths", DATA / "paths.json")
    d = json.loads(out)
    assert code == 0 and all(r["equivariance_residual"] < 1e-8 for r in d["periods"])


def test_cut_exit_codes(capsys):
    code, out, _ = call(capsys, "cut", DATA / "graph.json")
    assert code == 0 and json.loads(out)["edges"] == [[0, 0], [1, 2], [2, 1]]
    code, out, _ = call(capsys, "cut", DATA / "graph_hall.json")
    assert code == 1 and json.loads(out)["certificate"]["kind"] == "hall"


def test_induce_gate(capsys):
    code, out, _ = call(capsys, "induce", DATA / "stab.json", "--s", "3,0.2", "--mode", "open")
    d = json.loads(out)
    assert code == 0 and d["checks"]["support"] and len(d["induced_phases"]) == 6
    code, _, err = call(capsys, "induce", DATA / "stab.json", "--s", "1.5", "--mode", "open")
    assert code == 1 and "gldim" in err


def test_hurwitz_commands(capsys):
    code, out, _ = call(capsys, "hurwitz", "check", DATA / "a2.json")
    assert code == 0 and json.loads(out)["zero_count"]["ok"]
    code, out, _ = call(capsys, "hurwitz", "recover", DATA / "a2_cys.json")
    num = json.loads(out)["cover"]["num"]
    assert code == 0 and num[2][0] == pytest.approx(-3.0, abs=1e-8)


def test_errors(capsys, tmp_path):
    code, _, _ = call(capsys, "foliate", DATA / "a2.json", "--bogus")
    assert code == 1
    bad = tmp_path / "bad.json"
    bad.write_text('{"n_white": 1,\n "k": [1,], "edges": []}')
    code, _, err = call(capsys, "cut", bad)
    assert code == 1 and "bad.json:2:" in err
    code, _, err = call(capsys, "foliate", DATA / "a2_cys.json")
    assert code == 1
    code, _, _ = call(capsys, "foliate", DATA / "a2.json", "--tol", -1)
    assert code == 1


def test_numeric_failure_exit_code(capsys):
    # separatrices cannot reach a pole within a tiny length budget
    code, _, err = call(capsys, "foliate", DATA / "a2.json", "--budget", 0.01)
    assert code == 2 and "budget" in err


def test_byte_identical_output(capsys, tmp_path):
    outs = []
    for i in range(2):
        p = tmp_path / f"run{i}.json"
        assert run(["foliate", str(DATA / "a2.json"), "--phase", "0.3", "--json", str(p)]) == 0
        outs.append(p.read_bytes())
    assert outs[0] == outs[1]


def test_corpus_suites(capsys):
    code, out, err = call(capsys, "corpus", "--suite", "quiver")
    assert code == 0 and all(r["ok"] for r in json.loads(out)["quiver"])
    code, out, err = call(capsys, "corpus", "--suite", "periods")
    assert code == 0 and "periods: 12/12 ok" in err


def test_corpus_winding_and_bad_suite(capsys):
    code, out, err = call(capsys, "corpus", "--suite", "winding")
    assert code == 0 and all(r["ok"] for r in json.loads(out)["winding"])
    code, _, _ = call(capsys, "corpus", "--suite", "nonsense")
    assert code == 1
