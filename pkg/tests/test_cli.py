import json

import numpy as np
import pytest

from qspskt import su2
from qspskt.cli import EXIT_CONVERGENCE, EXIT_OK, EXIT_PARSE, EXIT_PRECONDITION, main
from qspskt.protocol import ChebSeries, Protocol, dumps, loads, protocol_to_json


def _write(path, obj):
    path.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(path)


@pytest.fixture
def protocol_file(tmp_path):
    return _write(tmp_path / "p.json", dumps(Protocol.standard([np.pi / 4, 0, np.pi / 4])))


def test_eval_single_point(protocol_file, tmp_path, capsys):
    out = tmp_path / "o.json"
    assert main(["eval", protocol_file, "--x", "0.5", "--json-out", str(out)]) == EXIT_OK
    d = json.loads(out.read_text())
    assert d == json.loads(capsys.readouterr().out)
    node = d["nodes"][0]
    assert d["oracle_length"] == 2 and node["x"] == 0.5
    U = np.array([[complex(*z) for z in row] for row in node["unitary"]])
    np.testing.assert_allclose(U @ U.conj().T, np.eye(2), atol=1e-12)
    assert node["re_p"] == pytest.approx(U[0, 0].real)
    assert node["pi_top_left"] == pytest.approx(U[0, 0].imag)


def test_eval_grid(protocol_file, capsys):
    assert main(["eval", protocol_file, "--grid", "5"]) == EXIT_OK
    assert len(json.loads(capsys.readouterr().out)["nodes"]) == 5


def test_eval_parse_errors(tmp_path, capsys):
    bad = _write(tmp_path / "bad.json", '{"convention": "standard",\n "phases": [0.1,')
    assert main(["eval", bad]) == EXIT_PARSE
    assert "line 2" in capsys.readouterr().err
    assert main(["eval", str(tmp_path / "missing.json")]) == EXIT_PARSE


def test_eval_non_unitary_fixed_gate(tmp_path):
    d = protocol_to_json(Protocol.fixed(su2.IH))
    d["interleave"][0]["matrix"] = [[[2.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.5, 0.0]]]
    path = _write(tmp_path / "nu.json", d)
    with pytest.raises(Exception):
        loads(json.dumps(d))
    assert main(["eval", path]) == EXIT_PARSE


def test_fit_is_deterministic(tmp_path, capsys):
    t = _write(tmp_path / "t.json", ChebSeries([0, 0, 0.9]).to_json())
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["fit", t, "--degree", "2", "--json-out", str(a)]) == EXIT_OK
    assert main(["--seed", "0", "fit", t, "--degree", "2", "--json-out", str(b)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    d = json.loads(a.read_text())
    assert d["converged"] and d["residual"] <= 1e-6
    assert loads(json.dumps(d["protocol"])).oracle_length == 2


def test_fit_plain_number_coefficients(tmp_path):
    t = _write(tmp_path / "t.json", {"coeffs": [0, 0.5]})
    assert main(["fit", t, "--degree", "1"]) == EXIT_OK


def test_fit_wrong_parity(tmp_path):
    t = _write(tmp_path / "t.json", {"coeffs": [0, 0, 0.5]})
    assert main(["fit", t, "--degree", "3"]) == EXIT_PRECONDITION


def test_fit_bad_coefficients(tmp_path):
    t = _write(tmp_path / "t.json", {"coeffs": [[0, 1, 2]]})
    assert main(["fit", t, "--degree", "1"]) == EXIT_PARSE


def test_synthesize(tmp_path):
    t = _write(tmp_path / "t.json", {"coeffs": [0, 0, 0.5, 0, 0.3]})
    out = tmp_path / "s.json"
    code = main(["synthesize", t, "--epsilon", "1e-3", "--builder", "fourier-lcu", "--min-level", "1",
                 "--json-out", str(out)])
    assert code == EXIT_OK
    d = json.loads(out.read_text())
    assert d["level"] == 1 and d["residual"] <= 1e-3 and len(d["ledger"]) == 2


def test_synthesize_infeasible_emits_best(tmp_path, capsys):
    t = _write(tmp_path / "t.json", {"coeffs": [0, 0, 0.5, 0, 0.3]})
    code = main(["synthesize", t, "--epsilon", "1e-14", "--builder", "fourier-lcu", "--depth", "1"])
    assert code == EXIT_CONVERGENCE
    d = json.loads(capsys.readouterr().out)
    assert d["converged"] is False


@pytest.mark.parametrize("suite", ["nested-commutator-scaling", "planarity", "schedule"])
def test_verify_suites(suite, capsys):
    assert main(["verify", suite]) == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines and all(line.startswith("PASS") for line in lines)


def test_verify_unknown_suite(capsys):
    assert main(["verify", "nope"]) == EXIT_PRECONDITION
    assert "planarity" in capsys.readouterr().err


def test_verify_json_out(tmp_path):
    out = tmp_path / "v.json"
    assert main(["verify", "schedule", "--json-out", str(out)]) == EXIT_OK
    assert all(r["pass"] for r in json.loads(out.read_text()))
