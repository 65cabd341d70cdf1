import json
from pathlib import Path

import numpy as np
import pytest

from bellreal import corpus
from bellreal.cli import main
from bellreal.diagram import CORNERS, PAIRS
from bellreal.localreal import verify_certificate
from bellreal.localreal import InfeasibilityCertificate
from bellreal.serialize import dumps_square, load_square, loads_square, save_square

from conftest import EPR_TABLES

DATA = Path(__file__).resolve().parents[1] / "src" / "bellreal" / "data"


@pytest.fixture
def example_dir(tmp_path):
    assert main(["examples", str(tmp_path)]) == 0
    return tmp_path


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_shipped_examples_match_regenerated(example_dir):
    for name in corpus.EXAMPLES:
        assert json.loads((DATA / name).read_text()) == json.loads((example_dir / name).read_text())


def test_check_exit_codes(example_dir, capsys, tmp_path):
    for name in corpus.EXAMPLES:
        assert run(capsys, "check", str(example_dir / name))[0] == 0
    text = (example_dir / "quantum_epr.json").read_text()
    bad = tmp_path / "truncated.json"
    bad.write_text(text[: len(text) // 2])
    code, _, err = run(capsys, "check", str(bad))
    assert code == 2 and "not valid JSON" in err
    doc = json.loads(text)
    doc["joints"]["QS"][0][0] += 1e-3
    perturbed = tmp_path / "perturbed.json"
    perturbed.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "check", str(perturbed))
    assert code == 1 and "QS" in out
    assert run(capsys, "check", str(tmp_path / "missing.json"))[0] == 2


def test_check_json_report(example_dir, capsys):
    code, out, _ = run(capsys, "check", "--json", str(example_dir / "pr_box.json"))
    assert code == 0
    assert json.loads(out) == {"valid": True, "violations": []}


def test_realize_product(example_dir, capsys):
    code, out, _ = run(capsys, "realize", "--json", str(example_dir / "product.json"))
    assert code == 0
    rep = json.loads(out)["realization"]
    assert rep["status"] == "feasible"
    bs, _ = load_square(example_dir / "product.json")
    want = np.einsum("i,j,k,l->ijkl", *(bs.corners[c].probs for c in CORNERS)).ravel()
    np.testing.assert_allclose(rep["joint"]["table"], want, atol=1e-7)


@pytest.mark.parametrize("name", ["quantum_epr.json", "pr_box.json"])
def test_realize_infeasible_with_verified_certificate(example_dir, capsys, name):
    code, out, _ = run(capsys, "realize", "--json", "--emit-certificate", str(example_dir / name))
    assert code == 3
    rep = json.loads(out)["realization"]
    assert rep["status"] == "infeasible" and "joint" not in rep
    cert = rep["certificate"]
    bs, _ = load_square(example_dir / name)
    c = InfeasibilityCertificate({p: np.array(w) for p, w in cert["weights"].items()},
                                 cert["bound"], cert["observed"])
    assert verify_certificate(bs, c) == []


def test_realize_human_output(example_dir, capsys):
    code, out, _ = run(capsys, "realize", "--emit-certificate", str(example_dir / "quantum_epr.json"))
    assert code == 3
    assert "certificate verified: True" in out and "QT:" in out


def test_realize_numerical_failure(example_dir, capsys, monkeypatch):
    from bellreal import cli
    from bellreal.simplex import NumericalFailure

    def boom(*a, **k):
        raise NumericalFailure("numerical failure: forced")

    monkeypatch.setattr(cli, "find_local_realization", boom)
    code, _, err = run(capsys, "realize", str(example_dir / "pr_box.json"))
    assert code == 4 and "numerical failure" in err


def test_chsh_with_stored_rvs(example_dir, capsys):
    code, out, _ = run(capsys, "chsh", str(example_dir / "quantum_epr.json"))
    assert code == 3
    assert "2.8284271" in out


def test_chsh_maximize_product(example_dir, capsys):
    code, out, _ = run(capsys, "chsh", "--maximize", "--json", str(example_dir / "product.json"))
    assert code == 0
    rep = json.loads(out)["chsh"]
    assert rep["max"] <= 2 + 1e-9 and rep["violation"] is False
    assert set(rep["assignment"]["signs"]) == set(CORNERS)


def test_chsh_without_rvs(example_dir, capsys):
    code, _, err = run(capsys, "chsh", str(example_dir / "product.json"))
    assert code == 2 and "--maximize" in err


def test_chsh_json_report(example_dir, capsys):
    code, out, _ = run(capsys, "chsh", "--json", "--maximize", str(example_dir / "pr_box.json"))
    assert code == 3
    rep = json.loads(out)
    assert rep["valid"] is True
    assert rep["chsh"]["value"] == 4.0 and rep["chsh"]["max"] == pytest.approx(4.0)
    assert rep["chsh"]["violation"] is True


def test_quantum_matches_epr_tables(tmp_path, capsys):
    out = tmp_path / "q.json"
    assert main(["quantum", "--state", "epr", "--uQ", "0,0,1", "--uR", "1,0,0",
                 f"--uS={-2 ** -0.5},0,{-2 ** -0.5}", f"--uT={-2 ** -0.5},0,{2 ** -0.5}",
                 "--out", str(out)]) == 0
    bs, rvs = load_square(out)
    for p in PAIRS:
        np.testing.assert_allclose(bs.table(p), EPR_TABLES[p], atol=1e-12, rtol=0)
    assert rvs == {c: [1.0, -1.0] for c in CORNERS}
    assert run(capsys, "check", str(out))[0] == 0


def test_quantum_file_matches_example(tmp_path, example_dir):
    out = tmp_path / "q.json"
    assert main(["quantum", "--out", str(out)]) == 0
    a, _ = load_square(out)
    b, _ = load_square(example_dir / "quantum_epr.json")
    for p in PAIRS:
        np.testing.assert_allclose(a.table(p), b.table(p), atol=1e-12, rtol=0)


def test_quantum_maxmixed(tmp_path, capsys):
    code, out, _ = run(capsys, "quantum", "--state", "maxmixed")
    assert code == 0
    bs, _ = loads_square(out)
    for p in PAIRS:
        np.testing.assert_allclose(bs.table(p), 0.25, atol=1e-15)


def test_quantum_state_file(tmp_path, capsys):
    f = tmp_path / "rho.json"
    f.write_text(json.dumps({"real": (np.eye(4) / 4).tolist()}))
    assert run(capsys, "quantum", "--state", str(f))[0] == 0


@pytest.mark.parametrize("argv", [
    ["quantum", "--uQ", "1,1,0"],
    ["quantum", "--uQ", "1,0"],
    ["quantum", "--state", "nope.json"],
    ["frobnicate"],
])
def test_quantum_usage_errors(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        code = main(argv)
        raise SystemExit(code)
    assert exc.value.code == 2


def test_round_trip_is_bit_exact(tmp_path):
    for name, (build, rvs) in corpus.EXAMPLES.items():
        bs = build()
        path = tmp_path / name
        save_square(path, bs, rvs)
        again, rvs2 = load_square(path)
        for c in CORNERS:
            assert again.corners[c].labels == bs.corners[c].labels
            assert again.corners[c].probs.tobytes() == bs.corners[c].probs.tobytes()
        for p in PAIRS:
            assert again.table(p).tobytes() == bs.table(p).tobytes()
        assert dumps_square(again, rvs2) == dumps_square(bs, rvs)


def test_seventeen_digit_numbers_round_trip():
    bs = corpus.quantum_epr_square()
    doc = json.loads(dumps_square(bs))
    for p in PAIRS:
        for row, orig in zip(doc["joints"][p], bs.table(p)):
            for v, o in zip(row, orig):
                assert float(f"{o:.17g}") == v == o


def test_malformed_documents():
    from bellreal.serialize import SquareFileError
    good = json.loads(dumps_square(corpus.product_square()))
    for mutate in (lambda d: d.pop("joints"),
                   lambda d: d["corners"]["Q"].update(probs=["x", 1]),
                   lambda d: d["joints"].update(QS=[[1.0]]),
                   lambda d: d.update(rvs={c: [1] for c in CORNERS})):
        doc = json.loads(json.dumps(good))
        mutate(doc)
        with pytest.raises(SquareFileError):
            loads_square(json.dumps(doc))
    with pytest.raises(SquareFileError):
        loads_square("[1, 2]")
