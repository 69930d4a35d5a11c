import copy
import io
import json
import sys

import pytest

from robba.cli import main, run, selfcheck
from robba.fixtures import corpus
from robba.serialize import DocumentError, dumps


def by_name(name):
    return next(d for d in corpus() if d["name"] == name)


def failing(rep):
    return sorted(c["name"] for c in rep.to_json()["checks"] if not c["pass"])


@pytest.mark.parametrize("doc", corpus(), ids=lambda d: d["name"])
def test_corpus_document_passes(doc):
    rep = run(doc)
    assert rep.passed, rep.to_json()


def test_mutated_scalar_expectation_flags_only_itself():
    doc = by_name("unitroot_lang_two")
    doc["expect"]["m"] = "3"
    rep = run(doc)
    assert failing(rep) == ["expect.m"]


def test_mutated_matrix_expectation_flags_only_itself():
    doc = by_name("approximate_inverse_unipotent")
    doc["expect"]["X"][0][1] = {"-1": "-10"}
    rep = run(doc)
    assert failing(rep) == ["expect.X"]


def test_mutated_input_breaks_expectations():
    doc = by_name("unitroot_lang_two")
    doc["inputs"]["phi"] = [[{"0": "4", "1": "5"}]]  # 4 has order 2, so m drops to 2
    rep = run(doc)
    assert "expect.m" in failing(rep)
    assert rep.values["m"] == "2"


def test_task_failure_recorded_in_report():
    doc = by_name("unitroot_lang_two")
    doc["inputs"]["phi"] = [[{"0": "5", "1": "1"}]]
    rep = run(doc)
    out = rep.to_json()
    assert out["status"] == "fail"
    assert out["error"].startswith("NotUnitRootError")


def test_bad_documents():
    with pytest.raises(DocumentError, match="task"):
        run({"task": "nope"})
    with pytest.raises(DocumentError):
        run([1, 2])
    doc = by_name("unitroot_trivial")
    doc["ring"] = {"p": "6"}
    with pytest.raises((DocumentError, ValueError)):
        run(doc)


def test_random_inputs_follow_seed():
    doc = {"task": "factor", "ring": {"p": "5"}, "inputs": {"U": {"random": "near_identity", "n": "2"}},
           "options": {"r": "1/2", "method": "birkhoff"}}
    a = dumps(run(copy.deepcopy(doc), seed=7).to_json())
    b = dumps(run(copy.deepcopy(doc), seed=7).to_json())
    c = dumps(run(copy.deepcopy(doc), seed=8).to_json())
    assert a == b and a != c


def test_selfcheck_deterministic():
    a, b = dumps(selfcheck(3)), dumps(selfcheck(3))
    assert a == b
    assert json.loads(a)["status"] == "pass"


def test_main_round_trip(tmp_path, capsys):
    src = tmp_path / "doc.json"
    src.write_text(dumps(by_name("unitroot_lang_two")))
    out = tmp_path / "rep.json"
    assert main(["--input", str(src), "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["status"] == "pass" and rep["values"]["m"] == "4"


def test_main_stdin_and_failure_code(monkeypatch, capsys):
    doc = by_name("unitroot_lang_two")
    doc["expect"]["m"] = "3"
    monkeypatch.setattr(sys, "stdin", io.StringIO(dumps(doc)))
    assert main(["--input", "-"]) == 1
    assert json.loads(capsys.readouterr().out)["status"] == "fail"


def test_main_bad_json(tmp_path, capsys):
    src = tmp_path / "bad.json"
    src.write_text('{"task": "factor",\n "ring": }')
    assert main(["--input", str(src)]) == 1
    assert "line 2 column" in capsys.readouterr().err


def test_main_requires_input(capsys):
    assert main([]) == 1


def test_main_rejects_bad_seed():
    with pytest.raises(SystemExit):
        main(["--selfcheck", "--seed", str(2**64)])
