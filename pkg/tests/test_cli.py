import json

import pytest

from discrel.cli import main, read_config_file
from discrel.corpus import RELATIONS


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    assert main(["synth", "--out", str(out), "--seed", "3",
                 "--n-train", "600", "--n-dev", "300", "--n-test", "200"]) == 0
    return out


def data_args(d, *splits):
    args = []
    for s in splits:
        args += [f"--{s}", str(d / f"{s}.jsonl")]
    return args + ["--lexicon", str(d / "lexicon.tsv")]


@pytest.fixture(scope="module")
def pipeline_run(synth_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    code = main(["pipeline", *data_args(synth_dir, "train", "dev", "test"),
                 "--variant", "average+srl", "--out", str(out)])
    assert code == 0
    return out


def test_synth_twice_identical_manifests(tmp_path):
    for name in ("a", "b"):
        assert main(["synth", "--out", str(tmp_path / name), "--seed", "4",
                     "--n-train", "50", "--n-dev", "20", "--n-test", "20"]) == 0
    assert (tmp_path / "a/manifest.json").read_bytes() == (tmp_path / "b/manifest.json").read_bytes()


def test_pipeline_outputs(pipeline_run):
    for name in ("selection.json", "predictions.jsonl", "report.txt", "report.json",
                 "manifest.json", "model/suite.json"):
        assert (pipeline_run / name).is_file(), name
    header, row = (pipeline_run / "report.txt").read_text().splitlines()
    assert header.split() == ["comp", "cont", "exp", "temp"]
    assert row.split()[0] == "AverageFeats+SRL" and len(row.split()) == 5
    sel = json.loads((pipeline_run / "selection.json").read_text())
    keys = [c["feature_type"] for c in sel["Contingency"]["chosen"]]
    assert any(k.startswith(("framenet", "propbank")) for k in keys)


def test_manifest_contents(pipeline_run):
    m = json.loads((pipeline_run / "manifest.json").read_text())
    assert m["command"] == "pipeline"
    assert set(m["inputs"]) == {"train", "dev", "test", "lexicon"}
    assert "report.txt" in m["outputs"] and "model/suite.json" in m["outputs"]
    assert {"discrel", "numpy", "scipy", "python"} <= set(m["versions"])
    assert len(m["config_sha256"]) == 64


def test_step_by_step_matches_pipeline(synth_dir, pipeline_run, tmp_path):
    sel = tmp_path / "sel"
    assert main(["select", *data_args(synth_dir, "train", "dev"), "--out", str(sel)]) == 0
    assert (sel / "selection.json").read_bytes() == (pipeline_run / "selection.json").read_bytes()
    trained = tmp_path / "trained"
    assert main(["train", *data_args(synth_dir, "train"), "--selection", str(sel / "selection.json"),
                 "--out", str(trained)]) == 0
    pred = tmp_path / "pred"
    assert main(["predict", *data_args(synth_dir, "test"), "--model", str(trained / "model"),
                 "--out", str(pred)]) == 0
    assert (pred / "predictions.jsonl").read_bytes() == (pipeline_run / "predictions.jsonl").read_bytes()
    ev = tmp_path / "ev"
    assert main(["evaluate", *data_args(synth_dir, "test"), "--predictions",
                 str(pred / "predictions.jsonl"), "--out", str(ev)]) == 0
    assert (ev / "report.txt").read_text() == (pipeline_run / "report.txt").read_text()


def test_evaluate_missing_id(synth_dir, pipeline_run, tmp_path, capsys):
    lines = (pipeline_run / "predictions.jsonl").read_text().splitlines()
    dropped = json.loads(lines[5])["id"]
    preds = tmp_path / "partial.jsonl"
    preds.write_text("\n".join(lines[:5] + lines[6:]) + "\n")
    code = main(["evaluate", *data_args(synth_dir, "test"), "--predictions", str(preds),
                 "--out", str(tmp_path / "ev")])
    assert code == 4
    assert dropped in capsys.readouterr().err


def test_inspect_writes_reports(synth_dir, pipeline_run, tmp_path, capsys):
    out = tmp_path / "insp"
    code = main(["inspect", "--model", str(pipeline_run / "model"), "--lexicon",
                 str(synth_dir / "lexicon.tsv"), "--relation", "Contingency", "--k", "5", "--out", str(out)])
    assert code == 0
    reports = sorted(out.glob("weights.Contingency.*.json"))
    assert reports
    data = json.loads(reports[0].read_text())
    assert data["relation"] == "Contingency" and 0 < len(data["rows"]) <= 10
    assert "Weight" in capsys.readouterr().out


def test_extract_dump(synth_dir, tmp_path):
    out = tmp_path / "feats.jsonl"
    assert main(["extract", *data_args(synth_dir, "train"), "--types", "framenet,coref",
                 "--out", str(out)]) == 0
    first = json.loads(out.read_text().splitlines()[0])
    assert set(first["features"]) == {"framenet", "coref"}


def test_allfeats_variant(synth_dir, tmp_path):
    out = tmp_path / "all"
    assert main(["pipeline", *data_args(synth_dir, "train", "dev", "test"), "--variant", "allfeats",
                 "--Cs", "1", "--min-counts", "1", "--out", str(out)]) == 0
    suite = json.loads((out / "model/suite.json").read_text())
    assert suite["variant"] == "AllFeats"
    assert all(len(suite["relations"][r]) == 1 for r in RELATIONS)
    assert "AllFeats" in (out / "report.txt").read_text()


def test_average_variant_has_no_roles(synth_dir, tmp_path):
    out = tmp_path / "avg"
    assert main(["select", *data_args(synth_dir, "train", "dev"), "--variant", "average",
                 "--Cs", "1", "--min-counts", "1", "--out", str(out)]) == 0
    sel = json.loads((out / "selection.json").read_text())
    for rel in RELATIONS:
        assert not any(c["feature_type"].startswith(("framenet", "propbank")) for c in sel[rel]["chosen"])


def test_config_file_and_manifest_reuse(synth_dir, pipeline_run, tmp_path):
    cfg = tmp_path / "run.conf"
    cfg.write_text(f"# small grid\nCs = 1\nmin_counts = 1\nvariant = average+srl\n"
                   f"train = {synth_dir / 'train.jsonl'}\ndev = {synth_dir / 'dev.jsonl'}\n"
                   f"lexicon = {synth_dir / 'lexicon.tsv'}\n")
    values = read_config_file(cfg)
    assert values["Cs"] == "1" and values["variant"] == "average+srl"
    assert main(["select", "--config", str(cfg), "--out", str(tmp_path / "s")]) == 0
    # a pipeline manifest doubles as a config file
    values = read_config_file(pipeline_run / "manifest.json")
    assert values["variant"] == "average+srl" and values["Cs"] == "0.01,0.1,1,10"


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "bad.conf"
    cfg.write_text("learning_rate = 3\n")
    assert main(["select", "--config", str(cfg), "--out", str(tmp_path)]) == 1
    assert "learning_rate" in capsys.readouterr().err


def test_usage_errors(tmp_path):
    with pytest.raises(SystemExit) as err:
        main(["frobnicate"])
    assert err.value.code == 1
    with pytest.raises(SystemExit) as err:
        main(["pipeline", "--k", "x"])
    assert err.value.code == 1
    assert main(["pipeline", "--out", str(tmp_path)]) == 1
    assert main(["select", "--train", "x", "--dev", "y", "--variant", "fancy", "--out", str(tmp_path)]) == 1


def test_bad_data_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"format": "discrel-instances", "version": 1}\n{"id": 3\n')
    code = main(["extract", "--train", str(bad), "--types", "coref", "--out", str(tmp_path / "f.jsonl")])
    assert code == 2
    err = capsys.readouterr().err
    assert "discrel.corpus" in err and "line 2" in err


def test_missing_file_is_reported(tmp_path, capsys):
    code = main(["extract", "--train", str(tmp_path / "nope.jsonl"), "--out", str(tmp_path / "f.jsonl")])
    assert code == 1
    assert "nope.jsonl" in capsys.readouterr().err


def test_rerun_from_manifest_is_byte_identical(pipeline_run, tmp_path):
    again = tmp_path / "again"
    assert main(["pipeline", "--config", str(pipeline_run / "manifest.json"), "--out", str(again)]) == 0
    for rel in json.loads((pipeline_run / "manifest.json").read_text())["outputs"]:
        assert (again / rel).read_bytes() == (pipeline_run / rel).read_bytes(), rel
    assert (again / "manifest.json").read_bytes() == (pipeline_run / "manifest.json").read_bytes()
