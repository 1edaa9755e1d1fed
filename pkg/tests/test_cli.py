import json
import os

import numpy as np
import pytest

from costlens.cli import run
from costlens.costspace import save_matrix, altruistic_matrix
from costlens.decision import decide, decide_bayes
from costlens.fields import load_mask, load_probability_field
from costlens import expand_aggregate_matrix, builtin_cityscapes_catalog


@pytest.fixture(scope="module")
def cli_dataset(tmp_path_factory):
    directory = tmp_path_factory.mktemp("cli_ds")
    assert run(["gen", "--seed", "9", "--count", "3", "--size", "48x64",
                "--noise", "0.3", "--out", str(directory / "ds")]) == 0
    return directory / "ds"


def _first_scene(dataset):
    manifest = json.loads((dataset / "manifest.json").read_text())
    return manifest["scenes"][0]


def test_version_and_help(capsys):
    assert run(["--version"]) == 0
    assert "costlens" in capsys.readouterr().out
    for cmd in ("decide", "metrics", "priors", "roi", "sweep", "gen",
                "compare", "serve"):
        assert run([cmd, "--help"]) == 0
        out = capsys.readouterr().out
        assert "usage: costlens " + cmd in out


def test_unknown_flag_is_usage_error(tmp_path):
    assert run(["decide", "--bogus"]) == 1


def test_decide_builtin_matches_library(cli_dataset, tmp_path):
    scene = _first_scene(cli_dataset)
    out = tmp_path / "mask.png"
    assert run(["decide", "--probs", str(cli_dataset / scene["probs"]),
                "--cost", "robotistic", "--out", str(out)]) == 0
    cat = builtin_cityscapes_catalog()
    field = load_probability_field(cli_dataset / scene["probs"])
    expect = decide(field, expand_aggregate_matrix(
        __import__("costlens").robotistic_matrix(), cat))
    assert np.array_equal(load_mask(out, 19).values, expect.values)


def test_decide_bary_vertex_equals_builtin(cli_dataset, tmp_path):
    scene = _first_scene(cli_dataset)
    a, b = tmp_path / "a.png", tmp_path / "b.png"
    probs = str(cli_dataset / scene["probs"])
    assert run(["decide", "--probs", probs, "--cost", "robotistic",
                "--out", str(a)]) == 0
    assert run(["decide", "--probs", probs, "--bary", "1,0,0",
                "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_decide_conflicting_cost_sources(cli_dataset, tmp_path):
    scene = _first_scene(cli_dataset)
    code = run(["decide", "--probs", str(cli_dataset / scene["probs"]),
                "--cost", "robotistic", "--bary", "0.5,0.5,0",
                "--out", str(tmp_path / "x.png")])
    assert code == 2


def test_decide_rule_bayes(cli_dataset, tmp_path):
    scene = _first_scene(cli_dataset)
    out = tmp_path / "bayes.png"
    assert run(["decide", "--probs", str(cli_dataset / scene["probs"]),
                "--rule", "bayes", "--out", str(out)]) == 0
    field = load_probability_field(cli_dataset / scene["probs"])
    assert np.array_equal(load_mask(out, 19).values, decide_bayes(field).values)


def test_decide_rule_ml(cli_dataset, tmp_path):
    import costlens

    scene = _first_scene(cli_dataset)
    priors_path = tmp_path / "priors.json"
    raw = np.linspace(1, 19, 19)
    values = (raw / raw.sum()).tolist()
    priors_path.write_text(json.dumps({"values": values}))
    out = tmp_path / "ml.png"
    assert run(["decide", "--probs", str(cli_dataset / scene["probs"]),
                "--rule", "ml", "--priors", str(priors_path),
                "--out", str(out)]) == 0
    field = load_probability_field(cli_dataset / scene["probs"])
    expect = costlens.decide_ml(field, costlens.PriorVector(np.asarray(values)))
    assert np.array_equal(load_mask(out, 19).values, expect.values)
    # ml without --priors is a validation error
    assert run(["decide", "--probs", str(cli_dataset / scene["probs"]),
                "--rule", "ml", "--out", str(tmp_path / "x.png")]) == 2


def test_decide_aggregate_matrix_file(cli_dataset, tmp_path):
    scene = _first_scene(cli_dataset)
    matrix_path = tmp_path / "alt.json"
    save_matrix(altruistic_matrix(), matrix_path)
    a, b = tmp_path / "file.png", tmp_path / "name.png"
    probs = str(cli_dataset / scene["probs"])
    assert run(["decide", "--probs", probs, "--cost", str(matrix_path),
                "--out", str(a)]) == 0
    assert run(["decide", "--probs", probs, "--cost", "altruistic",
                "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_decide_missing_input_is_io_error(tmp_path):
    assert run(["decide", "--probs", str(tmp_path / "absent.spf"),
                "--cost", "robotistic", "--out", str(tmp_path / "m.png")]) == 3


def test_metrics_report_schema(cli_dataset, tmp_path):
    scene = _first_scene(cli_dataset)
    mask = tmp_path / "m.png"
    out = tmp_path / "report.json"
    assert run(["decide", "--probs", str(cli_dataset / scene["probs"]),
                "--cost", "egoistic", "--out", str(mask)]) == 0
    assert run(["metrics", "--pred", str(mask),
                "--gt", str(cli_dataset / scene["labels"]),
                "--classes", "person,building", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert set(doc) == {"person", "building", "_meta"}
    entry = doc["person"]["full"]
    assert {"precision", "recall", "tp", "fp", "fn",
            "fp_segments", "fn_segments"} <= set(entry)


def test_priors_roi_and_metrics_with_roi(cli_dataset, tmp_path):
    labels_dir = tmp_path / "labels"
    labels_dir.mkdir()
    manifest = json.loads((cli_dataset / "manifest.json").read_text())
    for entry in manifest["scenes"]:
        data = (cli_dataset / entry["labels"]).read_bytes()
        (labels_dir / entry["labels"]).write_bytes(data)
    priors_path = tmp_path / "priors.spf"
    roi_path = tmp_path / "roi.png"
    assert run(["priors", "--labels", str(labels_dir), "--out", str(priors_path)]) == 0
    assert run(["roi", "--priors", str(priors_path), "--out", str(roi_path)]) == 0
    from costlens.geography import load_roi_map

    roi = load_roi_map(roi_path)
    assert set(np.unique(roi.ids)) <= {1, 2, 3, 4}

    scene = _first_scene(cli_dataset)
    mask = tmp_path / "m.png"
    out = tmp_path / "roi_report.json"
    assert run(["decide", "--probs", str(cli_dataset / scene["probs"]),
                "--cost", "robotistic", "--out", str(mask)]) == 0
    assert run(["metrics", "--pred", str(mask),
                "--gt", str(cli_dataset / scene["labels"]),
                "--roi", str(roi_path), "--roi-id", "1",
                "--classes", "person", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert set(doc["person"]) == {"1"}


def test_sweep_writes_csv_and_heatmap(cli_dataset, tmp_path):
    out = tmp_path / "surface.csv"
    heat = tmp_path / "heat.ppm"
    assert run(["sweep", "--dataset", str(cli_dataset), "--metric", "recall",
                "--class", "person", "--step", "1/2", "--out", str(out),
                "--render", str(heat), "--render-size", "64x64"]) == 0
    rows = out.read_text().strip().splitlines()
    assert rows[0] == "alpha,beta,gamma,value"
    assert len(rows) == 1 + 6    # n=2 -> 6 grid points
    assert heat.read_bytes()[:2] == b"P6"


def test_gen_deterministic_across_runs_and_threads(tmp_path):
    env = os.environ.copy()
    try:
        os.environ["COSTLENS_THREADS"] = "1"
        assert run(["gen", "--seed", "3", "--count", "2", "--size", "32x48",
                    "--noise", "0.3", "--out", str(tmp_path / "a")]) == 0
        os.environ["COSTLENS_THREADS"] = "4"
        assert run(["gen", "--seed", "3", "--count", "2", "--size", "32x48",
                    "--noise", "0.3", "--out", str(tmp_path / "b")]) == 0
    finally:
        os.environ.clear()
        os.environ.update(env)
    for name in sorted(p.name for p in (tmp_path / "a").iterdir()):
        assert (tmp_path / "a" / name).read_bytes() == \
            (tmp_path / "b" / name).read_bytes(), name


def test_compare_emits_every_row(cli_dataset, tmp_path):
    out = tmp_path / "rows.csv"
    assert run(["compare", "--dataset", str(cli_dataset),
                "--classes", "person,building", "--rois", "1,2",
                "--out", str(out)]) == 0
    rows = out.read_text().strip().splitlines()
    assert rows[0] == "cost_matrix,class,roi,precision,recall"
    assert len(rows) == 1 + 12   # 3 matrices x 2 classes x 2 RoIs
    matrices = {r.split(",")[0] for r in rows[1:]}
    assert matrices == {"altruistic", "robotistic", "egoistic"}


def test_no_partial_output_on_failure(cli_dataset, tmp_path):
    corrupt = tmp_path / "corrupt.spf"
    corrupt.write_bytes(b"SPF1" + b"\x01\x00\x00\x00" * 3 + b"bad")
    out = tmp_path / "never.png"
    assert run(["decide", "--probs", str(corrupt), "--cost", "robotistic",
                "--out", str(out)]) == 2
    assert not out.exists()
