import json
import math
import os
from pathlib import Path

import pytest

import lpbf

SOURCE_DIR = Path(os.environ.get("LPBF_SOURCE_DIR", Path(__file__).resolve().parents[2]))


def test_criteria_boundaries():
    r = lpbf.keyhole_criterion(lpbf.MeltPoolDims(150, 100))
    assert r.value == lpbf.Verdict.Defect
    assert r.ratio == 1.5
    p = lpbf.ProcessParameters("Ti-6Al-4V", 200, 500, hatch_spacing=80, layer_height=40)
    assert lpbf.lof_criterion(p, lpbf.MeltPoolDims(100, 50)).ratio == pytest.approx(1.28)
    assert lpbf.balling_criterion(lpbf.MeltPoolDims(100, 50)).value == lpbf.Verdict.Unknown
    labels = lpbf.classify(p, lpbf.MeltPoolDims(200, 100, 300))
    assert labels.to_list() == [False, False, False, True]


def test_reject_policy_raises_with_code():
    cfg = lpbf.CriteriaConfig()
    cfg.unknown_policy = lpbf.UnknownPolicy.Reject
    p = lpbf.ProcessParameters("SS316L", 100, 100, hatch_spacing=0, layer_height=0)
    with pytest.raises(lpbf.LpbfError) as err:
        lpbf.classify(p, lpbf.MeltPoolDims(200, 100), cfg)
    assert err.value.args[0] == "IndeterminateCriterion"


def test_units_and_materials():
    assert lpbf.normalize_quantity(1.09, "m/s", "mm/s") == 1090.0
    assert lpbf.normalize_quantity(0.2, "kW", "W") == 200.0
    with pytest.raises(lpbf.LpbfError):
        lpbf.normalize_quantity(1.0, "W", "um")
    assert lpbf.canonicalize_material("stainless steel 316l") == "SS316L"
    assert lpbf.format_number(-0.0) == "0"


def test_baseline_and_prompt_round_trip():
    rec = lpbf.Record()
    rec.id = "x:1"
    rec.params = lpbf.ProcessParameters("Ti-6Al-4V", 200, 500, 100, 80, 40)
    rec.labels = lpbf.DefectLabels(True, False, False)
    rec.split = lpbf.Split.Validation
    ex = lpbf.render_baseline(rec)
    assert ex.text == "Ti-6Al-4V [SEP] 200 W [SEP] 500 mm/s [SEP] 100 um [SEP] 80 um [SEP] 40 um"
    assert lpbf.parse_baseline(ex.text).params == rec.params
    line = json.loads(ex.to_json_line())
    assert line["labels"] == [1, 0, 0, 0]

    prompts = lpbf.render_prompts(rec, lpbf.builtin_templates())
    assert len(prompts) == 10
    assert all(p.split == lpbf.Split.Validation for p in prompts)

    parsed = lpbf.parse_prompt("Using 0.2 kW on SS316L")
    assert parsed.params.power == 200.0
    assert parsed.confidence["power"] == "Exact"
    assert lpbf.parse_prompt("hello world").all_missing()


def test_predict_and_evaluate():
    train = []
    for i, power in enumerate([100.0, 200.0, 300.0]):
        r = lpbf.Record()
        r.id = f"t:{i}"
        r.params = lpbf.ProcessParameters("SS316L", power, 800)
        r.labels = lpbf.DefectLabels(power > 250, False, False)
        r.split = lpbf.Split.Train
        train.append(r)
    index = lpbf.build_index(train)
    assert index.size == 3
    assert index.mean[0] == pytest.approx(200.0)
    exact = lpbf.predict(lpbf.ProcessParameters("SS316L", 300, 800), index, 1)
    assert exact.method == "ExactMatch"
    assert exact.labels.keyhole
    knn = lpbf.predict(lpbf.ProcessParameters("SS316L", 290, 800), index, 1)
    assert knn.method == "Knn"
    assert knn.neighbors[0][0] == "t:2"
    with pytest.raises(lpbf.LpbfError):
        lpbf.predict(lpbf.ProcessParameters("SS316L", 290, 800), index, 2)

    restored = lpbf.TrainIndex.from_json(index.to_json())
    assert restored.to_json() == index.to_json()

    report = lpbf.evaluate([exact.labels, knn.labels], [exact.labels, lpbf.DefectLabels()])
    assert report.subset_accuracy == 0.5
    assert report.hamming_loss == 0.25


def test_pca():
    rows = [[1.0, 2.0, 0.0], [2.0, 1.0, 1.0], [3.0, 3.0, 5.0], [0.0, 1.0, 2.0]]
    proj = lpbf.pca_project(rows, [lpbf.DefectLabels()] * 4)
    c0, c1 = proj.components
    assert abs(sum(a * b for a, b in zip(c0, c1))) < 1e-9
    assert math.isclose(sum(a * a for a in c0), 1.0, abs_tol=1e-9)
    assert proj.explained_variance[0] >= proj.explained_variance[1] >= 0
    assert len(proj.points) == 4


def test_run_pipeline(tmp_path):
    written = lpbf.run_pipeline(str(SOURCE_DIR / "tests" / "fixtures" / "pipeline.json"), out=str(tmp_path))
    names = {Path(p).name for p in written}
    assert {"ingest.records.jsonl", "baseline.train.jsonl", "eval.report.json", "pca.csv"} <= names
    report = json.loads((tmp_path / "eval.report.json").read_text())
    assert 0.0 <= report["subset_accuracy"] <= 1.0
