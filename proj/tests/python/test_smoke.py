import csv
import json
import os
import pathlib
import tempfile

import pytest

import annoreg

SQUARE = json.dumps({
    "type": "FeatureCollection",
    "features": [{
        "type": "Feature",
        "geometry": {"type": "Polygon", "coordinates": [[[0, 0], [10, 0], [10, 10], [0, 10], [0, 0]]]},
        "properties": {"classification": {"name": "Invasive cancer"}},
    }],
})


@pytest.fixture
def workdir():
    root = os.environ.get("ANNOREG_TEST_TMP")
    if root:
        pathlib.Path(root).mkdir(parents=True, exist_ok=True)
    return pathlib.Path(tempfile.mkdtemp(dir=root))


def test_rasterize_square():
    doc = annoreg.canonical_annotations(SQUARE, "s")
    m = annoreg.rasterize_class(doc, "IC", 1.0, 10, 10)
    assert m.count() == 100
    assert annoreg.rasterize_class(doc, "DCIS", 1.0, 10, 10).count() == 0
    assert m[(0, 0)] and m[(9, 9)]
    with pytest.raises(IndexError):
        m[(10, 0)]


def test_geometry_helpers():
    ring = [(0, 0), (4, 0), (4, 4), (0, 4)]
    assert annoreg.polygon_area(ring) == 16.0
    assert annoreg.point_in_polygon(1, 1, ring)
    assert not annoreg.point_in_polygon(5, 1, ring)


def test_field_and_warp():
    f = annoreg.DeformationField.constant(8, 8, 2.0, 5.0, -3.0)
    assert f.displace(10, 10) == (20.0, 4.0)
    assert annoreg.DeformationField.from_bytes(f.to_bytes()) == f
    zero = annoreg.DeformationField.zeros(4, 4, 10.0)
    canon = annoreg.canonical_annotations(SQUARE, "he")
    assert annoreg.warp_annotations(canon, zero, "he") == canon
    with pytest.raises(annoreg.ParseError):
        annoreg.DeformationField.from_bytes(b"WDF1")


def test_masks_and_morphology():
    m = annoreg.BinaryMask(6, 6, 1.0)
    m[(1, 1)] = True
    m[(2, 2)] = True
    m[(5, 5)] = True
    assert annoreg.component_areas(m) == [2, 1]
    assert annoreg.remove_small_components(m, 2).count() == 2
    assert annoreg.BinaryMask.from_png(m.to_png(), 1.0) == m
    assert annoreg.mask_dice(m, m) == 1.0


def test_metrics_and_stats():
    assert annoreg.auroc([0, 0, 1, 1], [0.4, 0.6, 0.5, 0.9]) == 0.75
    assert annoreg.auroc([1, 1], [0.1, 0.2]) is None
    y = annoreg.youden_threshold([0, 0, 1, 1], [0.1, 0.2, 0.6, 0.8])
    assert y["j"] == 1.0 and abs(y["threshold"] - 0.4) < 1e-12
    c = annoreg.confusion_metrics(tp=2, fp=1, tn=3, fn=2)
    assert c["accuracy"] == 5 / 8 and c["sensitivity"] == 0.5
    assert annoreg.wilcoxon_signed_rank([1, 2, 3], [0, 0, 0])["p_value"] == 0.25
    with pytest.raises(annoreg.UndefinedError):
        annoreg.wilcoxon_signed_rank([1, 2], [1, 2])
    assert annoreg.bh_adjust([0.01, 0.02, 0.03, 0.04]) == pytest.approx([0.04] * 4)
    assert annoreg.spearman([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)
    assert annoreg.bootstrap_mean_ci([0.5] * 20, 200) == (0.5, 0.5, 0.5)


def test_split_determinism():
    rows = "case_id,ki67_score\n" + "".join(f"c{i},{i % 13}\n" for i in range(30))
    a = annoreg.stratified_split(rows, 3, test_count=6, n_folds=3)
    assert a == annoreg.stratified_split(rows, 3, test_count=6, n_folds=3)
    assert a.count("\n") == 31


def test_synth_case_band():
    c = annoreg.synth_case(seed=2)
    assert 0.80 <= c["achieved_dice"] <= 0.86
    same = annoreg.synth_case(seed=2)
    assert same["ihc_annotations"] == c["ihc_annotations"]


def test_commands_end_to_end(workdir):
    spec = workdir / "cohort.json"
    spec.write_text(json.dumps({"n_cases": 2, "seed": 5, "slide_extent_um": [3000, 2500], "n_regions": 3}))
    assert annoreg.synth(spec, workdir / "cohort", jobs=1) == 0
    assert annoreg.pipeline(workdir / "cohort" / "cases.csv", workdir / "run", jobs=1) == 0

    manifest = workdir / "run" / "manifest.csv"
    with open(manifest, newline="") as fh:
        tiles = list(csv.DictReader(fh))
    pred = workdir / "pred.csv"
    with open(pred, "w", newline="") as fh:
        fh.write("slide_id,tile_x,tile_y,score_1\n")
        for t in tiles:
            fh.write(f"{t['slide_id']},{t['tile_x']},{t['tile_y']},{t['label_ihc']}\n")
    assert annoreg.evaluate(manifest, pred, threshold=0.5, out=workdir / "eval", set=["n_boot=100"]) == 0
    with open(workdir / "eval" / "slide_metrics.csv", newline="") as fh:
        for row in csv.DictReader(fh):
            assert float(row["auroc"]) == 1.0
            assert float(row["accuracy"]) == 1.0

    assert annoreg.compare(workdir / "eval" / "slide_metrics.csv", workdir / "eval" / "slide_metrics.csv",
                           workdir / "cmp.csv") == 0
    with pytest.raises(ValueError):
        annoreg.warp(workdir / "cohort" / "case0" / "he.geojson", workdir / "missing.wdf", "", workdir / "w.geojson")
    assert annoreg.warp(workdir / "cohort" / "case0" / "he.geojson", workdir / "missing.wdf", "",
                        workdir / "w.geojson", check=False) == 2
