import json

import numpy as np
import pytest

import fieldseg


def square_map(size=32, top=8, left=8, side=10):
    m = np.zeros((size, size), dtype=np.uint32)
    m[top:top + side, left:left + side] = 1
    return m


def test_probability_raster_roundtrip(tmp_path):
    prob = np.linspace(0, 1, 64, dtype=np.float32).reshape(8, 8)
    path = tmp_path / "p.fbt"
    fieldseg.write_raster(path, prob)
    kind, back = fieldseg.read_tile(path)
    assert kind == "raster"
    assert back.dtype == np.float32
    np.testing.assert_array_equal(back, prob)


def test_tile_and_mask_roundtrip(tmp_path):
    tile = np.random.default_rng(0).random((16, 16, 3, 3), dtype=np.float32)
    fieldseg.write_tile(tmp_path / "t.fbt", tile)
    kind, back = fieldseg.read_tile(tmp_path / "t.fbt")
    assert kind == "tile"
    np.testing.assert_array_equal(back, tile)

    mask = (tile[..., 0, 0] > 0.5).astype(np.uint8)
    fieldseg.write_mask(tmp_path / "m.fbt", mask)
    kind, back = fieldseg.read_tile(tmp_path / "m.fbt")
    assert kind == "binary-mask"
    np.testing.assert_array_equal(back, mask)


def test_bad_file_raises(tmp_path):
    path = tmp_path / "junk.fbt"
    path.write_bytes(b"nope")
    with pytest.raises(fieldseg.FieldsegError):
        fieldseg.read_tile(path)


def test_square_masks_and_polygon_roundtrip():
    inst = square_map()
    assert fieldseg.interior_of(inst).sum() == 64
    assert fieldseg.border_of(inst).sum() == 36
    gj = json.loads(fieldseg.polygonize(inst))
    assert len(gj["features"]) == 1
    np.testing.assert_array_equal(fieldseg.rasterize(json.dumps(gj), 32, 32), inst)


def test_shifted_square_iou():
    gt = square_map()
    pred = square_map(left=11)
    r = fieldseg.match_instances(pred, gt, iou_threshold=0.3)
    assert r["tp"] == 1
    assert r["matches"][0][2] == pytest.approx(70 / 130)
    r = fieldseg.match_instances(pred, gt)
    assert (r["tp"], r["fp"], r["fn"]) == (0, 1, 1)


def test_pixel_metrics():
    pred = np.array([[1, 1, 0, 0]], dtype=np.uint8)
    gt = np.array([[1, 0, 1, 0]], dtype=np.uint8)
    nolabel = np.array([[1, 1, 1, 0]], dtype=np.uint8)
    c = fieldseg.pixel_confusion(pred, gt, nolabel)
    assert c == {"tp": 1, "fp": 1, "fn": 1, "tn": 0}
    assert fieldseg.f1(c) == pytest.approx(0.5)
    assert fieldseg.miou([c]) == pytest.approx(1 / 3)


def test_scene_degrade_and_delineate():
    scene = fieldseg.generate_scene(seed=5, size=96, n_fields=4, noise=0.0)
    inst = scene["instances"]
    assert scene["tile"].shape == (96, 96, 3, 3)
    assert set(np.unique(inst)) == {0, 1, 2, 3, 4}
    degraded, dropped, kept = fieldseg.degrade(inst, 0.5, 0, seed=1)
    assert len(dropped) == 2 and len(kept) == 2
    r = fieldseg.match_instances(degraded, inst)
    assert (r["tp"], r["fp"], r["fn"]) == (2, 0, 2)

    border, instances = fieldseg.delineate(scene["tile"])
    assert border.shape == (96, 96)
    assert instances.max() >= 1


def test_split_counts():
    assert fieldseg.split_counts(5000) == (4000, 500, 500)


def test_evaluate_perfect_predictions(tmp_path):
    entries = []
    (tmp_path / "pred").mkdir()
    for i in range(3):
        scene = fieldseg.generate_scene(seed=i, size=64, n_fields=3, field_min=8, field_max=16)
        stem = f"s{i}"
        fieldseg.write_tile(tmp_path / f"{stem}.tile.fbt", scene["tile"])
        for name in ("border", "interior"):
            fieldseg.write_mask(tmp_path / f"{stem}.{name}.fbt", scene[name])
            fieldseg.write_raster(tmp_path / "pred" / f"{stem}.{name}.fbt", scene[name].astype(np.float32))
        fieldseg.write_nolabel(tmp_path / f"{stem}.nolabel.fbt", scene["nolabel"])
        entries.append({"id": stem, "region": "synthetic", "split": "test", "tile": f"{stem}.tile.fbt",
                        "border": f"{stem}.border.fbt", "interior": f"{stem}.interior.fbt",
                        "nolabel": f"{stem}.nolabel.fbt", "instances": ""})
    header = {"format": "fieldseg-manifest", "version": 1, "split_seed": None}
    lines = [json.dumps(header)] + [json.dumps(e) for e in entries]
    (tmp_path / "manifest.jsonl").write_text("\n".join(lines) + "\n")

    report = fieldseg.evaluate(tmp_path / "manifest.jsonl", tmp_path / "pred")
    for head in ("border", "interior"):
        h = report["heads"][head]
        assert (h["f1"], h["accuracy"], h["miou"], h["p_at_iou"]) == (1.0, 1.0, 1.0, 1.0)
