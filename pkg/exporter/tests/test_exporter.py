"""Export pipeline: network taps, patch cropping, box parsing, FMAP writing."""

import os

import numpy as np
import pytest

from fmap_exporter.export import (
    ExportSpec,
    MissingFlowImageError,
    export_motion_features,
    export_rgb_features,
)
from fmap_exporter.fmapio import write_fmap
from fmap_exporter.flow import compute_flow_images
from fmap_exporter.nets import KIND_TABLE, FeatureNet, MissingWeightsError
from fmap_exporter.patches import crop_patch, read_boxes

from exutil import make_sequence

# the primary consumer; its loader defines the on-disk contract
from fusetrack.features import load_fmap, read_fmap_header


def _spec(seq, boxes, out, kind, **kw):
    kw.setdefault("weights", "untrained:3")
    kw.setdefault("canonical_side", 64)
    return ExportSpec(sequence_dir=seq, kind=kind, boxes_path=boxes,
                      out_path=out, **kw)


# ---------------------------------------------------------------- networks

def test_kind_table_entries():
    assert KIND_TABLE["rgb_shallow"][:2] == (128, 2)
    assert KIND_TABLE["rgb_deep"][:2] == (512, 16)
    assert KIND_TABLE["motion_deep"][:2] == (384, 16)


def test_unknown_kind_rejected():
    with pytest.raises(ValueError):
        FeatureNet("rgb_mid", "untrained:0")
    with pytest.raises(ValueError):
        ExportSpec("s", "rgb_mid", "b", "o")


def test_bad_standin_spec_rejected():
    with pytest.raises(ValueError):
        FeatureNet("rgb_deep", "untrained:not_a_seed")


def test_missing_weights_file():
    with pytest.raises(MissingWeightsError):
        FeatureNet("rgb_deep", "/no/such/weights.pt")


def test_net_output_shapes_and_sign():
    rng = np.random.default_rng(0)
    patch = rng.integers(0, 256, size=(64, 64, 3)).astype(np.uint8)
    for kind, (d, stride, _, _) in KIND_TABLE.items():
        out = FeatureNet(kind, "untrained:1")(patch)
        assert out.shape == (d, 64 // stride, 64 // stride)
        assert out.dtype == np.float32
        assert out.min() >= 0.0


def test_seeded_standin_is_deterministic():
    rng = np.random.default_rng(5)
    patch = rng.integers(0, 256, size=(64, 64, 3)).astype(np.uint8)
    a = FeatureNet("rgb_shallow", "untrained:11")(patch)
    b = FeatureNet("rgb_shallow", "untrained:11")(patch)
    c = FeatureNet("rgb_shallow", "untrained:12")(patch)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


# ------------------------------------------------------------------ patches

def test_crop_patch_identity():
    rng = np.random.default_rng(2)
    frame = rng.integers(0, 256, size=(40, 40, 3)).astype(np.uint8)
    # region == frame, no resampling: centers of both grids coincide
    out = crop_patch(frame, (20.0, 20.0), 40.0, 40)
    assert np.array_equal(out, frame)


def test_crop_patch_replicates_border():
    frame = np.full((10, 10, 3), 77, np.uint8)
    out = crop_patch(frame, (-30.0, -30.0), 8.0, 8)
    assert np.all(out == 77)


def test_crop_patch_validation():
    frame = np.zeros((10, 10, 3), np.uint8)
    with pytest.raises(ValueError):
        crop_patch(frame, (5, 5), -1.0, 8)
    with pytest.raises(ValueError):
        crop_patch(np.zeros((0, 0, 3), np.uint8), (0, 0), 4.0, 4)


def test_read_boxes_formats(tmp_path):
    p = tmp_path / "b.txt"
    p.write_text("1,2,3,4\n5\t6\t7\t8\n9 10 11 12\n\n")
    assert read_boxes(str(p)) == [(1, 2, 3, 4), (5, 6, 7, 8), (9, 10, 11, 12)]
    assert read_boxes(str(p), one_based=True)[0] == (0, 1, 3, 4)


def test_read_boxes_bad_line_reports_lineno(tmp_path):
    p = tmp_path / "b.txt"
    p.write_text("1,2,3,4\n1,2,3\n")
    with pytest.raises(ValueError, match=":2"):
        read_boxes(str(p))


# ------------------------------------------------------------------- export

def test_export_roundtrips_through_primary_loader(tmp_path):
    seq, boxes = make_sequence(str(tmp_path), n_frames=3)
    out = os.path.join(seq, "feat.fmap")
    stack = export_rgb_features(_spec(seq, boxes, out, "rgb_deep"))
    header = read_fmap_header(out)
    assert (header.frame_count, header.channels, header.stride) == (3, 512, 16)
    for k in range(3):
        fm = load_fmap(out, k)
        assert fm.values.dtype == np.float32
        assert np.array_equal(fm.values, stack[k])   # bit-exact
    assert stack.min() >= 0.0


def test_export_boxes_count_mismatch(tmp_path):
    seq, boxes = make_sequence(str(tmp_path), n_frames=3)
    with open(boxes, "a", encoding="utf-8") as fh:
        fh.write("1,1,5,5\n")
    with pytest.raises(ValueError, match="boxes"):
        export_rgb_features(_spec(seq, boxes, os.path.join(seq, "x.fmap"), "rgb_deep"))


def test_export_rejects_degenerate_box(tmp_path):
    seq, boxes = make_sequence(str(tmp_path), n_frames=2)
    with open(boxes, "w", encoding="utf-8") as fh:
        fh.write("10,10,0,5\n10,10,5,5\n")
    with pytest.raises(ValueError, match="box"):
        export_rgb_features(_spec(seq, boxes, os.path.join(seq, "x.fmap"), "rgb_deep"))


def test_export_kind_routing(tmp_path):
    seq, boxes = make_sequence(str(tmp_path), n_frames=2)
    out = os.path.join(seq, "x.fmap")
    with pytest.raises(ValueError, match="motion"):
        export_rgb_features(_spec(seq, boxes, out, "motion_deep"))
    with pytest.raises(ValueError, match="not a motion"):
        export_motion_features(_spec(seq, boxes, out, "rgb_deep"), seq)


def test_motion_export_missing_image_reports_frame(tmp_path):
    seq, boxes = make_sequence(str(tmp_path), n_frames=3)
    flow_dir = os.path.join(seq, "motion")
    compute_flow_images(seq, flow_dir, iters=8)
    os.remove(os.path.join(flow_dir, "0002.png"))
    spec = _spec(seq, boxes, os.path.join(seq, "m.fmap"), "motion_deep")
    with pytest.raises(MissingFlowImageError, match="frame 1"):
        export_motion_features(spec, flow_dir)


def test_motion_export_roundtrip(tmp_path):
    seq, boxes = make_sequence(str(tmp_path), n_frames=2)
    flow_dir = os.path.join(seq, "motion")
    compute_flow_images(seq, flow_dir, iters=8)
    out = os.path.join(seq, "m.fmap")
    stack = export_motion_features(_spec(seq, boxes, out, "motion_deep"), flow_dir)
    header = read_fmap_header(out)
    assert (header.channels, header.stride) == (384, 16)
    assert np.array_equal(load_fmap(out, 1).values, stack[1])
    assert stack.min() >= 0.0


# ------------------------------------------------------------------- writer

def test_write_fmap_validates():
    with pytest.raises(ValueError):
        write_fmap("/tmp/never.fmap", np.zeros((2, 3, 4), np.float32), 1)
    with pytest.raises(ValueError):
        write_fmap("/tmp/never.fmap", np.zeros((1, 1, 2, 2), np.float32), 0)
    bad = np.zeros((1, 1, 2, 2), np.float32)
    bad[0, 0, 0, 0] = np.nan
    with pytest.raises(ValueError):
        write_fmap("/tmp/never.fmap", bad, 1)


def test_write_fmap_header_layout(tmp_path):
    rng = np.random.default_rng(9)
    data = rng.standard_normal((2, 3, 4, 5)).astype(np.float32)
    path = str(tmp_path / "w.fmap")
    write_fmap(path, data, 7)
    with open(path, "rb") as fh:
        raw = fh.read()
    assert raw[:4] == b"FMAP"
    assert np.array_equal(
        np.frombuffer(raw[4:28], "<u4"), [1, 2, 3, 4, 5, 7]
    )
    assert np.array_equal(
        np.frombuffer(raw[28:], "<f4").reshape(2, 3, 4, 5), data
    )
