import numpy as np
import pytest

from fusetrack.features import (
    BadMagicError,
    FmapError,
    FrameIndexError,
    TruncatedFileError,
    UnsupportedVersionError,
    apply_window,
    extract_cn,
    extract_gray,
    extract_hog,
    flow_energy,
    flow_to_motion_image,
    horn_schunck_flow,
    load_cn_table,
    load_fmap,
    read_fmap_header,
    sample_patch,
    write_fmap,
)
from fusetrack.features.cn import CN_NAMES
from fusetrack.features.flow import FlowField


def _rand_image(rng, h, w, channels=3):
    shape = (h, w, channels) if channels else (h, w)
    return rng.integers(0, 256, size=shape, dtype=np.uint8)


# ---------------------------------------------------------------- sample_patch

def test_sample_patch_inbounds_no_resize_is_slicing():
    rng = np.random.default_rng(30)
    frame = _rand_image(rng, 40, 50)
    # window [20, 31) x [15, 26) lands on whole pixels
    out = sample_patch(frame, center=(25.5, 20.5), region_side=11, canonical_side=11)
    assert np.array_equal(out, frame[15:26, 20:31])


def test_sample_patch_corner_replicates_border():
    rng = np.random.default_rng(31)
    frame = _rand_image(rng, 20, 20)
    out = sample_patch(frame, center=(0.5, 0.5), region_side=9, canonical_side=9)
    # everything above/left of the frame replicates pixel row/col 0
    assert np.array_equal(out[0, 0], frame[0, 0])
    assert np.array_equal(out[:4, 4], np.repeat(frame[0, 0][None], 4, axis=0))
    assert np.array_equal(out[4:, 4:], frame[:5, :5])


def test_sample_patch_resize_round_trip_close():
    # smooth gradient image: upsample then downsample stays within 2 levels
    ii, jj = np.indices((32, 32))
    frame = ((ii * 3 + jj * 4) % 256).astype(np.uint8)[:, :, None].repeat(3, axis=2)
    crop = sample_patch(frame, (16, 16), 16, 16)
    up = sample_patch(frame, (16, 16), 16, 32)
    down = sample_patch(up, (16, 16), 32, 16)
    assert np.max(np.abs(down.astype(int) - crop.astype(int))) < 2


def test_sample_patch_empty_frame():
    with pytest.raises(ValueError):
        sample_patch(np.zeros((0, 0, 3), dtype=np.uint8), (0, 0), 5, 5)


# ----------------------------------------------------------------- extract_hog

def test_hog_constant_patch_is_zero():
    out = extract_hog(np.full((16, 16, 3), 77, dtype=np.uint8), cell=4)
    assert out.values.shape == (31, 4, 4)
    assert out.stride == 4
    assert np.max(np.abs(out.values)) == 0


def test_hog_vertical_edge_concentrates_horizontal_gradient():
    patch = np.zeros((16, 16))
    patch[:, 8:] = 255.0
    out = extract_hog(patch, cell=4)
    insensitive = out.values[18:27]
    energy = (insensitive**2).sum(axis=(1, 2))
    assert energy.argmax() == 0
    assert energy[1:].max() <= 1e-20


def test_hog_intensity_scale_near_invariant():
    rng = np.random.default_rng(32)
    patch = rng.integers(0, 256, size=(24, 24, 3)).astype(np.float64)
    a = extract_hog(patch, cell=4).values
    b = extract_hog(patch * 1.7, cell=4).values
    assert np.max(np.abs(a - b)) < 1e-3


def test_hog_rejects_bad_cell():
    with pytest.raises(ValueError):
        extract_hog(np.zeros((10, 10)), cell=4)


def test_hog_shift_by_one_cell_shifts_interior():
    rng = np.random.default_rng(33)
    img = _rand_image(rng, 32, 48)
    a = extract_hog(img[:, 0:32], cell=4).values
    b = extract_hog(img[:, 4:36], cell=4).values
    # b's cell j sees a's cell j+1; descriptors depend on content up to two
    # cells away (votes reach the neighbor cell, norms one further), so stay
    # clear of the columns whose support leaves either patch
    assert np.allclose(b[:, :, 2:-3], a[:, :, 3:-2], atol=1e-10)


# ------------------------------------------------------------------ extract_cn

def test_cn_uniform_color_cell1_equals_table_row():
    table = load_cn_table()
    patch = np.zeros((4, 4, 3), dtype=np.uint8)
    patch[:] = (40, 200, 90)
    out = extract_cn(patch, table, cell=1)
    row = table.lookup(np.array([40, 200, 90], dtype=np.uint8))
    assert out.values.shape == (11, 4, 4)
    assert np.allclose(out.values, row.astype(np.float64)[:, None, None], atol=1e-12)


def test_cn_cell2_pools_mean_of_rows():
    table = load_cn_table()
    patch = np.zeros((2, 2, 3), dtype=np.uint8)
    patch[0, 0] = patch[1, 1] = (255, 0, 0)
    patch[0, 1] = patch[1, 0] = (0, 0, 255)
    out = extract_cn(patch, table, cell=2)
    red = table.lookup(np.array([255, 0, 0], dtype=np.uint8)).astype(np.float64)
    blue = table.lookup(np.array([0, 0, 255], dtype=np.uint8)).astype(np.float64)
    assert np.allclose(out.values[:, 0, 0], 0.5 * (red + blue), atol=1e-12)


def test_cn_pure_red_hits_red_column():
    table = load_cn_table()
    patch = np.zeros((4, 4, 3), dtype=np.uint8)
    patch[..., 0] = 255
    out = extract_cn(patch, table, cell=4)
    assert int(out.values[:, 0, 0].argmax()) == CN_NAMES.index("red")


def test_cn_missing_table():
    with pytest.raises(FileNotFoundError):
        load_cn_table("/nonexistent/cn.bin")


def test_cn_shift_by_one_cell_is_exact():
    rng = np.random.default_rng(34)
    table = load_cn_table()
    img = _rand_image(rng, 16, 32)
    a = extract_cn(img[:, 0:16], table, cell=4).values
    b = extract_cn(img[:, 4:20], table, cell=4).values
    assert np.allclose(b[:, :, :-1], a[:, :, 1:], atol=1e-12)


# ---------------------------------------------------------------- extract_gray

def test_gray_constant_midgray_is_zero():
    out = extract_gray(np.full((8, 8), 127.5), cell=4)
    assert np.allclose(out.values, 0.0, atol=1e-12)


def test_gray_cell1_matches_mapped_pixels():
    rng = np.random.default_rng(35)
    img = _rand_image(rng, 6, 6)
    out = extract_gray(img, cell=1)
    gray = img[..., 0] * 0.299 + img[..., 1] * 0.587 + img[..., 2] * 0.114
    assert np.allclose(out.values[0], gray / 255.0 - 0.5, atol=1e-12)


def test_gray_cell4_matches_pooling_oracle():
    rng = np.random.default_rng(36)
    img = rng.uniform(0, 255, size=(12, 12))
    out = extract_gray(img, cell=4)
    for i in range(3):
        for j in range(3):
            block = img[4 * i : 4 * i + 4, 4 * j : 4 * j + 4].mean()
            assert abs(out.values[0, i, j] - (block / 255.0 - 0.5)) <= 1e-12


# ---------------------------------------------------------------- apply_window

def test_window_zeroes_corners_and_matches_outer_product():
    from fusetrack.features import FeatureMap

    ones = FeatureMap(np.ones((1, 8, 6)), stride=4)
    out = apply_window(ones)
    expected = np.hanning(8)[:, None] * np.hanning(6)[None, :]
    assert np.allclose(out.values[0], expected, atol=1e-12)
    for r, c in [(0, 0), (0, -1), (-1, 0), (-1, -1)]:
        assert out.values[0, r, c] == 0


# ------------------------------------------------------------------------ flow

def test_flow_identical_frames_is_zero():
    rng = np.random.default_rng(37)
    img = rng.uniform(0, 1, size=(16, 16))
    f = horn_schunck_flow(img, img, smoothness=0.1, iters=20)
    assert np.max(np.abs(f.u)) == 0
    assert np.max(np.abs(f.v)) == 0


def test_flow_recovers_unit_translation():
    x = np.arange(48)
    y = np.arange(48)
    def render(shift):
        xx = (x[None, :] - shift)
        return 0.5 + 0.25 * np.sin(2 * np.pi * xx / 20) * np.cos(2 * np.pi * y[:, None] / 24)
    prev, cur = render(0.0), render(1.0)
    f = horn_schunck_flow(prev, cur, smoothness=0.05, iters=400)
    interior_u = f.u[6:-6, 6:-6]
    interior_v = f.v[6:-6, 6:-6]
    assert abs(interior_u.mean() - 1.0) < 0.25
    assert abs(interior_v.mean()) < 0.25


def _energy_loops(prev, cur, u, v, lam):
    avg = 0.5 * (prev + cur)
    h, w = avg.shape
    e = 0.0
    for i in range(h):
        for j in range(w):
            ix = 0.5 * (avg[i, min(j + 1, w - 1)] - avg[i, max(j - 1, 0)])
            iy = 0.5 * (avg[min(i + 1, h - 1), j] - avg[max(i - 1, 0), j])
            it = cur[i, j] - prev[i, j]
            e += (ix * u[i, j] + iy * v[i, j] + it) ** 2
    for i in range(h):
        for j in range(w - 1):
            e += lam * ((u[i, j] - u[i, j + 1]) ** 2 + (v[i, j] - v[i, j + 1]) ** 2)
    for i in range(h - 1):
        for j in range(w):
            e += lam * ((u[i, j] - u[i + 1, j]) ** 2 + (v[i, j] - v[i + 1, j]) ** 2)
    return e


def test_flow_energy_non_increasing():
    rng = np.random.default_rng(38)
    prev = rng.uniform(0, 1, size=(12, 14))
    cur = rng.uniform(0, 1, size=(12, 14))
    lam = 0.2
    zero = FlowField(np.zeros((12, 14)), np.zeros((12, 14)))
    energies = [flow_energy(prev, cur, zero, lam)]
    for iters in range(1, 9):
        f = horn_schunck_flow(prev, cur, smoothness=lam, iters=iters)
        e_fast = flow_energy(prev, cur, f, lam)
        e_loops = _energy_loops(prev, cur, f.u, f.v, lam)
        assert abs(e_fast - e_loops) <= 1e-9 * max(1.0, e_loops)
        energies.append(e_fast)
    for a, b in zip(energies, energies[1:]):
        assert b <= a + 1e-12


def test_flow_shape_mismatch():
    with pytest.raises(ValueError):
        horn_schunck_flow(np.zeros((4, 4)), np.zeros((4, 5)), 0.1, 1)


def test_motion_image_encoding():
    z = FlowField(np.zeros((2, 2)), np.zeros((2, 2)))
    assert np.array_equal(
        flow_to_motion_image(z, gain=16.0)[0, 0], np.array([128, 128, 0])
    )
    one = FlowField(np.ones((2, 2)), np.zeros((2, 2)))
    assert np.array_equal(
        flow_to_motion_image(one, gain=16.0)[0, 0], np.array([144, 128, 16])
    )
    big = FlowField(np.full((2, 2), 100.0), np.zeros((2, 2)))
    assert np.array_equal(
        flow_to_motion_image(big, gain=16.0)[0, 0], np.array([255, 128, 255])
    )


def test_motion_image_monotone_until_saturation():
    us = np.linspace(0, 12, 25)
    vals = [
        int(flow_to_motion_image(FlowField(np.full((1, 1), u), np.zeros((1, 1))), 16.0)[0, 0, 0])
        for u in us
    ]
    for a, b in zip(vals, vals[1:]):
        assert b >= a


# ------------------------------------------------------------------------ fmap

def test_fmap_round_trip_bit_exact(tmp_path):
    rng = np.random.default_rng(39)
    frames = rng.standard_normal((3, 5, 4, 6)).astype(np.float32)
    path = str(tmp_path / "t.fmap")
    write_fmap(path, frames, stride=2)
    for k in range(3):
        fm = load_fmap(path, k)
        assert fm.stride == 2
        assert fm.values.dtype == np.float32
        assert np.array_equal(fm.values, frames[k])


def test_fmap_header_fields(tmp_path):
    path = str(tmp_path / "deep.fmap")
    write_fmap(path, np.zeros((1, 512, 2, 2), dtype=np.float32), stride=16)
    h = read_fmap_header(path)
    assert h.channels == 512 and h.stride == 16
    fm = load_fmap(path, 0)
    assert fm.channels == 512 and fm.stride == 16


def test_fmap_truncated(tmp_path):
    path = str(tmp_path / "t.fmap")
    write_fmap(path, np.zeros((2, 1, 4, 4), dtype=np.float32), stride=1)
    data = open(path, "rb").read()
    open(path, "wb").write(data[:-5])
    with pytest.raises(TruncatedFileError):
        load_fmap(path, 0)


def test_fmap_bad_magic(tmp_path):
    path = str(tmp_path / "t.fmap")
    write_fmap(path, np.zeros((1, 1, 2, 2), dtype=np.float32), stride=1)
    data = bytearray(open(path, "rb").read())
    data[:4] = b"JUNK"
    open(path, "wb").write(bytes(data))
    with pytest.raises(BadMagicError):
        load_fmap(path, 0)


def test_fmap_bad_version(tmp_path):
    path = str(tmp_path / "t.fmap")
    write_fmap(path, np.zeros((1, 1, 2, 2), dtype=np.float32), stride=1)
    data = bytearray(open(path, "rb").read())
    data[4] = 9
    open(path, "wb").write(bytes(data))
    with pytest.raises(UnsupportedVersionError):
        load_fmap(path, 0)


def test_fmap_index_out_of_range(tmp_path):
    path = str(tmp_path / "t.fmap")
    write_fmap(path, np.zeros((2, 1, 2, 2), dtype=np.float32), stride=1)
    with pytest.raises(FrameIndexError):
        load_fmap(path, 2)


def test_fmap_trailing_bytes(tmp_path):
    path = str(tmp_path / "t.fmap")
    write_fmap(path, np.zeros((1, 1, 2, 2), dtype=np.float32), stride=1)
    open(path, "ab").write(b"xx")
    with pytest.raises(FmapError):
        load_fmap(path, 0)


# ----------------------------------------------------------- invariants (fuzz)

def test_extractor_outputs_satisfy_featuremap_invariants():
    rng = np.random.default_rng(40)
    table = load_cn_table()
    for _ in range(10):
        side = int(rng.integers(2, 9)) * 4
        img = _rand_image(rng, side, side)
        for fm in (
            extract_hog(img, cell=4),
            extract_cn(img, table, cell=4),
            extract_gray(img, cell=4),
        ):
            assert fm.channels >= 1
            assert np.all(np.isfinite(fm.values))
            assert fm.stride >= 1
            assert fm.height * fm.stride <= side + fm.stride
            assert fm.width * fm.stride <= side + fm.stride
