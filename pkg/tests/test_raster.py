import numpy as np
import pytest

from tilecast import raster
from tilecast.raster import (
    GroundTruthBox,
    Image,
    ImageIOError,
    TileGrid,
    generate_scene,
    load_ground_truth,
    load_image,
    save_ground_truth,
    save_image,
    tile_bounds,
)


def test_load_p5_direct_byte_mapping(tmp_path):
    p = tmp_path / "a.pgm"
    p.write_bytes(b"P5\n2 2\n255\n" + bytes([0, 255, 128, 7]))
    img = load_image(p)
    assert (img.width, img.height, img.components) == (2, 2, 1)
    assert img.samples == bytes([0, 255, 128, 7])


def test_load_p6_single_pixel(tmp_path):
    p = tmp_path / "a.ppm"
    p.write_bytes(b"P6\n1 1\n255\n" + bytes([1, 2, 3]))
    img = load_image(p)
    assert (img.width, img.height, img.components) == (1, 1, 3)


def test_truncated_payload(tmp_path):
    p = tmp_path / "t.pgm"
    p.write_bytes(b"P5\n2 2\n255\n" + bytes([0, 255, 128]))
    with pytest.raises(ImageIOError, match="truncated payload"):
        load_image(p)


def test_bad_magic_and_header(tmp_path):
    p = tmp_path / "x.pgm"
    p.write_bytes(b"P3\n2 2\n255\n0 0 0 0")
    with pytest.raises(ImageIOError, match="not a binary"):
        load_image(p)
    p.write_bytes(b"P5\n2 two\n255\n")
    with pytest.raises(ImageIOError, match="malformed"):
        load_image(p)


def test_maxval_rejected(tmp_path):
    p = tmp_path / "m.pgm"
    p.write_bytes(b"P5\n1 1\n65535\n\x00\x00")
    with pytest.raises(ImageIOError, match="maxval"):
        load_image(p)


def test_save_load_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    for comps in (1, 3):
        img = Image(rng.integers(0, 256, size=(13, 17, comps)).astype(np.uint8))
        p = tmp_path / f"rt{comps}.pnm"
        save_image(img, p)
        assert load_image(p) == img


def test_save_two_components_rejected(tmp_path):
    img = Image(np.zeros((4, 4, 2), dtype=np.uint8))
    with pytest.raises(ImageIOError, match="component count 2"):
        save_image(img, tmp_path / "no.pgm")


def test_save_missing_directory_is_io_error(tmp_path):
    img = Image(np.zeros((2, 2), dtype=np.uint8))
    with pytest.raises(OSError):
        save_image(img, tmp_path / "absent" / "x.pgm")


def test_tile_bounds_examples():
    grid = TileGrid.for_image(1024, 1024, 512, 512)
    assert tile_bounds(grid, 0, 1024, 1024) == (0, 0, 512, 512)
    grid = TileGrid.for_image(1000, 700, 512, 512)
    assert tile_bounds(grid, 1, 1000, 700) == (512, 0, 488, 512)
    with pytest.raises(IndexError):
        tile_bounds(grid, grid.tile_count, 1000, 700)


def test_tiles_partition_image_exactly():
    rng = np.random.default_rng(8)
    for _ in range(50):
        w = int(rng.integers(1, 80))
        h = int(rng.integers(1, 80))
        tw = int(rng.integers(1, 40))
        th = int(rng.integers(1, 40))
        grid = TileGrid.for_image(w, h, tw, th)
        cover = np.zeros((h, w), dtype=np.int32)
        for i in range(grid.tile_count):
            x, y, bw, bh = tile_bounds(grid, i, w, h)
            assert bw >= 1 and bh >= 1
            cover[y : y + bh, x : x + bw] += 1
        assert (cover == 1).all()


def test_scene_determinism_and_counts():
    img1, gt1 = generate_scene(7, 256, 256, 5)
    img2, gt2 = generate_scene(7, 256, 256, 5)
    assert img1 == img2 and gt1 == gt2
    assert len(gt1) == 5
    for b in gt1:
        assert 0 <= b.x and b.x + b.w <= 256
        assert 0 <= b.y and b.y + b.h <= 256
        assert b.w >= 1 and b.h >= 1
    img3, _ = generate_scene(8, 256, 256, 5)
    assert img1 != img3


def test_scene_empty_and_invalid():
    img, gt = generate_scene(1, 64, 64, 0, (8, 16))
    assert gt == []
    assert img.components == 3
    with pytest.raises(ValueError, match="exceeds image"):
        generate_scene(1, 32, 32, 1, (8, 64))


def test_scene_objects_distinct_from_background():
    img, gt = generate_scene(21, 128, 128, 3, (16, 24))
    for b in gt:
        block = img.pixels[b.y : b.y + b.h, b.x : b.x + b.w]
        assert set(np.unique(block).tolist()) <= {24, 231}


def test_ground_truth_csv_round_trip(tmp_path):
    boxes = [GroundTruthBox(0, 1, 2, 3, 4, 5), GroundTruthBox(1, 0, 9, 9, 1, 1)]
    p = tmp_path / "gt.csv"
    save_ground_truth(p, boxes)
    assert load_ground_truth(p) == boxes
    p.write_text("object_id,class_id,x,y,w,h\n0,1,2,3,bad,5\n")
    with pytest.raises(ImageIOError, match="line 2"):
        load_ground_truth(p)
    p.write_text("wrong,header\n")
    with pytest.raises(ImageIOError, match="header"):
        load_ground_truth(p)
