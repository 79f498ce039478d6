import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from docstack.docgen import LabeledImage
from docstack.regions import (DEFAULT_GEOMETRY, RegionError, RegionSpec, Stats, crop_bounds, default_specs,
                              extract_region, region_dataset, resize, resize_matrix, round_half_up, standardize)


def test_default_crop_bounds_cover_the_page():
    specs = default_specs(32)
    assert crop_bounds(specs["header"], 256, 192) == (0, 64, 0, 192)
    assert crop_bounds(specs["footer"], 256, 192) == (192, 256, 0, 192)
    assert crop_bounds(specs["left_body"], 256, 192) == (64, 192, 0, 96)
    assert crop_bounds(specs["right_body"], 256, 192) == (64, 192, 96, 192)
    assert crop_bounds(specs["holistic"], 256, 192) == (0, 256, 0, 192)


def test_round_half_up():
    assert [round_half_up(v) for v in (0.5, 1.5, 2.5, 2.4999)] == [1, 2, 3, 2]


def test_invalid_specs():
    with pytest.raises(RegionError):
        RegionSpec("header", (0.5, 0.0, 0.4, 1.0))
    with pytest.raises(RegionError):
        RegionSpec("holistic", (0.0, 0.0, 0.5, 1.0))
    with pytest.raises(RegionError):
        crop_bounds(RegionSpec("tiny", (0.0, 0.0, 0.001, 0.001)), 256, 192)


@given(st.integers(2, 300), st.integers(1, 64))
@settings(max_examples=60, deadline=None)
def test_resize_rows_are_stochastic(src, dst):
    m = resize_matrix(src, dst)
    assert m.shape == (dst, src) and np.all(m >= 0)
    assert np.allclose(m.sum(axis=1), 1.0)


def test_resize_preserves_constants_and_identity():
    img = np.full((40, 30), 0.25)
    assert np.allclose(resize(img, 8, 8), 0.25)
    x = np.random.default_rng(0).random((16, 16))
    assert np.allclose(resize(x, 16, 16), x)


def test_extract_region_channels_and_scale():
    px = np.full((256, 192), 255, dtype=np.uint8)
    out = extract_region(px, default_specs(32)["header"], channels=3)
    assert out.shape == (3, 32, 32) and np.allclose(out, 1.0)


def test_standardize_checks_view_tag_and_floor():
    batch = np.ones((4, 1, 8, 8))
    stats = Stats.fit("header", batch)
    assert stats.std == 0.0
    assert np.all(standardize(batch, stats, "header") == 0.0)
    with pytest.raises(RegionError, match="footer"):
        standardize(batch, stats, "footer")


def test_region_dataset_is_standardized():
    rng = np.random.default_rng(1)
    imgs = [LabeledImage(f"i{k}", rng.integers(0, 256, (64, 48), dtype=np.uint8), k % 2, "train")
            for k in range(10)]
    spec = RegionSpec("header", DEFAULT_GEOMETRY["header"], 16)
    from docstack.regions import view_tensors
    stats = Stats.fit("header", view_tensors(imgs, spec))
    ds = region_dataset(imgs, spec, stats)
    assert ds.x.shape == (10, 1, 16, 16)
    assert abs(ds.x.mean()) < 1e-9 and abs(ds.x.std() - 1.0) < 1e-9
    assert ds.ids == [f"i{k}" for k in range(10)]
    seen = [i for _, _, ids in ds.batches(3, seed=2) for i in ids]
    assert sorted(seen) == sorted(ds.ids)
