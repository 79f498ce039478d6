from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from docstack.docgen import (CorpusConfig, CorpusError, class_names, generate_corpus, load_images, plan_corpus,
                             read_manifest, render_image, validate_corpus)
from docstack.docgen import pgm
from docstack.docgen.grammars import DOCUMENT_GRAMMARS, PRETEXT_GRAMMARS, document_grammars


@given(arrays(np.uint8, st.tuples(st.integers(1, 20), st.integers(1, 20))))
@settings(max_examples=50, deadline=None)
def test_pgm_roundtrip(px):
    assert np.array_equal(pgm.decode(pgm.encode(px)), px)


def test_pgm_errors():
    with pytest.raises(pgm.PGMError):
        pgm.decode(b"P2\n1 1\n255\n\x00")
    with pytest.raises(pgm.PGMError):
        pgm.decode(b"P5\n4 4\n255\n\x00\x01")
    with pytest.raises(pgm.PGMError):
        pgm.encode(np.zeros((2, 2), dtype=np.float64))


def test_default_plan_is_balanced():
    rows = plan_corpus(CorpusConfig())
    assert len(rows) == 2500 and len({r.id for r in rows}) == 2500
    shares = {"train": 2000, "validation": 250, "test": 250}
    for split, total in shares.items():
        counts = Counter(r.label for r in rows if r.split == split)
        assert len(counts) == 8
        assert all(abs(v - total / 8) <= 1 for v in counts.values())


def test_render_is_deterministic_and_keyed():
    g = document_grammars(8)
    a = render_image(g, 3, 42, "doc-000001", 128, 96, 0.3)
    b = render_image(g, 3, 42, "doc-000001", 128, 96, 0.3)
    c = render_image(g, 3, 42, "doc-000002", 128, 96, 0.3)
    assert a.dtype == np.uint8 and a.shape == (128, 96)
    assert np.array_equal(a, b) and not np.array_equal(a, c)


def test_region_statistics_differ_between_classes():
    """Mean ink per page band differs between at least one pair of classes in every band."""
    g = document_grammars(8)
    bands = [(0, 64), (64, 192), (192, 256)]
    means = np.zeros((8, len(bands)))
    for label in range(8):
        imgs = [render_image(g, label, 7, f"x{i}", 256, 192) for i in range(6)]
        for j, (r0, r1) in enumerate(bands):
            means[label, j] = np.mean([255 - im[r0:r1].mean() for im in imgs])
    assert np.all(means.max(axis=0) - means.min(axis=0) > 5.0)


def test_generate_small_corpus_and_validate(tmp_path):
    cfg = CorpusConfig(classes=3, train=6, validation=3, test=3, height=64, width=48, seed=5)
    rows = generate_corpus(cfg, tmp_path / "c")
    assert read_manifest(tmp_path / "c" / "manifest.csv") == rows
    assert len(validate_corpus(tmp_path / "c")) == 12
    imgs = load_images(tmp_path / "c", rows)
    assert imgs[0].pixels.shape == (64, 48)
    again = generate_corpus(cfg, tmp_path / "d")
    assert rows == again
    assert (tmp_path / "c" / rows[5].path).read_bytes() == (tmp_path / "d" / rows[5].path).read_bytes()


def test_pretext_corpus_is_class_disjoint(tmp_path):
    generate_corpus(CorpusConfig(classes=3, train=3, validation=3, test=3, height=32, width=32), tmp_path / "d")
    generate_corpus(CorpusConfig(kind="pretext", classes=3, train=3, validation=3, test=3, height=32, width=32),
                    tmp_path / "p")
    validate_corpus(tmp_path / "d", tmp_path / "p")
    assert not set(class_names(tmp_path / "d")) & set(class_names(tmp_path / "p"))
    assert not {g.name for g in DOCUMENT_GRAMMARS} & {g.name for g in PRETEXT_GRAMMARS}
    with pytest.raises(CorpusError, match="share class names"):
        validate_corpus(tmp_path / "d", tmp_path / "d")


def test_validate_detects_missing_file(tmp_path):
    rows = generate_corpus(CorpusConfig(classes=2, train=2, validation=2, test=2, height=32, width=32), tmp_path)
    (tmp_path / rows[0].path).unlink()
    with pytest.raises(CorpusError, match="missing"):
        validate_corpus(tmp_path)


def test_bad_configs(tmp_path):
    with pytest.raises(ValueError):
        plan_corpus(CorpusConfig(classes=17))
    with pytest.raises(CorpusError):
        plan_corpus(CorpusConfig(train=0))
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(CorpusError, match="cannot create"):
        generate_corpus(CorpusConfig(classes=2, train=1, validation=1, test=1), blocker / "sub")
