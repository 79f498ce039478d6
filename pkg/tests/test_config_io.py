import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from docstack import container, kvconfig
from docstack.cli.config import DEFAULTS, PipelineConfig, help_text
from docstack.kvconfig import ConfigError


def test_kv_parse_and_errors():
    assert kvconfig.parse("# c\na = 1\n\nb.c = x y  # tail\n") == {"a": "1", "b.c": "x y"}
    with pytest.raises(ConfigError, match="cfg:2"):
        kvconfig.parse("a = 1\nnonsense\n", "cfg")
    with pytest.raises(ConfigError, match=":3: duplicate"):
        kvconfig.parse("a = 1\n\na = 2\n")


@given(st.dictionaries(st.from_regex(r"[a-z][a-z0-9_.]{0,10}", fullmatch=True),
                       st.from_regex(r"[A-Za-z0-9_.,-]{0,12}", fullmatch=True), max_size=8))
@settings(max_examples=50, deadline=None)
def test_kv_dump_parse_roundtrip(d):
    assert kvconfig.parse(kvconfig.dump(d)) == d


def test_pipeline_config_layers(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("holistic.epochs = 3\nseed = 5\n")
    cfg = PipelineConfig.load(cfg_file, ["region.epochs=2"], seed=9)
    assert cfg.int("holistic.epochs") == 3 and cfg.int("region.epochs") == 2 and cfg.int("seed") == 9
    assert PipelineConfig.load(None).int("corpus.classes") == 8
    assert PipelineConfig().text() == PipelineConfig.load(None).text()
    cfg_file.write_text("holistic.epochs = 3\nbogus.key = 1\n")
    with pytest.raises(ConfigError, match="bogus"):
        PipelineConfig.load(cfg_file)
    with pytest.raises(ConfigError, match="meta.kinds"):
        PipelineConfig.load(None, ["meta.kinds=ridge,forest"])
    with pytest.raises(ConfigError):
        PipelineConfig.load(None, ["regions.header=0,0,1"])


def test_help_lists_every_default():
    text = help_text()
    for key, (value, _) in DEFAULTS.items():
        assert key in text and value in text


def test_container_roundtrip_and_errors():
    arrays = {"a": np.arange(6, dtype=np.float64).reshape(2, 3), "b": np.ones(3, dtype=np.float32),
              "c": np.array([1, -2], dtype=np.int64)}
    buf = container.encode(b"TEST", {"k": 1}, arrays)
    header, back = container.decode(buf, b"TEST")
    assert header == {"k": 1}
    for k in arrays:
        assert back[k].dtype == arrays[k].dtype and np.array_equal(back[k], arrays[k])
    with pytest.raises(container.BadMagicError):
        container.decode(buf, b"NOPE")
    with pytest.raises(container.VersionMismatchError, match="version 1.*version 2"):
        container.decode(buf, b"TEST", version=2)
    for cut in (3, 10, len(buf) - 1):
        with pytest.raises(container.TruncatedFileError):
            container.decode(buf[:cut], b"TEST")
    with pytest.raises(container.ContainerError):
        container.decode(buf + b"\x00", b"TEST")
