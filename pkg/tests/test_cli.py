import hashlib
from pathlib import Path

import pytest

from docstack.cli.main import main
from docstack.cnn import load_checkpoint

TINY = [
    "corpus.classes=3", "corpus.train=48", "corpus.validation=24", "corpus.test=24", "corpus.height=64",
    "corpus.width=48", "pretext.classes=2", "pretext.train=16", "pretext.validation=8", "pretext.test=8",
    "arch.input_size=16", "pretext.epochs=1", "holistic.epochs=2", "region.epochs=1", "probe.epochs=2",
    "meta.mlnn_epochs=3", "meta.bagging_bags=2", "meta.knn_k=4,8,64",
]


def run(out, *args, extra=()):
    argv = ["--out", str(out), "--seed", "3"]
    for item in TINY + list(extra):
        argv += ["--set", item]
    return main(argv + list(args))


def digests(root: Path) -> dict:
    skip = ("stamps", "failed")
    return {str(p.relative_to(root)): hashlib.sha256(p.read_bytes()).hexdigest()
            for p in sorted(root.rglob("*")) if p.is_file() and not str(p.relative_to(root)).startswith(skip)}


@pytest.fixture(scope="module")
def tiny_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    assert run(out, "run-all") == 0
    return out


def test_run_all_emits_report(tiny_run):
    for rel in ("config.resolved.cfg", "versions.cfg", "report/table1.csv", "report/table1.md", "report/fig4.csv",
                "report/fig4.svg", "report/convergence.csv", "plans/holistic.txt", "histories/header.csv",
                "stack/notes.txt"):
        assert (tiny_run / rel).exists(), rel
    table = (tiny_run / "report" / "table1.csv").read_text()
    assert "paper, not reproduced" in table and "91.1" in table and "92.2" in table
    assert "knn k requested 4,8,64; used 4,8,24" in (tiny_run / "stack" / "notes.txt").read_text()


def test_fig4_has_one_bar_per_kind(tiny_run):
    kinds = (tiny_run / "stack" / "kinds.txt").read_text().split()
    svg = (tiny_run / "report" / "fig4.svg").read_text()
    assert svg.count('class="bar"') == len(kinds)
    assert len((tiny_run / "report" / "fig4.csv").read_text().splitlines()) == len(kinds) + 1


def test_checkpoints_carry_init_tags(tiny_run):
    assert load_checkpoint(tiny_run / "models" / "holistic.ckpt").metadata["init"] == "L1"
    meta = load_checkpoint(tiny_run / "models" / "header.ckpt").metadata
    assert meta["init"] == "L2" and meta["transfer"]["source"] == "models/holistic.ckpt"


def test_rerun_is_idempotent(tiny_run, capsys):
    before = digests(tiny_run)
    assert run(tiny_run, "run-all") == 0
    assert capsys.readouterr().out == ""  # every stage up to date, nothing reran
    assert run(tiny_run, "--force", "stack") == 0
    assert digests(tiny_run) == before


def test_l2_disabled_gives_random_region_model(tiny_run, tmp_path):
    import shutil
    out = tmp_path / "abl"
    shutil.copytree(tiny_run, out)
    assert run(out, "train-region", "footer", extra=["transfer.l2=false"]) == 0
    assert load_checkpoint(out / "models" / "footer.ckpt").metadata["init"] == "random"


def test_missing_prerequisite_names_producer(tmp_path, capsys):
    assert run(tmp_path, "train-holistic") == 1
    err = capsys.readouterr().err
    assert "docstack gen" in err
    assert main(["--out", str(tmp_path), "report"]) == 1
    assert "docstack evaluate" in capsys.readouterr().err


def test_failed_stage_is_quarantined(tiny_run, tmp_path, capsys):
    import shutil
    out = tmp_path / "broken"
    shutil.copytree(tiny_run, out)
    (out / "models" / "holistic.ckpt").write_bytes(b"garbage")
    assert run(out, "--force", "train-region", "header") == 1
    assert "failed" in capsys.readouterr().err
    assert (out / "failed" / "train-region-header" / "error.txt").exists()


def test_config_errors_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("seed = 1\nthis line is wrong\n")
    assert main(["--config", str(bad), "--out", str(tmp_path), "gen"]) == 2
    assert "bad.cfg:2" in capsys.readouterr().err
    assert main(["--set", "no.such=1", "--out", str(tmp_path), "gen"]) == 2


def test_help_lists_defaults(capsys):
    with pytest.raises(SystemExit):
        main(["--help"])
    out = capsys.readouterr().out
    assert "holistic.epochs" in out and "meta.mlnn_epochs" in out
