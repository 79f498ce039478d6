import hashlib

import numpy as np
import pytest

from docstack.cnn import ModelCheckpoint, build_model, save_checkpoint, vgg_lite
from docstack.cnn.architecture import mlp
from docstack.transfer import TransferError, apply_transfer, epochs_to_target, plan_transfer, source_unchanged


def ckpt(classes, seed=0):
    return ModelCheckpoint.from_model(build_model(vgg_lite(classes), seed=seed), init="random")


def test_identical_descriptors_copy_everything():
    src = ckpt(8)
    plan = plan_transfer(src, vgg_lite(8), "L2", seed=1)
    assert all(a == "copy" for _, a in plan.actions)
    assert plan.copied_fraction() == 1.0
    model = apply_transfer(plan)
    for k, v in src.weights.items():
        assert np.array_equal(model.params[k].astype(np.float32), v)


def test_class_change_reinitialises_only_the_classifier():
    plan = plan_transfer(ckpt(6), vgg_lite(8), "L1", seed=7)
    assert dict(plan.actions)["fc2"] == "reinit"
    assert all(a == "copy" for n, a in plan.actions if n != "fc2")
    assert "fc2 -> reinit(7)" in plan.text()
    a, b = apply_transfer(plan), apply_transfer(plan)
    for k in a.params:
        assert np.array_equal(a.params[k], b.params[k])


def test_vacuous_plan_and_bad_level():
    with pytest.raises(TransferError):
        plan_transfer(ckpt(8), mlp(40, (16,), 8), "L2")
    with pytest.raises(TransferError):
        plan_transfer(ckpt(8), vgg_lite(8), "L3")


def test_transfer_from_path_leaves_source_untouched(tmp_path):
    path = tmp_path / "h.ckpt"
    save_checkpoint(ckpt(8, seed=3), path)
    digest = hashlib.sha256(path.read_bytes()).hexdigest()
    from docstack.cnn import load_checkpoint
    plan = plan_transfer(load_checkpoint(path), vgg_lite(8), "L2", source_path=path)
    plan.source = None
    apply_transfer(plan)
    assert source_unchanged(path, digest)
    plan.source_path = str(tmp_path / "missing.ckpt")
    with pytest.raises(TransferError, match="cannot read"):
        apply_transfer(plan)


def test_epochs_to_target():
    hist = [{"epoch": e, "val_acc": a} for e, a in enumerate([0.2, 0.5, 0.7, 0.65], start=1)]
    assert epochs_to_target(hist, 0.0) == 1
    assert epochs_to_target(hist, 0.6) == 3
    assert epochs_to_target(hist, 0.9) is None
