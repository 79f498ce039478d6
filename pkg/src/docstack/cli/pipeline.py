"""Stage DAG over a run directory.

gen -> train-pretext -> train-holistic -> train-region x4 -> predict -> stack
-> evaluate -> report, with the convergence probe between predict and stack.
Every stage writes a stamp recording a digest of its inputs and outputs; a
stage whose inputs and outputs are unchanged is skipped.
"""
from __future__ import annotations

import hashlib
import logging
import platform
import shutil
import time
import traceback
from pathlib import Path

import numpy as np

from .. import __version__, kvconfig, stacking
from ..cnn import TrainConfig, build_model, history_csv, load_checkpoint, predict, save_checkpoint, train, vgg_lite
from ..cnn.train import accuracy
from ..docgen import CorpusConfig, generate_corpus, load_images, read_manifest, validate_corpus
from ..regions import VIEW_ORDER, RegionDataset, RegionSpec, Stats, region_dataset, view_tensors
from ..transfer import apply_transfer, epochs_to_target, plan_transfer
from . import report
from .config import PipelineConfig

log = logging.getLogger(__name__)

REGIONS = VIEW_ORDER[1:]
STAGES = ("gen", "train-pretext", "train-holistic", "train-region", "predict", "probe", "stack",
          "evaluate", "report")
EVAL_SPLITS = ("train", "validation", "test")


class StageError(RuntimeError):
    """A stage failed or cannot start; the message says which and why."""


class MissingPrerequisite(StageError):
    pass


def _digest_path(path: Path) -> str:
    h = hashlib.sha256()
    if path.is_dir():
        for p in sorted(path.rglob("*")):
            if p.is_file():
                h.update(str(p.relative_to(path)).encode())
                h.update(hashlib.sha256(p.read_bytes()).digest())
    else:
        h.update(path.read_bytes())
    return h.hexdigest()


def _read_history(path) -> list:
    rows = []
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    for line in lines[1:]:
        e, loss, acc, lr = line.split(",")
        rows.append({"epoch": int(e), "train_loss": float(loss), "val_acc": float(acc), "lr": float(lr)})
    return rows


class Pipeline:
    def __init__(self, cfg: PipelineConfig, out_dir):
        self.cfg = cfg
        self.out = Path(out_dir)
        self._images = {}
        self.timings = {}

    # -- paths -------------------------------------------------------------
    def p(self, *parts) -> Path:
        return self.out.joinpath(*parts)

    def ckpt(self, name) -> Path:
        return self.p("models", f"{name}.ckpt")

    # -- bookkeeping ---------------------------------------------------------
    def _stage_spec(self, stage: str, arg: str | None):
        """``(config keys, prerequisite paths with producers, outputs)`` for a stage."""
        c = self.cfg
        corpus = [("corpus", "gen")]
        train_keys = ["seed", "train.", "arch."]
        if stage == "gen":
            return ["seed", "corpus.", "pretext.classes", "pretext.train", "pretext.validation",
                    "pretext.test"], [], ["corpus", "pretext_corpus"]
        if stage == "train-pretext":
            return train_keys + ["pretext."], [("pretext_corpus", "gen")], \
                ["models/pretext.ckpt", "histories/pretext.csv", "stats/pretext.cfg"]
        if stage == "train-holistic":
            pre = corpus + ([("models/pretext.ckpt", "train-pretext")] if c.bool("transfer.l1") else [])
            return train_keys + ["holistic.", "transfer.l1"], pre, \
                ["models/holistic.ckpt", "histories/holistic.csv", "stats/holistic.cfg", "plans/holistic.txt"]
        if stage == "train-region":
            pre = corpus + ([("models/holistic.ckpt", "train-holistic")] if c.bool("transfer.l2") else [])
            return train_keys + ["region.", "transfer.l2", f"regions.{arg}"], pre, \
                [f"models/{arg}.ckpt", f"histories/{arg}.csv", f"stats/{arg}.cfg", f"plans/{arg}.txt"]
        if stage == "predict":
            pre = corpus + [(f"models/{v}.ckpt", "train-holistic" if v == "holistic" else f"train-region {v}")
                            for v in VIEW_ORDER]
            pre += [(f"stats/{v}.cfg", "train-holistic" if v == "holistic" else f"train-region {v}")
                    for v in VIEW_ORDER]
            return ["arch.", "regions."], pre, [f"predictions/{v}.csv" for v in VIEW_ORDER]
        if stage == "probe":
            pre = corpus + [(f"histories/{v}.csv", f"train-region {v}") for v in REGIONS]
            pre += [(f"stats/{v}.cfg", f"train-region {v}") for v in REGIONS]
            if c.bool("transfer.l2"):
                pre += [("models/holistic.ckpt", "train-holistic")]
            return train_keys + ["probe.", "regions.", "transfer.l2"], pre, ["probe"]
        if stage == "stack":
            return ["seed", "meta."], [(f"predictions/{v}.csv", "predict") for v in VIEW_ORDER], ["stack"]
        if stage == "evaluate":
            pre = corpus + [(f"predictions/{v}.csv", "predict") for v in VIEW_ORDER] + [("stack", "stack")]
            return [], pre, ["eval"]
        if stage == "report":
            pre = [("eval", "evaluate")]
            if self.p("probe").exists() or c.bool("probe.enabled"):
                pre.append(("probe", "probe"))
            return [], pre, ["report"]
        raise StageError(f"unknown stage {stage!r}; choose from {STAGES}")

    def _input_digest(self, stage, arg, keys, prereqs) -> str:
        h = hashlib.sha256()
        h.update(f"{stage}:{arg}:{__version__}".encode())
        for k in sorted(self.cfg.values):
            if any(k == key or (key.endswith(".") and k.startswith(key)) for key in keys):
                h.update(f"{k}={self.cfg.values[k]}\n".encode())
        for rel, _ in prereqs:
            h.update(rel.encode())
            h.update(_digest_path(self.p(rel)).encode())
        return h.hexdigest()

    def _stamp_path(self, stage, arg) -> Path:
        return self.p("stamps", f"{stage}{'-' + arg if arg else ''}.cfg")

    def _up_to_date(self, stamp: Path, digest: str, outputs) -> bool:
        if not stamp.exists():
            return False
        rec = kvconfig.load(stamp)
        if rec.get("inputs") != digest:
            return False
        for rel in outputs:
            if not self.p(rel).exists() or rec.get(f"output.{rel}") != _digest_path(self.p(rel)):
                return False
        return True

    def _quarantine(self, stage, arg, outputs, exc):
        dest = self.p("failed", f"{stage}{'-' + arg if arg else ''}")
        if dest.exists():
            shutil.rmtree(dest)
        dest.mkdir(parents=True)
        for rel in outputs:
            src = self.p(rel)
            if src.exists():
                target = dest / rel
                target.parent.mkdir(parents=True, exist_ok=True)
                shutil.move(str(src), str(target))
        (dest / "error.txt").write_text("".join(traceback.format_exception(exc)), encoding="utf-8")
        stamp = self._stamp_path(stage, arg)
        if stamp.exists():
            stamp.unlink()

    def write_run_record(self):
        self.out.mkdir(parents=True, exist_ok=True)
        self.cfg.save(self.p("config.resolved.cfg"))
        versions = {"docstack": __version__, "numpy": np.__version__, "python": platform.python_version()}
        import scipy
        versions["scipy"] = scipy.__version__
        (self.p("versions.cfg")).write_text(kvconfig.dump(versions), encoding="utf-8")

    def run(self, stage: str, arg: str | None = None, force: bool = False) -> bool:
        """Run one stage; returns False if it was already up to date."""
        if stage == "train-region" and arg not in REGIONS:
            raise StageError(f"train-region needs a region name from {REGIONS}, got {arg!r}")
        keys, prereqs, outputs = self._stage_spec(stage, arg)
        for rel, producer in prereqs:
            if not self.p(rel).exists():
                raise MissingPrerequisite(
                    f"{stage}: missing {self.p(rel)}; run `docstack {producer}` first")
        self.write_run_record()
        digest = self._input_digest(stage, arg, keys, prereqs)
        stamp = self._stamp_path(stage, arg)
        label = f"{stage} {arg}" if arg else stage
        if not force and self._up_to_date(stamp, digest, outputs):
            log.info("%s: up to date", label)
            return False
        start = time.perf_counter()
        log.info("%s: running", label)
        try:
            fn = getattr(self, "stage_" + stage.replace("-", "_"))
            fn(arg) if arg else fn()
        except Exception as exc:
            self._quarantine(stage, arg, outputs, exc)
            raise StageError(f"{label} failed: {exc} (partial outputs moved to {self.p('failed')})") from exc
        self.timings[label] = time.perf_counter() - start
        rec = {"inputs": digest}
        rec.update({f"output.{rel}": _digest_path(self.p(rel)) for rel in outputs})
        stamp.parent.mkdir(parents=True, exist_ok=True)
        stamp.write_text(kvconfig.dump(rec), encoding="utf-8")
        return True

    def run_all(self, force: bool = False):
        plan = [("gen", None), ("train-pretext", None), ("train-holistic", None)]
        plan += [("train-region", v) for v in REGIONS]
        plan += [("predict", None)]
        if self.cfg.bool("probe.enabled"):
            plan += [("probe", None)]
        plan += [("stack", None), ("evaluate", None), ("report", None)]
        for stage, arg in plan:
            self.run(stage, arg, force)

    # -- data helpers --------------------------------------------------------
    def images(self, corpus="corpus") -> dict:
        if corpus not in self._images:
            rows = read_manifest(self.p(corpus, "manifest.csv"))
            self._images[corpus] = {s: load_images(self.p(corpus), [r for r in rows if r.split == s])
                                    for s in EVAL_SPLITS}
        return self._images[corpus]

    def labels(self) -> dict:
        return {r.id: r.label for r in read_manifest(self.p("corpus", "manifest.csv"))}

    def train_config(self, epochs: int, key: str) -> TrainConfig:
        c = self.cfg
        return TrainConfig(epochs=epochs, batch_size=c.int("train.batch_size"), alpha=c.float("train.alpha"),
                           beta1=c.float("train.beta1"), beta2=c.float("train.beta2"),
                           epsilon=c.float("train.epsilon"), patience=c.int("train.patience"),
                           factor=c.float("train.factor"), seed=c.seed_for("train/" + key),
                           dtype=c.str("train.dtype"))

    def descriptor(self, classes: int):
        c = self.cfg
        return vgg_lite(classes, c.int("arch.input_size"), 1, c.ints("arch.widths"), c.int("arch.hidden"),
                        c.float("arch.dropout"))

    def _fit_stats(self, spec: RegionSpec, images) -> Stats:
        stats = Stats.fit(spec.name, view_tensors(images["train"], spec))
        path = self.p("stats", f"{spec.name}.cfg")
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(kvconfig.dump({"view": stats.view, "mean": repr(stats.mean), "std": repr(stats.std)}),
                        encoding="utf-8")
        return stats

    def stats(self, view) -> Stats:
        d = kvconfig.load(self.p("stats", f"{view}.cfg"))
        return Stats(d["view"], float(d["mean"]), float(d["std"]))

    def datasets(self, spec: RegionSpec, stats: Stats, corpus="corpus") -> dict:
        imgs = self.images(corpus)
        return {s: region_dataset(imgs[s], spec, stats) for s in EVAL_SPLITS}

    def _save_training(self, name, ckpt, history):
        for d in ("models", "histories"):
            self.p(d).mkdir(parents=True, exist_ok=True)
        save_checkpoint(ckpt, self.ckpt(name))
        self.p("histories", f"{name}.csv").write_text(history_csv(history), encoding="utf-8")

    def _write_plan(self, name, text):
        self.p("plans").mkdir(parents=True, exist_ok=True)
        self.p("plans", f"{name}.txt").write_text(text, encoding="utf-8")

    # -- stages --------------------------------------------------------------
    def stage_gen(self):
        c = self.cfg
        doc = CorpusConfig(kind="document", classes=c.int("corpus.classes"), height=c.int("corpus.height"),
                           width=c.int("corpus.width"), train=c.int("corpus.train"),
                           validation=c.int("corpus.validation"), test=c.int("corpus.test"),
                           seed=c.seed_for("corpus"), atypical=c.float("corpus.atypical"))
        pre = CorpusConfig(kind="pretext", classes=c.int("pretext.classes"), height=doc.height, width=doc.width,
                           train=c.int("pretext.train"), validation=c.int("pretext.validation"),
                           test=c.int("pretext.test"), seed=c.seed_for("pretext"), atypical=0.0)
        for d in ("corpus", "pretext_corpus"):
            if self.p(d).exists():
                shutil.rmtree(self.p(d))
        generate_corpus(doc, self.p("corpus"))
        generate_corpus(pre, self.p("pretext_corpus"))
        validate_corpus(self.p("corpus"), self.p("pretext_corpus"))
        self._images.clear()

    def stage_train_pretext(self):
        spec = RegionSpec("pretext", (0.0, 0.0, 1.0, 1.0), self.cfg.int("arch.input_size"))
        imgs = self.images("pretext_corpus")
        stats = self._fit_stats(spec, imgs)
        ds = self.datasets(spec, stats, "pretext_corpus")
        model = build_model(self.descriptor(self.cfg.int("pretext.classes")), seed=self.cfg.seed_for("init/pretext"))
        ckpt, hist = train(model, ds["train"], ds["validation"],
                           self.train_config(self.cfg.int("pretext.epochs"), "pretext"),
                           metadata={"view": "pretext"})
        self._save_training("pretext", ckpt, hist)

    def _init_model(self, name, level, source_name):
        """Model for ``name``: transferred from ``source_name`` at ``level`` or random."""
        desc = self.descriptor(self.cfg.int("corpus.classes"))
        if level is None:
            self._write_plan(name, "level none\nall layers -> random init\n")
            return build_model(desc, seed=self.cfg.seed_for(f"init/{name}")), "random", {}
        src = self.ckpt(source_name)
        plan = plan_transfer(load_checkpoint(src), desc, level, seed=self.cfg.seed_for(f"reinit/{name}"),
                             source_path=f"models/{source_name}.ckpt")
        self._write_plan(name, plan.text())
        return apply_transfer(plan), level, {"transfer": plan.to_metadata()}

    def stage_train_holistic(self):
        spec = self.cfg.region_specs()["holistic"]
        stats = self._fit_stats(spec, self.images())
        ds = self.datasets(spec, stats)
        level = "L1" if self.cfg.bool("transfer.l1") else None
        model, init, meta = self._init_model("holistic", level, "pretext")
        ckpt, hist = train(model, ds["train"], ds["validation"],
                           self.train_config(self.cfg.int("holistic.epochs"), "holistic"),
                           init=init, metadata={"view": "holistic", **meta})
        self._save_training("holistic", ckpt, hist)

    def stage_train_region(self, view):
        spec = self.cfg.region_specs()[view]
        stats = self._fit_stats(spec, self.images())
        ds = self.datasets(spec, stats)
        level = "L2" if self.cfg.bool("transfer.l2") else None
        model, init, meta = self._init_model(view, level, "holistic")
        ckpt, hist = train(model, ds["train"], ds["validation"],
                           self.train_config(self.cfg.int("region.epochs"), view),
                           init=init, metadata={"view": view, **meta})
        self._save_training(view, ckpt, hist)

    def stage_predict(self):
        specs = self.cfg.region_specs()
        self.p("predictions").mkdir(parents=True, exist_ok=True)
        for view in VIEW_ORDER:
            ckpt = load_checkpoint(self.ckpt(view))
            model = build_model(ckpt.descriptor, checkpoint=ckpt)
            ds = self.datasets(specs[view], self.stats(view))
            tables = []
            for split in EVAL_SPLITS:
                ids, probs = predict(model, ds[split])
                tables.append(stacking.PredictionTable(view, split, ids, probs))
            stacking.write_tables(self.p("predictions", f"{view}.csv"), tables)

    def stage_probe(self):
        """Random-init baselines per region; compare epochs-to-target with the trained region models."""
        c = self.cfg
        specs = c.region_specs()
        out = self.p("probe")
        if out.exists():
            shutil.rmtree(out)
        out.mkdir(parents=True)
        rows = []
        for view in REGIONS:
            ds = self.datasets(specs[view], self.stats(view))
            desc = self.descriptor(c.int("corpus.classes"))
            rand = build_model(desc, seed=c.seed_for(f"probe-init/{view}"))
            rand_acc0 = accuracy(rand, ds["validation"].x, ds["validation"].y)
            if c.bool("transfer.l2"):
                plan = plan_transfer(load_checkpoint(self.ckpt("holistic")), desc, "L2",
                                     seed=c.seed_for(f"reinit/{view}"))
                init_acc0 = accuracy(apply_transfer(plan), ds["validation"].x, ds["validation"].y)
            else:
                init_acc0 = float("nan")
            _, hist = train(rand, ds["train"], ds["validation"],
                            self.train_config(c.int("probe.epochs"), f"probe/{view}"))
            (out / f"{view}_random.csv").write_text(history_csv(hist), encoding="utf-8")
            target = c.float("probe.fraction") * hist[-1]["val_acc"]
            region_hist = _read_history(self.p("histories", f"{view}.csv"))
            rows.append({
                "view": view, "target": target, "random_final_acc": hist[-1]["val_acc"],
                "random_epochs": epochs_to_target(hist, target),
                "region_init": "L2" if c.bool("transfer.l2") else "random",
                "region_epochs": epochs_to_target(region_hist, target),
                "region_final_acc": region_hist[-1]["val_acc"],
                "random_acc_epoch0": rand_acc0, "region_acc_epoch0": init_acc0,
            })
        report.write_probe_csv(out / "convergence.csv", rows)

    def _meta_specs(self, n_val: int):
        c = self.cfg
        gamma = c.str("meta.svm_gamma")
        return stacking.default_specs(
            n_val, seed=c.seed_for("meta"), knn_k=c.ints("meta.knn_k"), ridge_lambda=c.float("meta.ridge_lambda"),
            svm_c=c.float("meta.svm_c"), svm_gamma=None if gamma == "auto" else float(gamma),
            n_bags=c.int("meta.bagging_bags"), bag_size=c.int("meta.bagging_size"),
            elm_hidden=c.int("meta.elm_hidden"), mlnn_epochs=c.int("meta.mlnn_epochs"),
            mlnn_hidden=c.ints("meta.mlnn_hidden"), mlnn_dropout=c.float("meta.mlnn_dropout"),
            kinds=c.words("meta.kinds"))

    def _split_tables(self):
        tables = {}
        for view in VIEW_ORDER:
            tables.update(stacking.read_tables(self.p("predictions", f"{view}.csv")))
        return {s: {v: tables[(v, s)] for v in VIEW_ORDER} for s in EVAL_SPLITS}

    def stage_stack(self):
        by_split = self._split_tables()
        # Validation labels only: test labels are read by evaluate, after predictions are frozen.
        val_labels = {r.id: r.label for r in read_manifest(self.p("corpus", "manifest.csv"))
                      if r.split == "validation"}
        val = stacking.build_meta_features(by_split["validation"], val_labels)
        test = stacking.build_meta_features(by_split["test"])
        out = self.p("stack")
        if out.exists():
            shutil.rmtree(out)
        (out / "models").mkdir(parents=True)
        (out / "predictions").mkdir()
        specs = self._meta_specs(len(val.ids))
        preds = stacking.run_stack(val, test, specs, model_dir=out / "models")
        for name, labels in preds.items():
            stacking.write_predictions(out / "predictions" / f"{name}.csv", test.ids, labels)
        ids, vote = stacking.majority_vote(by_split["test"])
        stacking.write_predictions(out / "vote.csv", ids, vote)
        (out / "kinds.txt").write_text("\n".join(s.name for s in specs) + "\n", encoding="utf-8")
        used = [s.params["k"] for s in specs if s.kind == "knn"]
        if used:
            requested = ",".join(map(str, self.cfg.ints("meta.knn_k")))
            (out / "notes.txt").write_text(
                f"knn k requested {requested}; used {','.join(map(str, used))} "
                f"(clipped to the {len(val.ids)} validation samples)\n", encoding="utf-8")

    def stage_evaluate(self):
        labels = self.labels()
        by_split = self._split_tables()
        out = self.p("eval")
        out.mkdir(parents=True, exist_ok=True)
        base = []
        for view in VIEW_ORDER:
            t = by_split["test"][view]
            base.append((view, stacking.accuracy(t.ids, t.probs.argmax(axis=1), labels)))
        ids, vote = stacking.read_predictions(self.p("stack", "vote.csv"))
        base.append(("majority_vote", stacking.accuracy(ids, vote, labels)))
        names = self.p("stack", "kinds.txt").read_text(encoding="utf-8").split()
        metas = []
        for name in names:
            ids, pred = stacking.read_predictions(self.p("stack", "predictions", f"{name}.csv"))
            metas.append((name, stacking.accuracy(ids, pred, labels)))
        (out / "base.csv").write_text(
            "model,test_accuracy\n" + "".join(f"{n},{a:.10g}\n" for n, a in base), encoding="utf-8")
        (out / "stack.csv").write_text(
            "meta_kind,test_accuracy\n" + "".join(f"{n},{a:.10g}\n" for n, a in metas), encoding="utf-8")

    def stage_report(self):
        report.emit(self.out, self.p("report"))


def read_accuracy_csv(path) -> dict:
    lines = Path(path).read_text(encoding="utf-8").splitlines()[1:]
    return {a: float(b) for a, b in (line.split(",") for line in lines)}


def read_probe(path) -> list:
    import csv
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


__all__ = ["Pipeline", "StageError", "MissingPrerequisite", "STAGES", "REGIONS", "read_accuracy_csv",
           "read_probe"]
