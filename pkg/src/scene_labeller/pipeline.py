"""End-to-end training, labelling and evaluation."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from pathlib import Path

import numpy as np

from . import keypoints as kp
from .classifier import fit, predict
from .core import CLASS_NAMES, N_CLASSES, ClassId, RgbImage, SegmentMap, extract_regions
from .dataset import (ClassMapping, Sample, default_mapping, ground_truth_partition, load_dataset,
                      load_sample, read_mapping)
from .errors import EmptyEvalSet, InsufficientData
from .evaluation import ConfusionMatrix, majority_truth, render_overlay
from .model_store import ModelFile, load_model, save_model
from .raster_io import hash_colors, read_image, write_int_grid, write_png
from .segmentation import SegParams, segment_image
from .signature import Signature, SignatureConfig, bow_weights, color_statistics
from .vocabulary import MAX_TRAINING_DESCRIPTORS, train_vocabulary

log = logging.getLogger(__name__)

DEFAULT_TRAIN_COUNT = 400


@dataclass
class RegionData:
    """Everything a region contributes before the vocabulary exists."""

    segment_id: int
    cls: int
    color: np.ndarray
    descriptors: np.ndarray


def _map_jobs(fn, items, jobs: int):
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _descriptor_matrix(descs) -> np.ndarray:
    return np.array(descs, dtype=np.float64).reshape(len(descs), -1) if descs else np.zeros((0, 128))


def segment_regions(img: RgbImage, segmap: SegmentMap, features, seg_class=None) -> list[RegionData]:
    """Color statistics and descriptors per segment, skipping VOID segments when classes are given."""
    by_segment = kp.assign_keypoints(features, segmap)
    out = []
    for region in extract_regions(segmap):
        cls = int(seg_class[region.id]) if seg_class is not None else int(ClassId.VOID)
        if seg_class is not None and cls == ClassId.VOID:
            continue
        out.append(RegionData(region.id, cls, color_statistics(region.pixels_of(img)),
                              _descriptor_matrix(by_segment[region.id])))
    return out


def _gt_regions_of(sample: Sample, mapping: ClassMapping) -> list[RegionData]:
    img, grid = load_sample(sample)
    segmap, seg_class = ground_truth_partition(grid, mapping)
    return segment_regions(img, segmap, kp.detect_and_describe(img), seg_class)


def signature_matrix(regions, vocab, cfg: SignatureConfig) -> np.ndarray:
    rows = [Signature(bow_weights(r.descriptors, vocab, cfg), r.color).features(cfg.use_color)
            for r in regions]
    return np.array(rows, dtype=np.float64).reshape(len(rows), cfg.dim)


def _write_signatures(path, rows) -> None:
    with open(path, "w") as fh:
        for image_id, seg_id, cls, feats in rows:
            name = CLASS_NAMES[cls] if cls >= 0 else "void"
            fh.write(f"{image_id} {seg_id} {name} " + " ".join(repr(float(v)) for v in feats) + "\n")


def _resolve_mapping(mapping_file) -> ClassMapping:
    return read_mapping(mapping_file) if mapping_file else default_mapping()


def cmd_train(dataset_root, mapping_file=None, *, model_path=None, seed: int = 0,
              vocab_size: int = 60, fuzziness: float = 2.0, train_count: int = DEFAULT_TRAIN_COUNT,
              bow_only: bool = False, jobs: int = 1, dump_signatures=None, echo=print) -> ModelFile:
    mapping = _resolve_mapping(mapping_file)
    index = load_dataset(dataset_root, mapping, seed, train_count)
    train = index.train
    if not train:
        raise InsufficientData("training split is empty")

    per_image = _map_jobs(partial(_gt_regions_of, mapping=mapping), train, jobs)
    regions = [r for rs in per_image for r in rs]
    all_desc = [r.descriptors for r in regions if len(r.descriptors)]
    descriptors = np.concatenate(all_desc) if all_desc else np.zeros((0, 128))
    log.info("clustering %d descriptors into %d words", len(descriptors), vocab_size)
    vocab = train_vocabulary(descriptors, vocab_size, seed)

    cfg = SignatureConfig(vocab_size=vocab_size, fuzziness=fuzziness, use_color=not bow_only)
    x = signature_matrix(regions, vocab, cfg)
    y = np.array([r.cls for r in regions], dtype=np.int64)
    nb = fit(x, y)

    counts = np.bincount(y, minlength=N_CLASSES)
    provenance = {
        "dataset_root": str(Path(dataset_root)),
        "seed": str(seed),
        "train_count": str(train_count),
        "train_images": str(len(train)),
        "training_regions": str(len(regions)),
        "region_counts": " ".join(f"{n}={c}" for n, c in zip(CLASS_NAMES, counts.tolist())),
        "descriptors": str(len(descriptors)),
        "descriptors_clustered": str(min(len(descriptors), MAX_TRAINING_DESCRIPTORS)),
        "skipped_samples": str(len(index.skipped)),
    }
    model = ModelFile(vocab, cfg, nb, provenance)
    if model_path is not None:
        save_model(model, model_path)

    if echo:
        echo(f"training regions per class ({len(train)} images):")
        for name, c in zip(CLASS_NAMES, counts.tolist()):
            echo(f"  {name:<9}{c:>7}")
    if dump_signatures:
        names = [s.name for s, rs in zip(train, per_image) for _ in rs]
        _write_signatures(dump_signatures,
                          [(n, r.segment_id, r.cls, f) for n, r, f in zip(names, regions, x)])
    return model


def label_image(model: ModelFile, img: RgbImage, seg_params: SegParams = SegParams(), features=None):
    """Segment ``img`` and classify every segment; returns (segmap, per-segment class, regions, features)."""
    segmap = segment_image(img, seg_params)
    if features is None:
        features = kp.detect_and_describe(img)
    regions = segment_regions(img, segmap, features)
    x = signature_matrix(regions, model.vocab, model.sig_cfg)
    pred = np.asarray(predict(model.nb, x), dtype=np.int64).reshape(len(regions))
    return segmap, pred, x, features


def cmd_predict(model_path, image_path, out_prefix, seg_params: SegParams = SegParams(),
                dump_keypoints=None, dump_signatures=None) -> np.ndarray:
    model = load_model(model_path)
    img = read_image(image_path)
    segmap, pred, x, features = label_image(model, img, seg_params)
    labels = pred[segmap.ids]
    write_int_grid(labels, f"{out_prefix}_labels.txt")
    write_png(render_overlay(img, labels), f"{out_prefix}_overlay.png")
    if dump_keypoints:
        kp.write_keypoints(features, dump_keypoints)
    if dump_signatures:
        image_id = Path(image_path).stem
        _write_signatures(dump_signatures, [(image_id, i, int(c), f) for i, (c, f) in enumerate(zip(pred, x))])
    return labels


def cmd_segment(image_path, out_prefix, seg_params: SegParams = SegParams()) -> SegmentMap:
    img = read_image(image_path)
    segmap = segment_image(img, seg_params)
    write_int_grid(segmap.ids, f"{out_prefix}_segments.txt")
    write_png(RgbImage(hash_colors(segmap.ids)), f"{out_prefix}_segments.png")
    return segmap


def _eval_image(sample: Sample, model: ModelFile, mapping: ClassMapping, seg_params: SegParams):
    img, grid = load_sample(sample)
    features = kp.detect_and_describe(img)

    segmap, pred, _, _ = label_image(model, img, seg_params, features)
    truth = majority_truth(segmap, mapping.apply(grid.labels))
    scored = truth >= 0
    auto = (truth[scored].astype(np.int64), pred[scored])

    gt_map, gt_class = ground_truth_partition(grid, mapping)
    gt_regions = segment_regions(img, gt_map, features, gt_class)
    x = signature_matrix(gt_regions, model.vocab, model.sig_cfg)
    gt_pred = np.asarray(predict(model.nb, x), dtype=np.int64).reshape(len(gt_regions))
    gt = (np.array([r.cls for r in gt_regions], dtype=np.int64), gt_pred)
    return auto, gt


@dataclass
class EvalReport:
    auto: ConfusionMatrix
    gt_regions: ConfusionMatrix
    n_images: int

    def text(self) -> str:
        header = (f"evaluation images: {self.n_images}\n"
                  "automatic-segment truth = pixel-majority of mapped ground truth; "
                  "void-majority segments are not scored\n\n")
        return (header
                + self.auto.format_table("[automatic segments]") + "\n"
                + self.gt_regions.format_table("[ground-truth regions]"))

    def csv(self) -> str:
        gt_lines = self.gt_regions.to_csv("gt_regions").splitlines(keepends=True)[1:]
        return self.auto.to_csv("auto") + "".join(gt_lines)


def cmd_eval(model_path, dataset_root, mapping_file=None, *, split_seed: int = 0,
             train_count: int = DEFAULT_TRAIN_COUNT, seg_params: SegParams = SegParams(),
             jobs: int = 1, report_prefix=None, echo=print) -> EvalReport:
    model = load_model(model_path) if not isinstance(model_path, ModelFile) else model_path
    mapping = _resolve_mapping(mapping_file)
    index = load_dataset(dataset_root, mapping, split_seed, train_count)
    samples = index.eval
    if not samples:
        raise EmptyEvalSet("evaluation split is empty")

    results = _map_jobs(partial(_eval_image, model=model, mapping=mapping, seg_params=seg_params),
                        samples, jobs)
    report = EvalReport(ConfusionMatrix.empty(), ConfusionMatrix.empty(), len(samples))
    for (auto_t, auto_p), (gt_t, gt_p) in results:
        report.auto.add(auto_t, auto_p)
        report.gt_regions.add(gt_t, gt_p)

    if report_prefix is not None:
        Path(f"{report_prefix}.txt").write_text(report.text())
        Path(f"{report_prefix}.csv").write_text(report.csv())
    if echo:
        echo(report.text())
    return report
