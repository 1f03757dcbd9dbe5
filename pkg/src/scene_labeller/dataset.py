"""Labelled image collections: label grids, class mappings, and train/eval splits.

Expected layout::

    <root>/images/<name>.<png|jpg|...>
    <root>/labels/<name>.txt            (or <name>.regions.txt)

Label files hold one row of whitespace-separated integers per image row.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path

import numpy as np

from .core import SEMANTIC_CLASSES, ClassId, Region, RgbImage, SegmentMap, connected_components, extract_regions
from .errors import DimensionMismatch, EmptyDataset, MissingPair, ParseError, UnknownLabel
from .raster_io import read_image

log = logging.getLogger(__name__)

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".bmp", ".ppm", ".tif", ".tiff")
# extra annotation layers shipped alongside region labels in some corpora
_IGNORED_LABEL_SUFFIXES = (".layers.txt", ".surfaces.txt")


@dataclass(frozen=True, eq=False)
class LabelGrid:
    labels: np.ndarray  # (height, width) raw integer labels, negative = unknown

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def height(self) -> int:
        return self.labels.shape[0]


@dataclass(frozen=True)
class ClassMapping:
    table: dict[int, ClassId]

    def __post_init__(self):
        missing = [c.name for c in SEMANTIC_CLASSES if c not in self.table.values()]
        if missing:
            raise ValueError(f"class mapping has no raw label for {', '.join(missing)}")

    def apply(self, raw) -> np.ndarray:
        """Map raw labels to ClassId ordinals (int8, VOID = -1)."""
        raw = np.asarray(raw)
        values, inverse = np.unique(raw, return_inverse=True)
        unknown = [int(v) for v in values if int(v) not in self.table]
        if unknown:
            raise UnknownLabel(f"raw labels {unknown} are not in the class mapping")
        lut = np.array([int(self.table[int(v)]) for v in values], dtype=np.int8)
        return lut[inverse.ravel()].reshape(raw.shape)


def parse_mapping(text: str) -> ClassMapping:
    table = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"mapping line {lineno}: expected '<raw_int> <class|void>'")
        try:
            raw = int(parts[0])
            table[raw] = ClassId.from_name(parts[1])
        except ValueError as exc:
            raise ParseError(f"mapping line {lineno}: {exc}") from None
    return ClassMapping(table)


def read_mapping(path) -> ClassMapping:
    return parse_mapping(Path(path).read_text())


def default_mapping() -> ClassMapping:
    """Mapping for the eight-label outdoor scene corpus (sky, tree, road, grass, water, building, mountain, foreground)."""
    text = resources.files("scene_labeller").joinpath("data/stanford_background.map").read_text()
    return parse_mapping(text)


def parse_label_grid(text, width: int, height: int) -> LabelGrid:
    if isinstance(text, (bytes, bytearray)):
        text = text.decode("ascii")
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if len(lines) != height:
        raise DimensionMismatch(f"label grid has {len(lines)} rows, expected {height}")
    rows = []
    for y, line in enumerate(lines):
        tokens = line.split()
        if len(tokens) != width:
            raise DimensionMismatch(f"label row {y} has {len(tokens)} entries, expected {width}")
        try:
            rows.append([int(t) for t in tokens])
        except ValueError:
            raise ParseError(f"non-integer token in label row {y}") from None
    return LabelGrid(np.array(rows, dtype=np.int32).reshape(height, width))


class Split(Enum):
    TRAIN = "train"
    EVAL = "eval"


@dataclass(frozen=True)
class Sample:
    name: str
    image_path: Path
    label_path: Path


@dataclass(frozen=True)
class DatasetIndex:
    root: Path
    samples: tuple[Sample, ...]
    splits: tuple[Split, ...]
    mapping: ClassMapping
    skipped: tuple[tuple[str, str], ...] = field(default=())  # (name, reason)

    def subset(self, split: Split) -> list[Sample]:
        return [s for s, tag in zip(self.samples, self.splits) if tag is split]

    @property
    def train(self) -> list[Sample]:
        return self.subset(Split.TRAIN)

    @property
    def eval(self) -> list[Sample]:
        return self.subset(Split.EVAL)


def _label_key(path: Path) -> str | None:
    name = path.name
    if not name.endswith(".txt") or name.endswith(_IGNORED_LABEL_SUFFIXES):
        return None
    key = name[: -len(".txt")]
    return key[: -len(".regions")] if key.endswith(".regions") else key


def _unreadable_reason(path: Path) -> str | None:
    try:
        with open(path, "rb") as fh:
            if not fh.read(1):
                return f"{path.name} is empty"
    except OSError as exc:
        return f"{path.name}: {exc.strerror or exc}"
    return None


def load_dataset(root_dir, mapping: ClassMapping, split_seed: int, train_count: int) -> DatasetIndex:
    """Pair images with label grids and split them with a seeded shuffle.

    Samples whose files cannot be read are listed in ``skipped`` and logged.
    """
    root = Path(root_dir)
    image_dir, label_dir = root / "images", root / "labels"
    if not image_dir.is_dir() or not label_dir.is_dir():
        raise EmptyDataset(f"{root} must contain images/ and labels/ directories")

    images = {p.stem: p for p in sorted(image_dir.iterdir()) if p.suffix.lower() in IMAGE_SUFFIXES}
    labels = {}
    for p in sorted(label_dir.iterdir()):
        key = _label_key(p)
        if key is not None and key not in labels:
            labels[key] = p

    no_label = sorted(set(images) - set(labels))
    no_image = sorted(set(labels) - set(images))
    if no_label or no_image:
        parts = []
        if no_label:
            parts.append(f"images without labels: {', '.join(no_label[:5])}")
        if no_image:
            parts.append(f"labels without images: {', '.join(no_image[:5])}")
        raise MissingPair("; ".join(parts))

    samples, skipped = [], []
    for name in sorted(images):
        reason = _unreadable_reason(images[name]) or _unreadable_reason(labels[name])
        if reason:
            log.warning("skipping sample %s: %s", name, reason)
            skipped.append((name, reason))
        else:
            samples.append(Sample(name, images[name], labels[name]))
    if not samples:
        raise EmptyDataset(f"no usable samples under {root}")
    if not 0 <= train_count <= len(samples):
        raise ValueError(f"train_count={train_count} outside [0, {len(samples)}]")

    order = np.random.default_rng(split_seed).permutation(len(samples))
    shuffled = tuple(samples[i] for i in order)
    splits = tuple(Split.TRAIN if i < train_count else Split.EVAL for i in range(len(shuffled)))
    return DatasetIndex(root, shuffled, splits, mapping, tuple(skipped))


def load_sample(sample: Sample) -> tuple[RgbImage, LabelGrid]:
    img = read_image(sample.image_path)
    grid = parse_label_grid(sample.label_path.read_bytes(), img.width, img.height)
    return img, grid


def ground_truth_partition(grid: LabelGrid, mapping: ClassMapping) -> tuple[SegmentMap, np.ndarray]:
    """Connected components of the mapped classes, plus each component's ClassId ordinal."""
    classes = mapping.apply(grid.labels)
    segmap = connected_components(classes)
    seg_class = np.empty(segmap.n_segments, dtype=np.int8)
    seg_class[segmap.ids.ravel()] = classes.ravel()
    return segmap, seg_class


def ground_truth_regions(image: RgbImage, grid: LabelGrid, mapping: ClassMapping) -> list[tuple[Region, ClassId]]:
    if (image.width, image.height) != (grid.width, grid.height):
        raise DimensionMismatch(
            f"image is {image.width}x{image.height}, label grid is {grid.width}x{grid.height}")
    segmap, seg_class = ground_truth_partition(grid, mapping)
    return [(r, ClassId(int(seg_class[r.id])))
            for r in extract_regions(segmap) if seg_class[r.id] != ClassId.VOID]
