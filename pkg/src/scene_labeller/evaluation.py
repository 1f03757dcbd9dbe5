"""Confusion matrices, segment ground truth by majority vote, and label overlays."""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .core import CLASS_NAMES, N_CLASSES, ClassId, RgbImage, SegmentMap
from .errors import DimensionMismatch

PALETTE = {
    ClassId.SKY: (0, 0, 255),
    ClassId.TREE: (0, 128, 0),
    ClassId.ROAD: (128, 128, 128),
    ClassId.GRASS: (154, 205, 50),
    ClassId.BUILDING: (255, 0, 0),
}


@dataclass
class ConfusionMatrix:
    counts: np.ndarray  # (5, 5) rows = true class, cols = predicted

    @classmethod
    def empty(cls) -> "ConfusionMatrix":
        return cls(np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64))

    def add(self, truth, predicted) -> None:
        np.add.at(self.counts, (np.asarray(truth, dtype=np.int64), np.asarray(predicted, dtype=np.int64)), 1)

    def __iadd__(self, other: "ConfusionMatrix"):
        self.counts = self.counts + other.counts
        return self

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def row_percentages(self) -> np.ndarray:
        """Row-normalized percentages; NaN for classes with no regions."""
        rows = self.counts.sum(axis=1, keepdims=True).astype(np.float64)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(rows > 0, 100.0 * self.counts / rows, np.nan)

    @property
    def class_rates(self) -> np.ndarray:
        return np.diag(self.row_percentages)

    @property
    def average_rate(self) -> float:
        """Mean of the per-class rates over classes that occur."""
        rates = self.class_rates
        return float(np.nanmean(rates)) if np.any(~np.isnan(rates)) else float("nan")

    def format_table(self, title: str = "") -> str:
        width = max(len(n) for n in CLASS_NAMES) + 2
        lines = [title] if title else []
        lines.append("true \\ predicted".ljust(width + 6) + "".join(n.rjust(width) for n in CLASS_NAMES)
                     + "regions".rjust(width))
        pct = self.row_percentages
        for i, name in enumerate(CLASS_NAMES):
            cells = "".join(("-" if np.isnan(v) else f"{v:.1f}").rjust(width) for v in pct[i])
            lines.append(name.ljust(width + 6) + cells + str(int(self.counts[i].sum())).rjust(width))
        lines.append(f"average classification rate: {self.average_rate:.2f}%  (scored regions: {self.total})")
        return "\n".join(lines) + "\n"

    def to_csv(self, mode: str) -> str:
        """Long format: one row per (true, predicted) cell plus one average row."""
        out = io.StringIO()
        out.write("mode,true_class,predicted_class,count,row_percent\n")
        pct = self.row_percentages
        for i, true_name in enumerate(CLASS_NAMES):
            for j, pred_name in enumerate(CLASS_NAMES):
                p = "" if np.isnan(pct[i, j]) else f"{pct[i, j]:.4f}"
                out.write(f"{mode},{true_name},{pred_name},{int(self.counts[i, j])},{p}\n")
        out.write(f"{mode},average,,{self.total},{self.average_rate:.4f}\n")
        return out.getvalue()


def majority_truth(segmap: SegmentMap, gt_classes: np.ndarray) -> np.ndarray:
    """Pixel-majority ClassId per segment; VOID when unlabelled pixels win.

    Ties resolve to the lowest class ordinal, with VOID ranked after all classes.
    """
    if gt_classes.shape != segmap.ids.shape:
        raise DimensionMismatch("ground-truth grid and segment map differ in size")
    slot = np.where(gt_classes < 0, N_CLASSES, gt_classes).astype(np.int64)
    votes = np.zeros((segmap.n_segments, N_CLASSES + 1), dtype=np.int64)
    np.add.at(votes, (segmap.ids.ravel(), slot.ravel()), 1)
    winner = votes.argmax(axis=1)
    return np.where(winner == N_CLASSES, int(ClassId.VOID), winner).astype(np.int8)


def render_overlay(img: RgbImage, labels) -> RgbImage:
    """Blend the class palette over ``img`` at alpha 0.5; VOID pixels are left untouched."""
    labels = np.asarray(labels)
    if labels.shape != (img.height, img.width):
        raise DimensionMismatch(f"label grid {labels.shape} does not match {img.width}x{img.height} image")
    out = img.pixels.astype(np.int64).copy()
    for cls, color in PALETTE.items():
        mask = labels == int(cls)
        out[mask] = (out[mask] + np.array(color) + 1) // 2
    return RgbImage(out.astype(np.uint8))
