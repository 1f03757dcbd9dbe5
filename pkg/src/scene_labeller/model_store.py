"""Versioned, bit-exact text persistence of trained models.

Layout (UTF-8, ``\\n`` line endings)::

    scene-labeller model
    [header]
    format_version 1
    vocab_size <int>
    descriptor_dim <int>
    fuzziness <hexfloat>
    normalize_bow <0|1>
    use_color <0|1>
    n_classes <int>
    feature_dim <int>
    variance_floor <hexfloat>
    [vocab]
    <hexfloat> x descriptor_dim        (one line per visual word)
    [nb]
    prior <hexfloat> x n_classes
    mean <hexfloat> x feature_dim      (one line per class)
    var <hexfloat> x feature_dim       (one line per class)
    [provenance]
    <key> <free text>
    checksum sha256 <hex digest of every preceding byte>

Floats use ``float.hex`` so that reloading reproduces every bit.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .classifier import GaussianNbModel
from .errors import CorruptModel, DimensionInconsistency, VersionMismatch
from .signature import SignatureConfig
from .vocabulary import Vocabulary

FORMAT_VERSION = 1
MAGIC = "scene-labeller model"


@dataclass(frozen=True)
class ModelFile:
    vocab: Vocabulary
    sig_cfg: SignatureConfig
    nb: GaussianNbModel
    provenance: dict[str, str] = field(default_factory=dict)
    format_version: int = FORMAT_VERSION

    def __post_init__(self):
        _check_consistent(self.vocab, self.sig_cfg, self.nb)


def _check_consistent(vocab, cfg, nb):
    if vocab.k != cfg.vocab_size:
        raise DimensionInconsistency(f"vocabulary has {vocab.k} words, config says {cfg.vocab_size}")
    if nb.feature_dim != cfg.dim:
        raise DimensionInconsistency(f"classifier dim {nb.feature_dim} != signature dim {cfg.dim}")


def _hex_row(values) -> str:
    return " ".join(float(v).hex() for v in np.asarray(values).ravel())


def _parse_row(tokens) -> list[float]:
    return [float.fromhex(t) for t in tokens]


def serialize(model: ModelFile) -> bytes:
    cfg, nb = model.sig_cfg, model.nb
    lines = [
        MAGIC,
        "[header]",
        f"format_version {model.format_version}",
        f"vocab_size {cfg.vocab_size}",
        f"descriptor_dim {model.vocab.dim}",
        f"fuzziness {float(cfg.fuzziness).hex()}",
        f"normalize_bow {int(cfg.normalize_bow)}",
        f"use_color {int(cfg.use_color)}",
        f"n_classes {nb.n_classes}",
        f"feature_dim {nb.feature_dim}",
        f"variance_floor {float(nb.variance_floor).hex()}",
        "[vocab]",
        *(_hex_row(word) for word in model.vocab.words),
        "[nb]",
        "prior " + _hex_row(nb.priors),
        *("mean " + _hex_row(row) for row in nb.feat_mean),
        *("var " + _hex_row(row) for row in nb.feat_var),
        "[provenance]",
    ]
    for key, value in model.provenance.items():
        key, value = str(key), str(value)
        if not key or any(ch.isspace() for ch in key) or "\n" in value:
            raise ValueError(f"provenance entry {key!r} must be a single-line key/value")
        lines.append(f"{key} {value}")
    body = ("\n".join(lines) + "\n").encode("utf-8")
    return body + f"checksum sha256 {hashlib.sha256(body).hexdigest()}\n".encode("ascii")


def save_model(model: ModelFile, path) -> None:
    Path(path).write_bytes(serialize(model))


def _split_checksum(data: bytes) -> bytes:
    if not data.endswith(b"\n"):
        raise CorruptModel("model file is truncated")
    cut = data.rfind(b"\n", 0, len(data) - 1) + 1
    body, trailer = data[:cut], data[cut:].decode("ascii", "replace").split()
    if len(trailer) != 3 or trailer[:2] != ["checksum", "sha256"]:
        raise CorruptModel("missing checksum line")
    if hashlib.sha256(body).hexdigest() != trailer[2]:
        raise CorruptModel("checksum mismatch")
    return body


def deserialize(data: bytes) -> ModelFile:
    body = _split_checksum(data)
    try:
        lines = body.decode("utf-8").split("\n")[:-1]
    except UnicodeDecodeError:
        raise CorruptModel("model file is not valid UTF-8") from None
    if not lines or lines[0] != MAGIC:
        raise CorruptModel("not a scene-labeller model file")

    sections: dict[str, list[str]] = {}
    current = None
    for line in lines[1:]:
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1]
            sections[current] = []
        elif current is None:
            raise CorruptModel("content before first section")
        else:
            sections[current].append(line)
    for name in ("header", "vocab", "nb", "provenance"):
        if name not in sections:
            raise CorruptModel(f"missing [{name}] section")

    header = dict(line.split(" ", 1) for line in sections["header"])
    try:
        version = int(header["format_version"])
    except (KeyError, ValueError):
        raise CorruptModel("unreadable format_version") from None
    if version != FORMAT_VERSION:
        raise VersionMismatch(f"model format version {version}; this build reads {FORMAT_VERSION}")

    try:
        cfg = SignatureConfig(
            vocab_size=int(header["vocab_size"]),
            fuzziness=float.fromhex(header["fuzziness"]),
            normalize_bow=header["normalize_bow"] == "1",
            use_color=header["use_color"] == "1",
        )
        n_classes = int(header["n_classes"])
        feature_dim = int(header["feature_dim"])
        descriptor_dim = int(header["descriptor_dim"])
        floor = float.fromhex(header["variance_floor"])

        words = np.array([_parse_row(l.split()) for l in sections["vocab"]], dtype=np.float64)
        nb_rows: dict[str, list[list[float]]] = {"prior": [], "mean": [], "var": []}
        for line in sections["nb"]:
            tag, *tokens = line.split()
            nb_rows[tag].append(_parse_row(tokens))
    except (KeyError, ValueError) as exc:
        raise CorruptModel(f"malformed model content: {exc}") from None

    if words.shape != (cfg.vocab_size, descriptor_dim):
        raise DimensionInconsistency(f"vocab block shape {words.shape} disagrees with header")
    priors = np.array(nb_rows["prior"][0] if nb_rows["prior"] else [], dtype=np.float64)
    mean = np.array(nb_rows["mean"], dtype=np.float64)
    var = np.array(nb_rows["var"], dtype=np.float64)
    if priors.shape != (n_classes,) or mean.shape != (n_classes, feature_dim) or var.shape != mean.shape:
        raise DimensionInconsistency("naive Bayes block shape disagrees with header")

    provenance = {}
    for line in sections["provenance"]:
        key, _, value = line.partition(" ")
        provenance[key] = value
    nb = GaussianNbModel(priors, mean, var, floor)
    return ModelFile(Vocabulary(words), cfg, nb, provenance, version)


def load_model(path) -> ModelFile:
    return deserialize(Path(path).read_bytes())
