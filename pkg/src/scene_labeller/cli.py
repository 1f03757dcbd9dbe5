"""Command line interface: ``scene-labeller train|predict|eval|segment|synth``."""

from __future__ import annotations

import argparse
import logging
import sys

from .errors import SceneLabellerError
from .pipeline import DEFAULT_TRAIN_COUNT, cmd_eval, cmd_predict, cmd_segment, cmd_train
from .segmentation import SegParams


def _add_seg_args(p):
    defaults = SegParams()
    p.add_argument("--sigma", type=float, default=defaults.sigma, help="pre-smoothing std-dev (pixels)")
    p.add_argument("--k", type=float, default=defaults.k_threshold, help="merge threshold constant")
    p.add_argument("--min-size", type=int, default=defaults.min_size, help="minimum segment size (pixels)")


def _add_dataset_args(p):
    p.add_argument("--dataset", required=True, help="root with images/ and labels/")
    p.add_argument("--mapping", help="raw label -> class mapping file (default: bundled 8-label mapping)")
    p.add_argument("--seed", type=int, default=0, help="split and clustering seed")
    p.add_argument("--train-count", type=int, default=DEFAULT_TRAIN_COUNT)
    p.add_argument("--jobs", type=int, default=1, help="worker processes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scene-labeller", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="learn vocabulary and classifier from the training split")
    _add_dataset_args(p)
    p.add_argument("--model", required=True, help="output model file")
    p.add_argument("--vocab-size", type=int, default=60)
    p.add_argument("--fuzziness", type=float, default=2.0)
    p.add_argument("--bow-only", action="store_true", help="drop the six color features")
    p.add_argument("--dump-signatures", help="write one signature per training region")

    p = sub.add_parser("predict", help="label one image")
    p.add_argument("--model", required=True)
    p.add_argument("--image", required=True)
    p.add_argument("--out", required=True, help="output prefix for _labels.txt and _overlay.png")
    _add_seg_args(p)
    p.add_argument("--dump-keypoints", help="write detected keypoints and descriptors")
    p.add_argument("--dump-signatures", help="write one signature per segment")

    p = sub.add_parser("eval", help="confusion matrices on the evaluation split")
    _add_dataset_args(p)
    p.add_argument("--model", required=True)
    p.add_argument("--report", help="output prefix for <prefix>.txt and <prefix>.csv")
    _add_seg_args(p)

    p = sub.add_parser("segment", help="graph-based segmentation only")
    p.add_argument("--image", required=True)
    p.add_argument("--out", required=True, help="output prefix for _segments.txt and _segments.png")
    _add_seg_args(p)

    p = sub.add_parser("synth", help="generate a synthetic five-class dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--count", type=int, default=60)
    p.add_argument("--seed", type=int, default=0)
    return parser


def _seg_params(args) -> SegParams:
    return SegParams(sigma=args.sigma, k_threshold=args.k, min_size=args.min_size)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "train":
            cmd_train(args.dataset, args.mapping, model_path=args.model, seed=args.seed,
                      vocab_size=args.vocab_size, fuzziness=args.fuzziness,
                      train_count=args.train_count, bow_only=args.bow_only, jobs=args.jobs,
                      dump_signatures=args.dump_signatures)
        elif args.command == "predict":
            cmd_predict(args.model, args.image, args.out, _seg_params(args),
                        dump_keypoints=args.dump_keypoints, dump_signatures=args.dump_signatures)
        elif args.command == "eval":
            cmd_eval(args.model, args.dataset, args.mapping, split_seed=args.seed,
                     train_count=args.train_count, seg_params=_seg_params(args), jobs=args.jobs,
                     report_prefix=args.report)
        elif args.command == "segment":
            segmap = cmd_segment(args.image, args.out, _seg_params(args))
            print(f"{segmap.n_segments} segments")
        elif args.command == "synth":
            from .synthetic import generate_dataset
            generate_dataset(args.out, args.count, args.seed)
    except (SceneLabellerError, OSError, ValueError) as exc:
        print(f"scene-labeller {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
