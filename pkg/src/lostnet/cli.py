"""Command-line surface.

    lostnet train    --data DIR --out weights.lnw [--history FILE]
    lostnet eval     --data DIR --weights FILE
    lostnet classify --weights FILE IMAGE
    lostnet hash     IMAGE
    lostnet compare  IMAGE IMAGE
    lostnet register --store DIR --category NAME IMAGE [--description ..] [--location ..]
    lostnet search   --store DIR --weights FILE IMAGE [--top-k N]
    lostnet serve    --store DIR --weights FILE [--port N] [--static DIR]
    lostnet bench    [--weights FILE] [--iterations N] [--resolutions 96,160,224] [--compare-backends]
    lostnet count    [--num-classes N]

Every subcommand accepts ``--config PATH`` (key=value lines) and ``--seed N``.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import AppConfig
from .network.model import build_network, init_weights
from .network.weights_io import load_weights, save_weights
from .network.accounting import count_flops, count_macs, count_params
from .phash import hamming, hash_to_hex, phash_compute
from .registry import Registry
from .train.data import ImagePreprocessor, read_classes, read_manifest, split_dataset
from .train.loop import train as run_train, write_history
from .train.metrics import evaluate


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, default=None, help="key=value config file")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lostnet")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="two-phase training on a manifest directory")
    p.add_argument("--data", type=Path, required=True, help="dir with manifest.tsv, classes.txt, images")
    p.add_argument("--out", type=Path, required=True, help="output weight file")
    p.add_argument("--history", type=Path, default=None, help="per-epoch history file")
    p.add_argument("--initial-weights", type=Path, default=None)
    _add_common(p)

    p = sub.add_parser("eval", help="metrics over a manifest directory")
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--weights", type=Path, required=True)
    _add_common(p)

    p = sub.add_parser("classify", help="predict the category of one image")
    p.add_argument("--weights", type=Path, required=True)
    p.add_argument("image", type=Path)
    _add_common(p)

    p = sub.add_parser("hash", help="perceptual hash of one image")
    p.add_argument("image", type=Path)
    _add_common(p)

    p = sub.add_parser("compare", help="Hamming distance between two images")
    p.add_argument("image_a", type=Path)
    p.add_argument("image_b", type=Path)
    _add_common(p)

    p = sub.add_parser("register", help="add an item to the registry")
    p.add_argument("--store", type=Path, required=True)
    p.add_argument("--category", required=True)
    p.add_argument("--description", default="")
    p.add_argument("--location", default="")
    p.add_argument("image", type=Path)
    _add_common(p)

    p = sub.add_parser("search", help="classify then rank registered items by hash distance")
    p.add_argument("--store", type=Path, required=True)
    p.add_argument("--weights", type=Path, required=True)
    p.add_argument("--top-k", type=int, default=None)
    p.add_argument("image", type=Path)
    _add_common(p)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--store", type=Path, required=True)
    p.add_argument("--weights", type=Path, required=True)
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--static", type=Path, default=None, help="built web UI directory")
    _add_common(p)

    p = sub.add_parser("bench", help="single-image inference latency")
    p.add_argument("--weights", type=Path, default=None)
    p.add_argument("--iterations", type=int, default=10)
    p.add_argument("--resolutions", default=None, help="comma-separated, e.g. 96,160,224")
    p.add_argument("--compare-backends", action="store_true")
    _add_common(p)

    p = sub.add_parser("count", help="parameter and FLOP accounting")
    p.add_argument("--num-classes", type=int, default=None)
    _add_common(p)

    return parser


def _spec_from(cfg: AppConfig, num_classes: int | None = None):
    return build_network(num_classes or cfg.num_classes, cfg.input_resolution)


def _preprocessor(cfg: AppConfig) -> ImagePreprocessor:
    return ImagePreprocessor(cfg.input_resolution, cfg.norm_mean, cfg.norm_std)


def _load_data(cfg: AppConfig, data_dir: Path):
    classes_path = data_dir / "classes.txt"
    classes = read_classes(classes_path) if classes_path.exists() else cfg.classes
    manifest = read_manifest(data_dir / "manifest.tsv", classes, root=data_dir)
    return classes, manifest


def cmd_train(args) -> int:
    cfg = AppConfig.load(args.config)
    classes, manifest = _load_data(cfg, args.data)
    spec = build_network(len(classes), cfg.input_resolution)
    if args.initial_weights:
        store = load_weights(args.initial_weights, expect=spec)
    else:
        store = init_weights(spec, seed=args.seed)
    train_m, val_m = split_dataset(manifest, seed=args.seed)
    tc = cfg.train_config(seed=args.seed)
    store, history = run_train(spec, store, train_m, val_m, tc, _preprocessor(cfg))
    save_weights(store, args.out)
    if args.history:
        write_history(history, args.history)
    last = history[-1]
    print(f"trained {last.epoch} epochs; final loss {last.loss:.4f} "
          f"val accuracy {last.val_accuracy:.4f}; weights -> {args.out}")
    return 0


def cmd_eval(args) -> int:
    cfg = AppConfig.load(args.config)
    classes, manifest = _load_data(cfg, args.data)
    spec = build_network(len(classes), cfg.input_resolution)
    store = load_weights(args.weights, expect=spec)
    from .network.model import Network

    cm, report = evaluate(Network(spec, store), manifest, _preprocessor(cfg))
    payload = report.to_dict()
    payload["confusion_matrix"] = cm.counts.tolist()
    payload["classes"] = list(classes)
    print(json.dumps(payload, indent=2))
    return 0


def cmd_classify(args) -> int:
    cfg = AppConfig.load(args.config)
    spec = _spec_from(cfg)
    store = load_weights(args.weights, expect=spec)
    from .network.model import Network
    from .service import classify_image

    category, confidence, probs = classify_image(
        args.image.read_bytes(), Network(spec, store), _preprocessor(cfg), cfg.classes
    )
    print(json.dumps({
        "category": category,
        "confidence": confidence,
        "scores": {c: float(p) for c, p in zip(cfg.classes, probs)},
    }, indent=2))
    return 0


def cmd_hash(args) -> int:
    print(hash_to_hex(phash_compute(args.image.read_bytes())))
    return 0


def cmd_compare(args) -> int:
    a = phash_compute(args.image_a.read_bytes())
    b = phash_compute(args.image_b.read_bytes())
    print(hamming(a, b))
    return 0


def cmd_register(args) -> int:
    cfg = AppConfig.load(args.config)
    registry = Registry(args.store, cfg.classes)
    record = registry.register(
        args.image.read_bytes(), args.category, args.description, args.location
    )
    print(json.dumps(record.to_json(), indent=2))
    return 0


def cmd_search(args) -> int:
    cfg = AppConfig.load(args.config)
    spec = _spec_from(cfg)
    store = load_weights(args.weights, expect=spec)
    registry = Registry(args.store, cfg.classes)
    from .network.model import Network
    from .service import SearchEngine

    engine = SearchEngine(Network(spec, store), registry, _preprocessor(cfg))
    result = engine.search(args.image.read_bytes(), args.top_k or cfg.top_k)
    print(json.dumps({
        "category": result.category,
        "confidence": result.confidence,
        "matches": [m.__dict__ for m in result.matches],
    }, indent=2))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    cfg = AppConfig.load(args.config)
    spec = _spec_from(cfg)
    store = load_weights(args.weights, expect=spec)
    registry = Registry(args.store, cfg.classes)
    from .service import create_app

    app = create_app(spec, store, registry, _preprocessor(cfg), static_dir=args.static)
    uvicorn.run(app, host=args.host, port=args.port or cfg.port, log_level="warning")
    return 0


def cmd_bench(args) -> int:
    from .bench import REFERENCE_SECONDS_PER_IMAGE, bench_inference, compare_backends

    cfg = AppConfig.load(args.config)
    spec = _spec_from(cfg)
    store = load_weights(args.weights, expect=spec) if args.weights else init_weights(spec, seed=args.seed)
    resolutions = (
        tuple(int(r) for r in args.resolutions.split(",")) if args.resolutions else (cfg.input_resolution,)
    )
    if args.compare_backends:
        reports = compare_backends(spec, store, args.iterations, resolutions)
    else:
        reports = [
            bench_inference(spec, store, args.iterations, resolution=r) for r in resolutions
        ]
    for r in reports:
        print(r.format())
    print(f"reference single-image CPU latency for this architecture class: "
          f"{REFERENCE_SECONDS_PER_IMAGE:.1f} s (context only, not a target)")
    return 0


def cmd_count(args) -> int:
    cfg = AppConfig.load(args.config)
    spec = _spec_from(cfg, num_classes=args.num_classes)
    params = count_params(spec)
    flops = count_flops(spec)
    macs = count_macs(spec)
    print(f"classes:            {spec.num_classes}")
    print(f"input resolution:   {spec.input_resolution}")
    print(f"parameters:         {params:,}")
    print(f"multiply-accumulates: {macs:,} ({macs / 1e6:.2f}M)")
    print(f"flops (pinned convention): {flops:,} ({flops / 1e6:.2f}M)")
    return 0


_COMMANDS = {
    "train": cmd_train,
    "eval": cmd_eval,
    "classify": cmd_classify,
    "hash": cmd_hash,
    "compare": cmd_compare,
    "register": cmd_register,
    "search": cmd_search,
    "serve": cmd_serve,
    "bench": cmd_bench,
    "count": cmd_count,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return _COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
