"""Harness entry points: train a checkpoint, serve it."""

from __future__ import annotations

import argparse
import logging
import sys

from .train import TrainConfig, train


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="corn-harness", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="post-train an encoder on RNLI files")
    p.add_argument("--train", required=True, help="rnli.train.jsonl")
    p.add_argument("--valid", required=True, help="rnli.valid.jsonl")
    p.add_argument("--out", required=True, help="checkpoint directory")
    p.add_argument("--encoder", default="mini", choices=["tiny", "mini", "small"])
    p.add_argument("--loss", default="scl", choices=["scl", "ce"])
    p.add_argument("--temperature", type=float, default=0.1)
    p.add_argument("--max-len", type=int, default=512)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--learning-rate", type=float, default=1e-5)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--patience", type=int, default=2)
    p.add_argument("--fp16", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("serve", help="serve a checkpoint over the classify protocol")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--mode", choices=["proto", "head"], default=None)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    return args.func(args)


def cmd_train(args) -> int:
    cfg = TrainConfig(
        encoder=args.encoder,
        loss=args.loss,
        temperature=args.temperature,
        max_len=args.max_len,
        batch_size=args.batch_size,
        learning_rate=args.learning_rate,
        epochs=args.epochs,
        patience=args.patience,
        fp16=args.fp16,
        seed=args.seed,
    )
    result = train(args.train, args.valid, args.out, cfg)
    print(f"checkpoint written to {result.checkpoint_dir}")
    if result.valid_losses:
        print(f"final valid loss: {result.valid_losses[-1]:.6f}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .serve import create_app, load_bundle

    bundle = load_bundle(args.checkpoint, mode=args.mode)
    uvicorn.run(create_app(bundle), host=args.host, port=args.port, log_level="info")
    return 0


if __name__ == "__main__":
    sys.exit(main())
