"""``oodbench`` command line: generate, train, run, eval, report."""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from pathlib import Path

from ..errors import ConfigError, DataError, FormatError, IntegrityError, OODBenchError, ShapeError
from . import pipeline
from .config import load_config

EXIT_OK, EXIT_FAILURE, EXIT_CONFIG, EXIT_DATA = 0, 1, 2, 3
COMMANDS = ("generate", "train", "run", "eval", "report")

log = logging.getLogger("oodbench")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="oodbench", description="OOD benchmark harness for safety monitors")
    p.add_argument("command", choices=COMMANDS + ("all",), help="pipeline stage ('all' runs every stage in order)")
    p.add_argument("--config", "-c", help="experiment YAML (required for generate/train/run/all)")
    p.add_argument("--out", "-o", help="output root; defaults to the config's 'output' entry")
    p.add_argument("--workers", type=int, default=1, help="parallel benchmark workers for 'run'")
    p.add_argument("--seed-override", type=int, default=None, help="replace the config's global seed offset")
    p.add_argument("--monitors", default=None, help="comma-separated monitor names or kinds, e.g. oob,odin,recon")
    return p


def _setup_logging():
    level = os.environ.get("OODBENCH_LOG", "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def _out_dir(args, cfg) -> Path:
    if args.out:
        return Path(args.out)
    if cfg is None:
        raise ConfigError("--out is required when no --config is given")
    return cfg.output


def _dispatch(args) -> None:
    needs_cfg = args.command in ("generate", "train", "run", "all")
    if needs_cfg and not args.config:
        raise ConfigError(f"'{args.command}' needs --config")
    cfg = load_config(args.config, args.seed_override) if args.config else None
    out = _out_dir(args, cfg)
    wanted = {m.strip() for m in args.monitors.split(",") if m.strip()} if args.monitors else None
    if args.workers < 1:
        raise ConfigError("--workers must be at least 1")
    stages = COMMANDS if args.command == "all" else (args.command,)
    for stage in stages:
        t0 = time.perf_counter()
        if stage == "generate":
            info = pipeline.cmd_generate(cfg, out)
            print(f"generate: {info['train']} train / {info['holdout']} holdout instances")
            for name, counts in info["benchmarks"].items():
                print(f"  {name}: {counts['id']} ID + {counts['ood']} OOD")
        elif stage == "train":
            info = pipeline.cmd_train(cfg, out, wanted)
            print(f"train: classifier train accuracy {info['train_accuracy']:.4f} ({info['classifier_bytes']} bytes)")
            for name, size in info["monitor_bytes"].items():
                print(f"  monitor {name}: {size} bytes")
        elif stage == "run":
            info = pipeline.cmd_run(cfg, out, args.workers, wanted)
            print(f"run: {len(info['runs'])} streams, {sum(info['runs'].values())} readouts")
        elif stage == "eval":
            report = pipeline.cmd_eval(out / "readouts", out / "eval")
            cross = report["cross"]
            msg = f"eval: {len(report['benchmarks'])} benchmarks"
            if cross:
                msg += f", chi2_F={cross['chi2_F']:.4f}, p={cross['p']:.4g}"
            print(msg)
        elif stage == "report":
            print(pipeline.cmd_report(out / "eval", out / "report.txt"), end="")
        log.info("%s finished in %.1fs", stage, time.perf_counter() - t0)


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        _dispatch(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, FormatError, IntegrityError, ShapeError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OODBenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
