"""Shared argument handling for the experiment scripts."""
import argparse
from pathlib import Path

from vidmark.bench import EvalConfig, emit_report
from vidmark.cli import _print_aggregates


def parser(description: str) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--config", help="JSON EvalConfig to start from")
    p.add_argument("--clips", type=int, default=20, help="synthetic corpus size")
    p.add_argument("--seed", type=int, default=0, help="corpus and trial seed")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default="results", help="directory for CSV/JSON/journal")
    return p


def base_config(args, **overrides) -> EvalConfig:
    cfg = EvalConfig.load(args.config) if args.config else EvalConfig()
    d = cfg.to_dict()
    d["corpus"].update(synthetic=args.clips, seed=args.seed)
    d.update(seed=args.seed, workers=args.workers, **overrides)
    return EvalConfig.from_dict(d)


def finish(report, name: str, out_dir: str) -> None:
    out = Path(out_dir)
    emit_report(report, "csv", out / f"{name}.csv")
    emit_report(report, "json", out / f"{name}.json")
    _print_aggregates(report)
    print(f"wrote {out / name}.csv and .json")


def outputs(args, name: str) -> dict:
    return {"journal": str(Path(args.out) / f"{name}.journal.jsonl")}
