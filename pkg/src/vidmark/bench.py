"""Evaluation harness: distortion matrices, strength/payload/dimension sweeps and the editing app.

Every random choice is derived from ``EvalConfig.seed`` plus the identity of
the work item (clip index, distortion label, repeat), never from scheduling
order, so reports are byte-identical across runs and worker counts.  External
codec cells are the one exception: they depend on the installed encoder.
"""
from __future__ import annotations

import csv
import glob
import hashlib
import io
import json
import math
import os
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
from scipy.ndimage import zoom

from . import codec
from .corpus import synthetic_clip
from .detector import (
    calibrate_null,
    crop_region,
    decode_filtered,
    decode_unfiltered,
    detect,
    editing_roi,
    iou,
    localize,
    make_editing_scenario,
)
from .distortion import PANEL4, TABLE1_SUITE, DistortionSpec, apply
from .errors import CodecFailure, CodecUnavailable, ConfigInvalid, CorpusEmpty, IoFailure
from .io import load_clip
from .metrics import MSSIM_MODE, PSNR_MODE, bit_accuracy, mssim, psnr, tpsnr
from .spread import DETECTION_MIDPOINT, Message, embed_video, extract_video, gen_key, load_key, luma_residual
from .video import VideoClip

CSV_COLUMNS = (
    "method", "alpha", "payload", "distortion", "strength", "clip", "seed",
    "bit_acc", "psnr", "mssim", "tpsnr", "det_score", "ms",
)
METHOD = "dwt3ss"
SKIPPED = "SKIPPED"
HIST_BUCKETS = 20

LEDGER_FLAGS = {
    "psnr_mode": PSNR_MODE,
    "mssim_mode": MSSIM_MODE,
    "crop": "crop-out: a box of the given area ratio stays in place, everything outside it is zeroed",
    "frame_drop": "freeze: each dropped frame is replaced by the last retained frame",
    "frame_swap": "pairs (t, t+1) at even t swapped with probability p",
    "detection": f"logistic(z - {DETECTION_MIDPOINT:g}) of the standardized presence statistic",
    "codec_cells": "external-codec rows depend on the installed encoder and are exempt from determinism",
}


# --------------------------------------------------------------------------- config


@dataclass
class CorpusSpec:
    """Clip paths/globs, or a seeded synthetic corpus when ``paths`` is empty."""

    paths: list = field(default_factory=list)
    synthetic: int = 20
    seed: int = 0
    t: int = 8
    h: int = 128
    w: int = 128


@dataclass
class EditingSpec:
    lengths: list = field(default_factory=lambda: [60, 120, 240, 360, 720])
    trials: int = 8
    background_hw: list = field(default_factory=lambda: [240, 462])
    source_len: int = 16
    null_clips: int = 40
    threshold: float = 0.3
    control: bool = False


@dataclass
class EvalConfig:
    corpus: CorpusSpec = field(default_factory=CorpusSpec)
    key_seed: int = 7
    key_path: str | None = None
    payload: list = field(default_factory=lambda: [96])
    chip_len: int | None = 128
    alpha: list | None = None
    psnr_target: list = field(default_factory=lambda: [37.0])
    psnr_tol: float = 0.05
    distortions: list = field(default_factory=lambda: [d.to_dict() for d in TABLE1_SUITE])
    repeats: int = 1
    seed: int = 0
    segment_len: int = 8
    lengths: list = field(default_factory=lambda: [8, 16, 32, 64])
    resolutions: list = field(default_factory=lambda: [[128, 128], [240, 462], [480, 864]])
    editing: EditingSpec = field(default_factory=EditingSpec)
    workers: int = 1
    timing: bool = False
    strict_codec: bool = False
    outputs: dict = field(default_factory=dict)

    def __post_init__(self):
        if isinstance(self.corpus, dict):
            self.corpus = CorpusSpec(**self.corpus)
        if isinstance(self.editing, dict):
            self.editing = EditingSpec(**self.editing)
        self.validate()

    def validate(self) -> None:
        def need(ok, msg):
            if not ok:
                raise ConfigInvalid(msg)

        need(self.repeats >= 1, "repeats must be >= 1")
        need(len(self.payload) > 0, "payload list is empty")
        need(all(int(m) >= 1 for m in self.payload), "payloads must be positive")
        need(self.alpha is None or len(self.alpha) > 0, "alpha list is empty")
        need(self.alpha is None or all(a >= 0 for a in self.alpha), "alpha must be >= 0")
        need(self.alpha is not None or len(self.psnr_target) > 0, "psnr_target list is empty")
        need(self.psnr_tol > 0, "psnr_tol must be > 0")
        need(len(self.distortions) > 0, "distortion list is empty")
        need(self.segment_len >= 2, "segment_len must be >= 2")
        need(len(self.lengths) > 0 and len(self.resolutions) > 0, "dimension grids are empty")
        need(self.workers >= 1, "workers must be >= 1")
        need(len(self.editing.lengths) > 0 and self.editing.trials >= 1, "editing grid is empty")
        try:
            self.cells()
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigInvalid(f"bad distortion entry: {exc}") from None

    def cells(self) -> list[DistortionSpec]:
        """Expand distortion entries (optionally with a ``strengths`` grid) into cells."""
        out = []
        for entry in self.distortions:
            base = DistortionSpec.from_dict({k: v for k, v in entry.items() if k != "strengths"})
            grid = entry.get("strengths")
            out.extend([base] if not grid else [base.with_strength(s) for s in grid])
        return out

    def settings(self) -> list[tuple[str, float]]:
        """("alpha", value) pairs, or ("psnr", target) pairs when alpha is tuned per clip."""
        if self.alpha is not None:
            return [("alpha", float(a)) for a in self.alpha]
        return [("psnr", float(p)) for p in self.psnr_target]

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "EvalConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigInvalid(f"unknown config fields {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigInvalid(str(exc)) from None

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def loads(cls, text: str) -> "EvalConfig":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigInvalid(f"config is not valid JSON: {exc}") from None

    def save(self, path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def load(cls, path) -> "EvalConfig":
        try:
            return cls.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigInvalid(f"cannot read config {path}: {exc}") from None

    def fingerprint(self) -> str:
        """Hash of everything that affects results (not workers, timing or output paths)."""
        d = self.to_dict()
        for k in ("workers", "timing", "outputs"):
            d.pop(k)
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]


# --------------------------------------------------------------------------- corpus


def corpus_entries(spec: CorpusSpec) -> list[tuple[str, tuple]]:
    if spec.paths:
        found = []
        for pattern in spec.paths:
            hits = sorted(glob.glob(pattern)) or ([pattern] if os.path.exists(pattern) else [])
            found.extend(hits)
        entries = [(Path(p).stem, ("file", p)) for p in found]
    else:
        entries = [(f"syn{spec.seed}-{i:03d}", ("syn", spec.seed * 100003 + i)) for i in range(spec.synthetic)]
    if not entries:
        raise CorpusEmpty(f"no clips matched {spec.paths or 'the synthetic spec'}")
    return entries


def fit_clip(clip: VideoClip, t: int, h: int, w: int) -> VideoClip:
    """Resample a clip spatially and loop/truncate it temporally to (t, h, w)."""
    rgb = clip.to("RGB").frames
    if rgb.shape[1:3] != (h, w):
        rgb = zoom(rgb, (1, h / rgb.shape[1], w / rgb.shape[2], 1), order=1)[:, :h, :w]
    idx = np.arange(t) % rgb.shape[0]
    return VideoClip(np.clip(rgb[idx], 0, 1), "RGB", clip.frame_rate)


def load_entry(source: tuple, t: int, h: int, w: int) -> tuple[VideoClip, bool]:
    """Clip for a corpus entry at the requested dims, plus whether it had to be resampled."""
    kind, ref = source
    if kind == "syn":
        return synthetic_clip(int(ref), t, h, w), False
    clip = load_clip(ref)
    if clip.shape == (t, h, w):
        return clip.to("RGB"), False
    return fit_clip(clip, t, h, w), True


# --------------------------------------------------------------------------- primitives


def derive_seed(*parts) -> int:
    words = [p if isinstance(p, int) else zlib.crc32(str(p).encode()) for p in parts]
    return int(np.random.SeedSequence([w & 0xFFFFFFFF for w in words]).generate_state(1, np.uint64)[0] >> 1)


def tune_alpha(cover: VideoClip, msg: Message, key, target_db: float, tol: float = 0.05, max_iter: int = 60):
    """Bisection on log(alpha) until the RGB PSNR of the marked clip is within ``tol`` of the target.

    PSNR is monotone decreasing in alpha (clamping only ever lowers the error).
    Returns (alpha, marked clip, achieved PSNR).
    """
    t = len(cover)
    r = luma_residual(msg, key)
    reps = -(-t // r.shape[0])
    energy = float(np.mean(np.concatenate([r] * reps)[:t] ** 2))
    guess = math.sqrt(10 ** (-target_db / 10) / energy)

    def measure(a):
        marked = embed_video(cover, msg, key, a)
        return marked, psnr(cover, marked)

    lo, hi = guess / 2, guess * 2
    while measure(hi)[1] > target_db:
        hi *= 2
    while measure(lo)[1] < target_db:
        lo /= 2
    best = None
    for _ in range(max_iter):
        mid = math.sqrt(lo * hi)
        marked, q = measure(mid)
        if best is None or abs(q - target_db) < abs(best[2] - target_db):
            best = (mid, marked, q)
        if abs(q - target_db) <= tol:
            break
        if q > target_db:
            lo = mid
        else:
            hi = mid
    return best


def key_for(cfg: EvalConfig, m: int, dims):
    if cfg.key_path:
        key = load_key(cfg.key_path)
        if key.m != m or key.dims != tuple(dims):
            raise ConfigInvalid(f"key file has m={key.m}, dims={key.dims}; run needs m={m}, dims={tuple(dims)}")
        return key
    return gen_key(cfg.key_seed, m, tuple(dims), cfg.chip_len)


def method_label(setting: tuple[str, float], dims=None) -> str:
    mode, value = setting
    tag = f"a{value:g}" if mode == "alpha" else f"{value:g}dB"
    shape = "" if dims is None else f"[{'x'.join(str(d) for d in dims)}]"
    return f"{METHOD}{shape}@{tag}"


def item_id(*parts) -> str:
    return "|".join(str(p) for p in parts)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if math.isnan(v):
        return "nan"
    return f"{v:.10g}"


# --------------------------------------------------------------------------- report


@dataclass
class EvalReport:
    kind: str
    config: dict
    rows: list = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    def measured(self) -> list[dict]:
        return [r for r in self.rows if r["bit_acc"] not in (None, SKIPPED)]

    def aggregates(self) -> list[dict]:
        """Mean/std of bit accuracy per (method, payload, distortion, strength), in first-seen order."""
        groups: dict[tuple, list] = {}
        for r in self.rows:
            groups.setdefault((r["method"], r["payload"], r["distortion"], r["strength"]), []).append(r)
        out = []
        for (method, payload, dist, strength), rows in groups.items():
            acc = np.array([float(r["bit_acc"]) for r in rows if r["bit_acc"] not in (None, SKIPPED, "")])
            q = np.array([float(r["psnr"]) for r in rows if r["psnr"] not in (None, "")])
            out.append(
                {
                    "method": method,
                    "payload": payload,
                    "distortion": dist,
                    "strength": strength,
                    "n": int(acc.size),
                    "skipped": len(rows) - int(acc.size),
                    "mean": float(acc.mean()) if acc.size else None,
                    "std": float(acc.std()) if acc.size else None,
                    "psnr_mean": float(q.mean()) if q.size else None,
                    "histogram": histogram(acc),
                }
            )
        return out

    def mean_accuracy(self, **match) -> float:
        vals = [
            float(r["bit_acc"])
            for r in self.measured()
            if all(r.get(k) == v for k, v in match.items())
        ]
        return float(np.mean(vals)) if vals else float("nan")

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "config": self.config,
            "ledger": LEDGER_FLAGS,
            "notes": self.notes,
            "rows": self.rows,
            "aggregates": self.aggregates(),
        }


def histogram(values, buckets: int = HIST_BUCKETS) -> list[int]:
    counts, _ = np.histogram(np.asarray(values, dtype=float), bins=buckets, range=(0.0, 1.0))
    return [int(c) for c in counts]


def csv_text(report: EvalReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in report.rows:
        writer.writerow([_fmt(r.get(c)) for c in CSV_COLUMNS])
    return buf.getvalue()


def emit_report(report: EvalReport, fmt: str, path) -> Path:
    fmt = fmt.lower()
    if fmt not in ("csv", "json"):
        raise ConfigInvalid(f"unknown report format {fmt!r}")
    path = Path(path)
    text = csv_text(report) if fmt == "csv" else json.dumps(_jsonable(report.to_json()), indent=1, sort_keys=True) + "\n"
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise IoFailure(f"cannot write report {path}: {exc}") from None
    return path


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else _fmt(x)
    if isinstance(x, np.integer):
        return int(x)
    return x


def _parse(col: str, text: str):
    if text == "":
        return None
    if col in ("method", "distortion", "clip") or text == SKIPPED:
        return text
    if col in ("payload", "seed"):
        return int(text)
    return float(text)


def read_csv_report(path) -> list[dict]:
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
                raise ConfigInvalid(f"{path} does not have the report columns")
            return [{c: _parse(c, row[c]) for c in CSV_COLUMNS} for row in reader]
    except OSError as exc:
        raise IoFailure(f"cannot read report {path}: {exc}") from None


def load_report(path) -> EvalReport:
    path = Path(path)
    if path.suffix.lower() == ".json":
        try:
            data = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise IoFailure(f"cannot read report {path}: {exc}") from None
        rows = [{c: _coerce_json(c, r.get(c)) for c in r} for r in data["rows"]]
        return EvalReport(data.get("kind", "unknown"), data.get("config", {}), rows, data.get("notes", {}))
    return EvalReport("csv", {}, read_csv_report(path))


def _coerce_json(col, v):
    # Non-finite floats are stored as strings in JSON; only numeric report columns need undoing.
    if isinstance(v, str) and col in CSV_COLUMNS and col not in ("method", "distortion", "clip") and v != SKIPPED:
        return float(v)
    return v


# --------------------------------------------------------------------------- journal


class Journal:
    """Append-only JSON-lines record of finished rows, keyed by work-item id."""

    def __init__(self, path, fingerprint: str):
        self.path = Path(path) if path else None
        self.done: dict[str, dict] = {}
        if self.path is None:
            return
        if self.path.exists():
            lines = self.path.read_text().splitlines()
            if lines:
                head = json.loads(lines[0])
                if head.get("fingerprint") != fingerprint:
                    raise ConfigInvalid(f"journal {self.path} belongs to a different config")
                good = 1
                for line in lines[1:]:
                    try:
                        rec = json.loads(line)
                    except json.JSONDecodeError:
                        break  # torn final line from an interrupted run
                    self.done[rec["item"]] = rec["row"]
                    good += 1
                if good < len(lines) or not self.path.read_text().endswith("\n"):
                    # Drop the torn tail so new records start on a fresh line.
                    self.path.write_text("".join(line + "\n" for line in lines[:good]))
                return
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.path.write_text(json.dumps({"fingerprint": fingerprint}) + "\n")

    def record(self, rows: list[dict]) -> None:
        for r in rows:
            self.done[r["item"]] = r
        if self.path is None:
            return
        with self.path.open("a") as fh:
            for r in rows:
                fh.write(json.dumps({"item": r["item"], "row": _jsonable(r)}) + "\n")


def _run_units(cfg: EvalConfig, units: list, worker, journal: Journal) -> None:
    """Run each unit whose rows are not all journaled; the parent is the only writer."""
    pending = [u for u in units if not all(i in journal.done for i in u["items"])]
    if cfg.workers > 1 and len(pending) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            futures = [pool.submit(worker, cfg.to_dict(), u, sorted(journal.done)) for u in pending]
            for fut in futures:
                journal.record(fut.result())
    else:
        for u in pending:
            journal.record(worker(cfg.to_dict(), u, sorted(journal.done)))


def _collect(units: list, journal: Journal) -> list[dict]:
    rows = []
    for u in units:
        rows.extend(journal.done[i] for i in u["items"])
    return rows


# --------------------------------------------------------------------------- matrix-style runs


def _cells_for(cfg: EvalConfig, panel: bool) -> list[DistortionSpec]:
    return list(PANEL4) if panel else cfg.cells()


def _matrix_units(cfg: EvalConfig, cells, dims_grid, payloads, settings) -> list[dict]:
    entries = corpus_entries(cfg.corpus)
    units = []
    for dims in dims_grid:
        for m in payloads:
            for setting in settings:
                method = method_label(setting, dims if len(dims_grid) > 1 else None)
                for ci, (cid, source) in enumerate(entries):
                    items = [
                        item_id(method, m, cell.label, cid, rep)
                        for cell in cells
                        for rep in range(cfg.repeats)
                    ]
                    units.append(
                        {
                            "dims": list(dims),
                            "m": int(m),
                            "setting": list(setting),
                            "method": method,
                            "clip_index": ci,
                            "clip": cid,
                            "source": list(source),
                            "cells": [c.to_dict() for c in cells],
                            "items": items,
                        }
                    )
    return units


def _matrix_worker(cfg_dict: dict, unit: dict, done: list) -> list[dict]:
    cfg = EvalConfig.from_dict(cfg_dict)
    done = set(done)
    t, h, w = unit["dims"]
    cover, resampled = load_entry(tuple(unit["source"]), t, h, w)
    key_dims = (min(cfg.segment_len, t), h, w)
    m = unit["m"]
    key = key_for(cfg, m, key_dims)
    msg = Message.random(m, derive_seed(cfg.seed, "msg", unit["clip_index"], m))
    mode, value = unit["setting"]
    if mode == "alpha":
        alpha, marked = value, embed_video(cover, msg, key, value)
    else:
        alpha, marked, _ = tune_alpha(cover, msg, key, value, cfg.psnr_tol)
    quality = {"psnr": psnr(cover, marked), "mssim": mssim(cover, marked), "tpsnr": tpsnr(cover, marked)}
    padded = t % key_dims[0] != 0 or h % 8 != 0 or w % 8 != 0
    rows = []
    it = iter(unit["items"])
    for cell_dict in unit["cells"]:
        base = DistortionSpec.from_dict(cell_dict)
        for rep in range(cfg.repeats):
            item = next(it)
            if item in done:
                continue
            seed = derive_seed(cfg.seed, unit["clip_index"], base.label, rep)
            spec = base.with_seed(seed)
            row = {
                "item": item,
                "method": unit["method"],
                "alpha": alpha,
                "payload": m,
                "distortion": spec.kind,
                "strength": spec.strength,
                "clip": unit["clip"],
                "seed": seed,
                **quality,
                "dims": list(unit["dims"]),
                "padded": padded,
                "resampled": resampled,
            }
            start = time.perf_counter()
            try:
                attacked = apply(marked, spec)
            except (CodecUnavailable, CodecFailure) as exc:
                if cfg.strict_codec:
                    raise
                rows.append({**row, "bit_acc": SKIPPED, "det_score": SKIPPED, "ms": None, "status": str(exc)})
                continue
            res = extract_video(attacked, key)
            ms = (time.perf_counter() - start) * 1000.0
            rows.append(
                {
                    **row,
                    "bit_acc": bit_accuracy(msg, res.message),
                    "det_score": res.detection,
                    "ms": ms if cfg.timing else None,
                    "status": "ok",
                }
            )
    return rows


def _strict_codec_check(cfg: EvalConfig, cells) -> None:
    if cfg.strict_codec and any(c.kind == "ExternalCodec" for c in cells):
        cmd = next(c.params.get("command") for c in cells if c.kind == "ExternalCodec")
        if not codec.available(cmd):
            raise CodecUnavailable("strict mode: no external H.264 encoder available")


def _run_matrix_like(cfg: EvalConfig, kind: str, cells, dims_grid, payloads, settings) -> EvalReport:
    _strict_codec_check(cfg, cells)
    units = _matrix_units(cfg, cells, dims_grid, payloads, settings)
    journal = Journal(cfg.outputs.get("journal"), f"{kind}:{cfg.fingerprint()}")
    _run_units(cfg, units, _matrix_worker, journal)
    rows = _collect(units, journal)
    notes = {
        "padded_cells": sorted({r["method"] for r in rows if r.get("padded")}),
        "resampled": any(r.get("resampled") for r in rows),
        "codec_skipped": sum(1 for r in rows if r["bit_acc"] == SKIPPED),
    }
    return EvalReport(kind, cfg.to_dict(), rows, notes)


def _corpus_dims(cfg: EvalConfig) -> tuple[int, int, int]:
    return (cfg.corpus.t, cfg.corpus.h, cfg.corpus.w)


def run_matrix(cfg: EvalConfig) -> EvalReport:
    """Embed once per (clip, alpha, m), attack with every cell and seed, decode."""
    return _run_matrix_like(cfg, "matrix", cfg.cells(), [_corpus_dims(cfg)], cfg.payload, cfg.settings())


def sweep_alpha(cfg: EvalConfig) -> EvalReport:
    """Accuracy and PSNR per strength setting over the four-distortion panel."""
    settings = cfg.settings()
    if len(settings) < 2:
        raise ConfigInvalid("an alpha sweep needs at least two alpha values or PSNR targets")
    return _run_matrix_like(cfg, "alpha", list(PANEL4), [_corpus_dims(cfg)], cfg.payload[:1], settings)


def sweep_payload(cfg: EvalConfig) -> EvalReport:
    """Accuracy per payload at a tuned PSNR, with chip_len = slots // m."""
    cfg = EvalConfig.from_dict({**cfg.to_dict(), "chip_len": None, "alpha": None})
    for m in cfg.payload:
        key_for(cfg, int(m), (min(cfg.segment_len, cfg.corpus.t), cfg.corpus.h, cfg.corpus.w))
    return _run_matrix_like(cfg, "payload", list(PANEL4), [_corpus_dims(cfg)], cfg.payload, cfg.settings()[:1])


def sweep_dimensions(cfg: EvalConfig) -> EvalReport:
    """Lengths x resolutions grid over the panel; long clips are tiled into segments."""
    grid = [(int(t), int(h), int(w)) for h, w in cfg.resolutions for t in cfg.lengths]
    return _run_matrix_like(cfg, "dims", list(PANEL4), grid, cfg.payload[:1], cfg.settings()[:1])


def panel_mean(report: EvalReport, method: str, payload: int | None = None) -> float:
    """Mean over distortions of the per-distortion mean accuracy (codec cells included when run)."""
    means = [
        a["mean"]
        for a in report.aggregates()
        if a["method"] == method and (payload is None or a["payload"] == payload) and a["mean"] is not None
    ]
    return float(np.mean(means)) if means else float("nan")


# --------------------------------------------------------------------------- editing application


def _editing_units(cfg: EvalConfig) -> list[dict]:
    units = []
    lengths = [int(x) for x in cfg.editing.lengths]
    for trial in range(cfg.editing.trials):
        items = []
        for t_bg in lengths:
            items += [item_id("editing", t_bg, trial, "filtered"), item_id("editing", t_bg, trial, "unfiltered")]
            if cfg.editing.control:
                items += [item_id("control", t_bg, trial, "filtered"), item_id("control", t_bg, trial, "unfiltered")]
        units.append({"trial": trial, "lengths": lengths, "items": items})
    return units


def editing_null(cfg: EvalConfig, key):
    clips = [
        synthetic_clip(derive_seed(cfg.seed, "null-clip", i) % 2**31, key.dims[0], *key.dims[1:])
        for i in range(cfg.editing.null_clips)
    ]
    return calibrate_null(key, clips)


def _editing_worker(cfg_dict: dict, unit: dict, done: list) -> list[dict]:
    cfg = EvalConfig.from_dict(cfg_dict)
    ed = cfg.editing
    m = int(cfg.payload[0])
    key = key_for(cfg, m, (cfg.segment_len, 128, 128))
    if key.null is None:
        key = key.with_null(editing_null(cfg, key))
    trial = unit["trial"]
    h, w = ed.background_hw
    longest = max(unit["lengths"])
    bg_all = synthetic_clip(derive_seed(cfg.seed, "bg", trial) % 2**31, longest, h, w)
    src = synthetic_clip(derive_seed(cfg.seed, "src", trial) % 2**31, ed.source_len, 128, 128)
    msg = Message.random(m, derive_seed(cfg.seed, "msg", trial))
    setting = cfg.settings()[0]
    if setting[0] == "alpha":
        alpha, marked = setting[1], embed_video(src, msg, key, setting[1])
    else:
        alpha, marked, _ = tune_alpha(src, msg, key, setting[1], cfg.psnr_tol)
    quality = {"psnr": psnr(src, marked), "mssim": mssim(src, marked), "tpsnr": tpsnr(src, marked)}
    # One uniform draw per trial, reused for every background length, so lengths share random numbers.
    u = np.random.default_rng(derive_seed(cfg.seed, "insert", trial)).uniform()
    sat_seed = derive_seed(cfg.seed, "saturation", trial)
    rows = []
    for t_bg in unit["lengths"]:
        bg = bg_all[:t_bg]
        seg = key.dims[0]
        insert_at = seg * int(u * ((t_bg - ed.source_len) // seg + 1))
        composite, labels = make_editing_scenario(bg, marked, insert_at, sat_seed)
        scenarios = [("editing", composite, labels)]
        if ed.control:
            scenarios.append(("control", bg, np.zeros(t_bg, dtype=bool)))
        for name, clip, lab in scenarios:
            roi = crop_region(clip, *editing_roi(clip.shape[1:]))
            start = time.perf_counter()
            trace = detect(roi, key, labels=lab)
            filt = decode_filtered(roi, key, trace, ed.threshold)
            ms_f = (time.perf_counter() - start) * 1000.0
            start = time.perf_counter()
            unfilt = decode_unfiltered(roi, key)
            ms_u = (time.perf_counter() - start) * 1000.0
            kept = float(trace.kept(ed.threshold).mean())
            common = {
                "alpha": alpha,
                "payload": m,
                "distortion": "Editing" if name == "editing" else "EditingControl",
                "strength": t_bg,
                "clip": f"trial{trial:03d}",
                "seed": sat_seed,
                **quality,
                "insert_at": insert_at if name == "editing" else None,
                "kept_fraction": kept,
                "iou": iou(localize(trace, ed.threshold), lab),
                "status": "ok",
            }
            rows.append(
                {
                    **common,
                    "item": item_id(name, t_bg, trial, "filtered"),
                    "method": f"{METHOD}+detector",
                    "bit_acc": bit_accuracy(msg, filt.message),
                    "det_score": common["iou"],
                    "ms": ms_f if cfg.timing else None,
                }
            )
            rows.append(
                {
                    **common,
                    "item": item_id(name, t_bg, trial, "unfiltered"),
                    "method": METHOD,
                    "bit_acc": bit_accuracy(msg, unfilt.message),
                    "det_score": None,
                    "ms": ms_u if cfg.timing else None,
                }
            )
    done = set(done)
    return [r for r in rows if r["item"] not in done]


def run_editing_app(cfg: EvalConfig) -> EvalReport:
    """Detector-filtered vs unfiltered decoding of a watermarked patch composited into longer footage.

    The ``det_score`` column of detector rows holds the localization IoU.
    """
    for t_bg in cfg.editing.lengths:
        if int(t_bg) < cfg.editing.source_len:
            raise ConfigInvalid(f"background length {t_bg} is shorter than the inserted source")
    units = _editing_units(cfg)
    journal = Journal(cfg.outputs.get("journal"), f"editing:{cfg.fingerprint()}")
    _run_units(cfg, units, _editing_worker, journal)
    rows = _collect(units, journal)
    return EvalReport("editing", cfg.to_dict(), rows, {"det_score": "localization IoU for detector rows"})


def editing_gaps(report: EvalReport) -> dict[int, float]:
    """Filtered minus unfiltered mean accuracy per background length, in points."""
    out = {}
    for t_bg in sorted({int(r["strength"]) for r in report.rows if r["distortion"] == "Editing"}):
        f = report.mean_accuracy(distortion="Editing", strength=t_bg, method=f"{METHOD}+detector")
        u = report.mean_accuracy(distortion="Editing", strength=t_bg, method=METHOD)
        out[t_bg] = 100.0 * (f - u)
    return out


RUNNERS = {
    "matrix": run_matrix,
    "alpha": sweep_alpha,
    "payload": sweep_payload,
    "dims": sweep_dimensions,
    "editing": run_editing_app,
}
