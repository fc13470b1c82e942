import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from vidmark.bench import (
    CSV_COLUMNS,
    SKIPPED,
    CorpusSpec,
    EvalConfig,
    EvalReport,
    Journal,
    _fmt,
    csv_text,
    derive_seed,
    emit_report,
    load_report,
    panel_mean,
    run_matrix,
    sweep_alpha,
    sweep_payload,
    tune_alpha,
)
from vidmark.corpus import synthetic_clip
from vidmark.distortion import PANEL4
from vidmark.errors import ConfigInvalid, CorpusEmpty, PayloadTooLarge
from vidmark.metrics import psnr
from vidmark.spread import Message, gen_key


def small(**kw):
    base = dict(
        corpus=CorpusSpec(synthetic=3, t=8, h=32, w=32),
        payload=[8],
        chip_len=16,
        alpha=[0.05],
        distortions=[{"kind": "Identity"}, {"kind": "GaussianNoise"}],
    )
    base.update(kw)
    return EvalConfig(**base)


@given(
    repeats=st.integers(1, 20),
    seed=st.integers(0, 2**31),
    alpha=st.none() | st.lists(st.floats(0, 1), min_size=1, max_size=4),
    payload=st.lists(st.integers(1, 512), min_size=1, max_size=3),
    workers=st.integers(1, 8),
    synthetic=st.integers(1, 50),
)
def test_config_json_roundtrip(repeats, seed, alpha, payload, workers, synthetic):
    cfg = EvalConfig(
        corpus=CorpusSpec(synthetic=synthetic), repeats=repeats, seed=seed, alpha=alpha, payload=payload, workers=workers
    )
    back = EvalConfig.loads(cfg.dumps())
    assert back == cfg and back.fingerprint() == cfg.fingerprint()


def test_fingerprint_ignores_workers_and_outputs():
    a = EvalConfig()
    b = EvalConfig(workers=4, outputs={"csv": "x.csv"}, timing=True)
    assert a.fingerprint() == b.fingerprint()
    assert a.fingerprint() != EvalConfig(seed=1).fingerprint()


@pytest.mark.parametrize(
    "bad",
    [
        {"repeats": 0},
        {"payload": []},
        {"alpha": []},
        {"distortions": [{"kind": "Rotate"}]},
        {"distortions": [{"kind": "FrameDrop", "params": {"p": 2}}]},
        {"workers": 0},
        {"nonsense": 1},
    ],
)
def test_invalid_config(bad):
    with pytest.raises(ConfigInvalid):
        EvalConfig.from_dict({**EvalConfig().to_dict(), **bad})


def test_invalid_json_text():
    with pytest.raises(ConfigInvalid):
        EvalConfig.loads("{not json")


def test_strength_grid_expands():
    cfg = EvalConfig(distortions=[{"kind": "FrameDrop", "strengths": [0.1, 0.2, 0.4]}])
    assert [c.strength for c in cfg.cells()] == [0.1, 0.2, 0.4]


def test_empty_corpus(tmp_path):
    with pytest.raises(CorpusEmpty):
        run_matrix(small(corpus=CorpusSpec(paths=[str(tmp_path / "*.y4m")])))


def test_derive_seed_is_stable_and_distinct():
    assert derive_seed(0, 1, "GaussianNoise(std=0.04)", 0) == derive_seed(0, 1, "GaussianNoise(std=0.04)", 0)
    seeds = {derive_seed(0, c, "x", r) for c in range(20) for r in range(10)}
    assert len(seeds) == 200


def test_matrix_is_deterministic_and_byte_identical():
    a, b = run_matrix(small()), run_matrix(small(workers=2))
    assert csv_text(a) == csv_text(b)
    assert len(a.rows) == 3 * 2
    assert csv_text(a).splitlines()[0] == ",".join(CSV_COLUMNS)
    assert all(r["ms"] is None for r in a.rows)


def test_timing_column():
    rep = run_matrix(small(timing=True, corpus=CorpusSpec(synthetic=1, t=8, h=32, w=32)))
    assert all(r["ms"] > 0 for r in rep.rows)


def test_histogram_counts_every_trial():
    cfg = small(corpus=CorpusSpec(synthetic=20, t=8, h=32, w=32), repeats=10, distortions=[{"kind": "GaussianNoise"}])
    agg = run_matrix(cfg).aggregates()
    assert len(agg) == 1
    assert agg[0]["n"] == 200 and sum(agg[0]["histogram"]) == 200
    assert len(agg[0]["histogram"]) == 20


def test_report_roundtrip(tmp_path):
    rep = run_matrix(small())
    csv_path = emit_report(rep, "csv", tmp_path / "r.csv")
    json_path = emit_report(rep, "json", tmp_path / "r.json")
    assert csv_path.read_text() == csv_text(rep)
    data = json.loads(json_path.read_text())
    assert {"ledger", "aggregates", "rows", "config"} <= set(data)
    for loaded in (load_report(csv_path), load_report(json_path)):
        for r0, r1 in zip(rep.rows, loaded.rows):
            assert [_fmt(r0.get(c)) for c in CSV_COLUMNS] == [_fmt(r1.get(c)) for c in CSV_COLUMNS]
    with pytest.raises(ConfigInvalid):
        emit_report(rep, "xml", tmp_path / "r.xml")


def test_journal_resume(tmp_path):
    path = tmp_path / "j.jsonl"
    cfg = small(outputs={"journal": str(path)})
    full = run_matrix(cfg)
    lines = path.read_text().splitlines()
    # Simulate an interruption: keep the header and two rows plus a torn line.
    path.write_text("\n".join(lines[:3]) + "\n" + lines[3][:10])
    resumed = run_matrix(cfg)
    assert csv_text(resumed) == csv_text(full)
    items = [json.loads(line)["item"] for line in path.read_text().splitlines()[1:] if line.startswith('{"item"')]
    assert len(items) == len(set(items)) == len(full.rows)


def test_journal_rejects_other_config(tmp_path):
    path = tmp_path / "j.jsonl"
    Journal(path, "aaa")
    with pytest.raises(ConfigInvalid):
        Journal(path, "bbb")


def test_missing_codec_cells_are_skipped():
    bogus = {"kind": "ExternalCodec", "params": {"crf": 22, "command": "no-such-encoder-xyz {in} {out}"}}
    rep = run_matrix(small(distortions=[{"kind": "Identity"}, bogus]))
    skipped = [r for r in rep.rows if r["distortion"] == "ExternalCodec"]
    assert len(skipped) == 3 and all(r["bit_acc"] == SKIPPED for r in skipped)
    assert rep.notes["codec_skipped"] == 3
    assert "SKIPPED" in csv_text(rep)
    with pytest.raises(Exception) as info:
        run_matrix(small(distortions=[bogus], strict_codec=True))
    assert type(info.value).__name__ == "CodecUnavailable"


def test_padded_lengths_are_flagged():
    rep = run_matrix(small(corpus=CorpusSpec(synthetic=2, t=13, h=64, w=64), chip_len=64))
    assert rep.notes["padded_cells"] and all(r["padded"] for r in rep.rows)
    assert rep.mean_accuracy(distortion="Identity") >= 0.9


def test_payload_too_large():
    with pytest.raises(PayloadTooLarge):
        sweep_payload(small(payload=[10_000]))


def test_alpha_sweep_needs_two_settings():
    with pytest.raises(ConfigInvalid):
        sweep_alpha(small())


def test_tune_alpha_hits_target():
    cover = synthetic_clip(3)
    key = gen_key(7, 96, (8, 128, 128))
    msg = Message.random(96, 1)
    for target in (34.0, 37.0, 40.0):
        alpha, marked, q = tune_alpha(cover, msg, key, target)
        assert abs(q - target) <= 0.05
        assert psnr(cover, marked) == q and alpha > 0


def test_single_alpha_sweep_matches_matrix():
    cfg = small(alpha=[0.04, 0.08], distortions=[{"kind": "Identity"}])
    sweep = sweep_alpha(cfg)
    single = run_matrix(small(alpha=[0.04], distortions=[d.to_dict() for d in PANEL4]))
    assert panel_mean(sweep, "dwt3ss@a0.04") == pytest.approx(panel_mean(single, "dwt3ss@a0.04"))
    assert panel_mean(sweep, "dwt3ss@a0.08") >= panel_mean(sweep, "dwt3ss@a0.04") - 0.05


def test_skipped_rows_excluded_from_aggregates():
    rows = [
        {"method": "x", "payload": 8, "distortion": "D", "strength": 1, "bit_acc": 1.0, "psnr": 40},
        {"method": "x", "payload": 8, "distortion": "D", "strength": 1, "bit_acc": SKIPPED, "psnr": 40},
    ]
    agg = EvalReport("t", {}, rows).aggregates()[0]
    assert agg["n"] == 1 and agg["skipped"] == 1 and agg["mean"] == 1.0
