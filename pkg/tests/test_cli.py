import json

import pytest

from vidmark.bench import CorpusSpec, EvalConfig
from vidmark.cli import EXIT_CODEC, EXIT_CONFIG, EXIT_FAIL, EXIT_OK, main
from vidmark.corpus import synthetic_clip
from vidmark.io import save_clip


@pytest.fixture
def work(tmp_path):
    save_clip(synthetic_clip(1, 16, 32, 32), tmp_path / "in.y4m")
    code = main(["keygen", "--seed", "3", "--m", "8", "--dims", "8", "32", "32", "--chip-len", "16",
                 "--null-clips", "20", "--out", str(tmp_path / "key.json")])
    assert code == EXIT_OK
    return tmp_path


def _last_json(capsys):
    return json.loads(capsys.readouterr().out.strip().splitlines()[-1])


def test_embed_extract_roundtrip(work, capsys):
    assert main(["embed", str(work / "in.y4m"), str(work / "wm.y4m"), "--key", str(work / "key.json"),
                 "--message", "10110010", "--psnr", "40"]) == EXIT_OK
    assert abs(_last_json(capsys)["psnr_db"] - 40) <= 0.05
    assert main(["extract", str(work / "wm.y4m"), "--key", str(work / "key.json"), "--expect", "10110010"]) == EXIT_OK
    out = _last_json(capsys)
    assert out["message"] == "10110010" and out["bit_acc"] == 1.0


def test_attack_and_detect(work, capsys):
    main(["embed", str(work / "in.y4m"), str(work / "wm.y4m"), "--key", str(work / "key.json"), "--alpha", "0.08"])
    capsys.readouterr()
    assert main(["attack", str(work / "wm.y4m"), str(work / "n.y4m"), "--kind", "GaussianNoise",
                 "--strength", "0.02", "--seed", "4"]) == EXIT_OK
    assert _last_json(capsys)["params"]["std"] == 0.02
    assert main(["detect", str(work / "wm.y4m"), "--key", str(work / "key.json")]) == EXIT_OK
    out = _last_json(capsys)
    assert len(out["scores"]) == 16


def test_calibrate_writes_null(work, capsys):
    out = work / "key2.json"
    assert main(["calibrate", "--key", str(work / "key.json"), "--synthetic", "20", "--out", str(out)]) == EXIT_OK
    assert _last_json(capsys)["n"] == 20
    assert "null" in json.loads(out.read_text())


def test_eval_and_report(tmp_path, capsys):
    cfg = EvalConfig(corpus=CorpusSpec(synthetic=2, t=8, h=32, w=32), payload=[8], chip_len=16, alpha=[0.05],
                     distortions=[{"kind": "Identity"}])
    cfg.save(tmp_path / "cfg.json")
    csv_path = tmp_path / "r.csv"
    assert main(["eval", "matrix", "--config", str(tmp_path / "cfg.json"), "--csv", str(csv_path)]) == EXIT_OK
    assert "Identity" in capsys.readouterr().out
    assert main(["report", str(csv_path), "--histogram", "--json", str(tmp_path / "r.json")]) == EXIT_OK
    assert json.loads((tmp_path / "r.json").read_text())["rows"]
    capsys.readouterr()
    assert main(["eval", "alpha", "--dump-config", "--alpha", "0.02,0.04"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["alpha"] == [0.02, 0.04]


def test_exit_codes(work, tmp_path, capsys):
    (tmp_path / "bad.json").write_text('{"repeats": 0}')
    assert main(["eval", "matrix", "--config", str(tmp_path / "bad.json")]) == EXIT_CONFIG
    assert main(["attack", str(work / "in.y4m"), str(work / "o.y4m"), "--kind", "FrameDrop", "--strength", "3"]) == EXIT_CONFIG
    assert main(["embed", str(work / "in.y4m"), str(work / "o.y4m"), "--key", str(work / "key.json"),
                 "--message", "101"]) == EXIT_CONFIG
    cfg = EvalConfig(corpus=CorpusSpec(synthetic=1, t=8, h=32, w=32), payload=[8], chip_len=16, alpha=[0.05],
                     strict_codec=True,
                     distortions=[{"kind": "ExternalCodec", "params": {"command": "no-such-encoder-xyz {in} {out}"}}])
    cfg.save(tmp_path / "codec.json")
    assert main(["eval", "matrix", "--config", str(tmp_path / "codec.json")]) == EXIT_CODEC
    assert main(["extract", str(tmp_path / "missing.y4m"), "--key", str(work / "key.json")]) == EXIT_FAIL
    capsys.readouterr()
