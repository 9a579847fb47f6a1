import json
import math
import os
import subprocess

import pytest

import mimovlc


def test_constellation_roundtrip():
    pts = mimovlc.constellation_points(16)
    assert len(pts) == 16
    assert sum(abs(p) ** 2 for p in pts) / 16 == pytest.approx(1.0)
    bits = [1, 0, 1, 1, 0, 0, 1, 0]
    assert mimovlc.demap_symbols(mimovlc.map_bits(bits, 16), 16) == bits


def test_closed_forms():
    assert mimovlc.predict_ber(4, 10.0) == pytest.approx(7.827011290012748e-4, rel=1e-12)
    assert mimovlc.ber_bound(4, 0.0) == pytest.approx(0.2)
    t = mimovlc.mode_thresholds()
    assert t[4] < t[16] < t[64] < t[256]
    assert mimovlc.encode_mode("SM-64") == 0b010
    assert mimovlc.decode_mode(7) == "SD-256"


def test_errors_surface():
    with pytest.raises(mimovlc.Error):
        mimovlc.constellation_points(8)
    with pytest.raises(mimovlc.Error):
        mimovlc.run_link({"no_such_key": 1})


def test_run_link_report():
    cfg = {"policy": "sm16", "frames": 3, "warmup_frames": 0}
    r = mimovlc.run_link(cfg, 40.0, 2)
    assert r["bit_errors"] == 0
    assert r["dominant_mode"] == "SM-16"
    assert r == mimovlc.run_link(cfg, 40.0, 2)


def test_sweep_csv_rows():
    cfg = {"policy": "sd4", "frames": 2, "warmup_frames": 0, "axis": {"snr_db": [0, 10]}}
    lines = mimovlc.sweep_csv(cfg).strip().splitlines()
    assert lines[0].startswith("distance_m,snr_db,mode")
    assert len(lines) == 3


@pytest.mark.skipif("MIMOVLC_CLI" not in os.environ, reason="CLI path not provided")
def test_cli_run_matches_binding(tmp_path):
    cfg = {"policy": "sm4", "frames": 2, "warmup_frames": 0, "axis": {"snr_db": [15]}}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    out = subprocess.run(
        [os.environ["MIMOVLC_CLI"], "run", "--config", str(path), "--seed", "4"],
        check=True,
        capture_output=True,
        text=True,
    ).stdout
    cli, lib = json.loads(out), mimovlc.run_link(cfg, 15, 4)
    # --seed rewrites the seed list in the echoed configuration.
    assert cli.pop("config")["seeds"] == [4]
    lib.pop("config")
    assert cli == lib
    bad = subprocess.run([os.environ["MIMOVLC_CLI"], "run", "--config", str(tmp_path / "missing.json")],
                         capture_output=True, text=True)
    assert bad.returncode == 2
    assert json.loads(bad.stderr.splitlines()[-1])["error"] == "io"
