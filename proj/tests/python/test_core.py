# SPDX-License-Identifier: Apache-2.0
import json
import math

import numpy as np
import pytest

import csiforge as cf


def reference_config(snr_db=30.0):
    c = cf.SimConfig()
    c.carrier_hz = 3.5e9
    c.subcarrier_spacing_hz = 30e3
    c.snr_db = snr_db
    c.speed_kmh = 30.0
    c.n_tx, c.n_rx = 4, 2
    c.n_groups, c.group_size = 100, 12
    c.pilot_symbols = [2, 5, 8, 11]
    return c


def test_simulate_and_estimate():
    cfg = reference_config(0.0)
    chan = cf.generate_channel(cfg, 1, 7)
    obs = cf.transmit_pilots(cfg, chan, 0, 8)
    assert obs.h_tilde.shape == (4, 100, 4, 2)
    assert obs.z_tilde.shape == (800, 4, 2)
    res = cf.run_pipeline(obs)
    rec = res["record"]
    assert rec["K"] == 1200
    assert rec["R_f"].shape == (100, 100)
    assert rec["W_hat"].shape == (4, rec["R_hat"])
    truth = chan.pilot_response(0)
    assert cf.channel_mse(res["h_hat"], truth) < cf.channel_mse(res["h_raw"], truth)


def test_genie_override():
    cfg = reference_config()
    chan = cf.generate_channel(cfg, 2, 1, doppler_width_hz=200.0)
    assert chan.genie_w == 200.0
    assert chan.n_slots == 2


def test_estimators():
    assert cf.min_circular_cover([0, 1, 15], 16) == (15, 1, 3)
    rng = np.random.default_rng(0)
    z = (rng.standard_normal((5000, 4, 2)) + 1j * rng.standard_normal((5000, 4, 2))) / math.sqrt(2)
    cn = cf.estimate_noise_covariance(z)
    assert np.linalg.norm(cn - np.eye(2)) < 0.05
    grid = cf.default_doppler_grid()
    assert len(grid) == 64 and grid[0] == pytest.approx(1.0) and grid[-1] == pytest.approx(1200.0)


def test_precoding():
    books = cf.dft_codebook(4, 2)
    assert len(books) == 6
    assert all(abs(np.linalg.norm(w) - 1.0) < 1e-12 for w in books)
    cs = np.outer(books[0][:, 0], books[0][:, 0].conj()) * 100.0
    cs = cs * 4.0 + 1e-6 * np.eye(4)
    sel = cf.select_rank(cs, 2)
    assert sel["rank"] == 1
    assert sel["per_rank_index"][0] == 0


def test_tokenization_helpers():
    assert cf.choose_patch_size(100, 100) == (16, 16)
    assert cf.choose_patch_size(4, 4) == (8, 8)
    enc = cf.fourier_encode(0.3)
    assert enc.shape == (64,) and enc.dtype == np.float32
    assert np.all(np.abs(enc) <= 1.0)
    m = (np.arange(100 * 100).reshape(100, 100) % 7).astype(complex) + 0.5j
    payload, pad, pos = cf.patchify(m, 16, 16)
    assert payload.shape == (49, 512)
    back = cf.depatchify(payload, pos, 16, 16, 100, 100)
    assert np.allclose(back, m)
    assert pad[-1].sum() == 2 * (256 - 16)
    schema = cf.feature_schema()
    assert cf.TOKENS_PER_SLOT == 59
    assert len(schema["features"]) == 11


def test_dataset_round_trip(tmp_path):
    ds = tmp_path / "ds"
    man = cf.generate_dataset(ds, num_configs=1, seed=5, snr_draws=2, slots=10, threads=1)
    assert man["counts"]["total"] == 4
    assert cf.read_manifest(ds)["manifest_digest"] == man["manifest_digest"]
    seqs = cf.read_shard(ds / man["shards"][0]["path"])
    assert len(seqs) == 4
    assert len(seqs[0]["records"]) == 5
    stats = cf.compute_norm_stats(ds, "train")
    on_disk = json.loads((ds / "norm_stats.json").read_text())
    assert stats["digest"] == on_disk["digest"]
    report = cf.baseline_report(ds)
    assert "denoising" in report

    summary = cf.tokenize(ds, tmp_path / "tok", mode="pretrain", mask_seed=3)
    assert summary["tokens"] == 4 * 295
    ex = cf.read_token_export(tmp_path / "tok")
    assert ex["masked"].shape == (4 * 295,)
    assert int(ex["masked"].sum()) == summary["masked_tokens"]
    assert ex["payload"].size == summary["payload_floats"]
    assert np.all(ex["payload"][ex["pad"] == 1] == 0.0)
    assert ex["index"]["schema_digest"] == cf.schema_digest()


def test_errors(tmp_path):
    with pytest.raises(cf.ShardError):
        cf.read_manifest(tmp_path / "missing")
    bad = tmp_path / "bad.csfd"
    bad.write_bytes(b"XXXX\x01\x00\x00\x00\x00\x00")
    with pytest.raises(cf.ShardError):
        cf.read_shard(bad)
    with pytest.raises(ValueError):
        cf.generate_dataset(tmp_path / "x", num_configs=0)
    with pytest.raises(ValueError):
        cf.tokenize(tmp_path, tmp_path / "y", mode="forecast")
