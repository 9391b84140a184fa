import json

import numpy as np
import pytest

import fapolar as fp
from fapolar.sim import (
    ChannelModel,
    DecoderSpec,
    FrameDecoder,
    run_point,
    sweep,
    write_csv,
    write_json,
)


def test_channel_sigma_definition():
    channel = ChannelModel(ebn0_db=0.0, rate=0.5)
    assert abs(channel.sigma - 1.0) < 1e-12
    with pytest.raises(ValueError):
        ChannelModel(ebn0_db=1.0, rate=0.0)


def test_noise_variance_within_one_percent():
    rng = np.random.default_rng(0)
    channel = ChannelModel(ebn0_db=1.3, rate=0.5)
    draws = channel.sigma * rng.standard_normal(10 ** 6)
    assert abs(draws.var() / channel.sigma ** 2 - 1.0) < 0.01


def test_decoder_spec_validation():
    with pytest.raises(ValueError):
        DecoderSpec(family="nn")
    with pytest.raises(ValueError):
        DecoderSpec(family="ib")  # LUT decoders need a file
    DecoderSpec(family="llr", schedule="sc")


def test_run_point_deep_waterfall_is_error_free():
    code = fp.construct(64, 24, 8)
    decoder = FrameDecoder(code, DecoderSpec(family="llr", list_size=4))
    point = run_point(code, decoder, ChannelModel(12.0, code.rate),
                      seed=1, max_frames=1000, min_errors=0)
    assert point.frames == 1000
    assert point.block_errors == 0


def test_run_point_reproducible_and_worker_independent():
    code = fp.construct(32, 12, 4)
    decoder = FrameDecoder(code, DecoderSpec(family="llr", list_size=2))
    channel = ChannelModel(1.0, code.rate)
    a = run_point(code, decoder, channel, seed=3, max_frames=512, min_errors=20)
    b = run_point(code, decoder, channel, seed=3, max_frames=512, min_errors=20)
    c = run_point(code, decoder, channel, seed=3, max_frames=512, min_errors=20,
                  workers=2)
    assert (a.frames, a.block_errors) == (b.frames, b.block_errors)
    assert (a.frames, a.block_errors) == (c.frames, c.block_errors)


def test_run_point_stops_on_errors():
    code = fp.construct(32, 12, 4)
    decoder = FrameDecoder(code, DecoderSpec(family="llr", list_size=2))
    point = run_point(code, decoder, ChannelModel(-2.0, code.rate),
                      seed=0, max_frames=10 ** 5, min_errors=30, batch_size=64)
    assert point.block_errors >= 30
    assert point.frames < 10 ** 5
    with pytest.raises(ValueError):
        run_point(code, decoder, ChannelModel(0.0, code.rate), max_frames=0)


def test_bler_estimator_unbiased_on_synthetic_decoder():
    # wrap a decoder that is always right (very high SNR) and inject i.i.d.
    # errors with known probability; the estimate must land within 3 sigma
    code = fp.construct(32, 12, 0)
    p_err = 0.3
    real = FrameDecoder(code, DecoderSpec(family="llr", list_size=1))
    state = {"count": 0}
    flips = np.random.default_rng(99).uniform(size=10 ** 4) < p_err

    def decoder(y, sigma):
        out = real(y, sigma)
        if flips[state["count"] % flips.size]:
            out = out ^ 1
        state["count"] += 1
        return out

    point = run_point(code, decoder, ChannelModel(14.0, code.rate),
                      seed=5, max_frames=4096, min_errors=0)
    sigma_hat = np.sqrt(p_err * (1 - p_err) / point.frames)
    assert abs(point.bler - p_err) < 3 * sigma_hat


def test_sweep_csv_and_json_deterministic(tmp_path):
    code = fp.construct(32, 12, 4)
    spec = DecoderSpec(family="llr", schedule="fast", list_size=2)
    result = sweep(code, spec, [0.0, 2.0, 4.0], seed=11, max_frames=256,
                   min_errors=10)
    assert len(result.points) == 3
    csv_a, csv_b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_csv(result, csv_a)
    write_csv(sweep(code, spec, [0.0, 2.0, 4.0], seed=11, max_frames=256,
                    min_errors=10), csv_b)
    assert csv_a.read_bytes() == csv_b.read_bytes()
    json_path = tmp_path / "a.json"
    write_json(result, json_path)
    doc = json.loads(json_path.read_text())
    assert doc["config_hash"] == result.config_hash
    assert len(doc["points"]) == 3


def test_sweep_statistical_sanity_decreasing_bler():
    code = fp.construct(64, 24, 8)
    spec = DecoderSpec(family="llr", list_size=4)
    result = sweep(code, spec, [0.0, 2.0, 4.0], seed=2, max_frames=4000,
                   min_errors=100)
    blers = [p.bler for p in result.points]
    assert all(p.block_errors >= 100 or p.frames == 4000 for p in result.points)
    assert blers[0] > blers[1] > blers[2]


def test_empty_node_list_equals_sc_schedule():
    code = fp.construct(64, 24, 8)
    fast_none = FrameDecoder(code, DecoderSpec(family="llr", schedule="fast",
                                               list_size=4, node_kinds=""))
    plain_sc = FrameDecoder(code, DecoderSpec(family="llr", schedule="sc",
                                              list_size=4))
    assert fast_none.tree.leaf_count == code.block_len
    channel = ChannelModel(2.0, code.rate)
    a = run_point(code, fast_none, channel, seed=21, max_frames=512, min_errors=0)
    b = run_point(code, plain_sc, channel, seed=21, max_frames=512, min_errors=0)
    assert (a.frames, a.block_errors) == (b.frames, b.block_errors)


def test_frame_decoder_lut_roundtrip(tmp_path):
    from fapolar.lutdesign import design_lutset, save_lutset

    code = fp.construct(32, 12, 4)
    tree = fp.build_tree(code)
    lutset = design_lutset(code, tree, "msib", 1.0, 4)
    path = tmp_path / "lut.json"
    save_lutset(lutset, path)
    spec = DecoderSpec(family="msib", schedule="fast", list_size=4,
                       lut_path=str(path))
    decoder = FrameDecoder(code, spec)
    point = run_point(code, decoder, ChannelModel(10.0, code.rate),
                      seed=0, max_frames=128, min_errors=0)
    assert point.block_errors == 0
    with pytest.raises(ValueError):
        FrameDecoder(code, DecoderSpec(family="ib", schedule="fast",
                                       lut_path=str(path)))
