# Copyright 2026 The S2I Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import math

import numpy as np
import pytest

import s2i


def test_intents():
    assert s2i.num_intents() == 28
    for i in range(s2i.num_intents()):
        assert s2i.intent_id(s2i.intent_name(i)) == i


def test_ctc_loss_matches_closed_form():
    lp = np.log(np.full((2, 2), 0.5))
    loss, grad = s2i.ctc_loss(lp, [0])
    assert math.isclose(loss, -math.log(0.75), rel_tol=1e-12)
    assert grad.shape == (2, 2)
    with pytest.raises(s2i.InputError):
        s2i.ctc_loss(np.log(np.full((1, 2), 0.5)), [0, 0])


def test_beam_search_orders_hypotheses():
    rng = np.random.default_rng(0)
    z = rng.normal(size=(3, 3))
    lp = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    hyps = s2i.prefix_beam_search(lp, beam_width=50, n_best=50)
    scores = [s for _, s in hyps]
    assert scores == sorted(scores, reverse=True)
    assert math.isclose(sum(math.exp(s) for s in scores), 1.0, rel_tol=1e-9)


def test_wer_and_metrics():
    assert s2i.wer("a b c", "a c") == pytest.approx(1 / 3)
    m = s2i.intent_metrics([1, 2, 2], [1, 2, 3])
    assert m["all"]["accuracy"] == pytest.approx(2 / 3)


def test_synthesis_featurize_and_vocab(tmp_path):
    records = s2i.make_records(4, seed=7, noise_levels=[0.0, 1.0])
    assert len(records) == 4
    samples, rate = s2i.synthesize(records[0])
    assert rate == 16000 and samples.ndim == 1 and samples.size > 0
    path = str(tmp_path / "a.wav")
    s2i.write_wav(path, samples, rate)
    back, rate_back = s2i.read_wav(path)
    assert rate_back == rate and back.size == samples.size
    frames = s2i.featurize(samples, rate)
    assert frames.shape[1] == 400 and frames.shape[0] > 0

    texts = [r["transcript"] for r in s2i.make_records(50, seed=3) if r["transcript"]]
    vocab = s2i.SubwordVocab.build(texts, 40, s2i.Level.short)
    ids = vocab.segment(texts[0])
    assert vocab.detokenize(ids) == texts[0]


def test_run_plan_and_prediction(tmp_path):
    plan = {
        "name": "py",
        "seed": 1,
        "features": {"n_mels": 8},
        "model": {"feature_dim": 40, "block_layers": [1, 1, 1], "hidden": 6, "heads": 2, "vocab_sizes": [30, 40, 50]},
        "decode": {"beam_width": 4, "n_best": 4},
        "data": {"asr_train": 20, "v1": 20, "pool": 10, "test_per_level": 4, "test_noise": [0.0]},
        "phases": [
            {"phase": "asr_pretrain", "epochs": 1, "batch_audio_minutes": 0.1},
            {"phase": "s2i_v1", "epochs": 1, "batch_audio_minutes": 0.1},
        ],
    }
    rows = s2i.run_plan(plan, tmp_path)
    assert [r["phase"] for r in rows] == ["asr_pretrain", "s2i_v1"]

    model = s2i.S2IModel.load(str(tmp_path / "checkpoints" / "s2i_v1.ckpt"))
    samples, rate = s2i.synthesize(s2i.make_records(1, seed=5)[0])
    intent, conf, dist = model.predict(samples, rate)
    assert 0 <= intent < 28 and 0.0 <= conf <= 1.0
    assert dist.sum() == pytest.approx(1.0)

    rec = s2i.Recognizer.load(
        str(tmp_path / "checkpoints" / "asr_pretrain.ckpt"),
        str(tmp_path / "checkpoints" / "vocab_long.tsv"),
        str(tmp_path / "checkpoints" / "lm.arpa"),
        beam_width=4,
        n_best=4,
    )
    assert isinstance(rec.transcribe(samples, rate), str)

    with pytest.raises(s2i.ConfigError):
        s2i.run_plan({"phases": [{"epochs": 1}]}, tmp_path / "bad")
