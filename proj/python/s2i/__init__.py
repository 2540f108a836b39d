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

"""Speech-to-intent models, the text pipeline baseline and their training loops."""

import json

from . import _core
from ._core import (
    ConfigError,
    Error,
    FormatError,
    InputError,
    Level,
    Recognizer,
    S2IModel,
    SubwordVocab,
    TrainingError,
    corpus_wer,
    ctc_loss,
    derive_intent,
    featurize,
    greedy_decode,
    intent_id,
    intent_name,
    num_intents,
    prefix_beam_search,
    read_wav,
    wer,
    write_wav,
)

__all__ = [
    "ConfigError",
    "Error",
    "FormatError",
    "InputError",
    "Level",
    "Recognizer",
    "S2IModel",
    "SubwordVocab",
    "TrainingError",
    "corpus_wer",
    "ctc_loss",
    "derive_intent",
    "featurize",
    "greedy_decode",
    "intent_id",
    "intent_metrics",
    "intent_name",
    "make_records",
    "num_intents",
    "prefix_beam_search",
    "read_wav",
    "run_plan",
    "synthesize",
    "wer",
    "write_wav",
]


def intent_metrics(preds, golds):
    """Accuracy and F1 (weighted, macro, micro) over all items and with blank/other removed."""
    return json.loads(_core.intent_metrics_json(list(preds), list(golds)))


def make_records(n, seed, noise_levels=(0.0,), spec=None):
    """Synthetic manifest records as dictionaries."""
    return json.loads(_core.make_records_json(n, seed, list(noise_levels), json.dumps(spec) if spec else ""))


def synthesize(record, spec=None):
    """Renders one record to (samples, sample_rate)."""
    return _core.synthesize(json.dumps(record), json.dumps(spec) if spec else "")


def run_plan(plan, run_dir):
    """Runs an experiment plan (a dict) under run_dir and returns its ledger rows."""
    return json.loads(_core.run_plan_json(json.dumps(plan), str(run_dir)))
