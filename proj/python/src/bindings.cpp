// Copyright 2026 The S2I Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Python bindings for the main operations. Structured values cross the
// boundary as JSON text; the Python package decodes them.

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "s2i/baseline/builder.hpp"
#include "s2i/baseline/pipeline.hpp"
#include "s2i/core/error.hpp"
#include "s2i/core/json_io.hpp"
#include "s2i/ctc/ctc.hpp"
#include "s2i/dsp/features.hpp"
#include "s2i/dsp/wav.hpp"
#include "s2i/harness/metrics.hpp"
#include "s2i/harness/synth.hpp"
#include "s2i/models/checkpoint.hpp"
#include "s2i/models/intents.hpp"
#include "s2i/models/transcribe.hpp"
#include "s2i/text/ngram.hpp"
#include "s2i/text/vocab.hpp"
#include "s2i/training/experiment.hpp"

namespace py = pybind11;
using namespace s2i;

namespace {

dsp::AudioBuffer to_audio(const py::array_t<double, py::array::c_style | py::array::forcecast>& samples,
                          int sample_rate) {
  if (samples.ndim() != 1) throw InputError("audio must be a one-dimensional array");
  dsp::AudioBuffer a;
  a.samples.assign(samples.data(), samples.data() + samples.size());
  a.sample_rate_hz = sample_rate;
  return a;
}

py::array_t<double> to_numpy(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

dsp::FeatureConfig feature_config(const std::string& json) {
  return json.empty() ? dsp::FeatureConfig{} : models::feature_config_from_json(Json::parse(json));
}

harness::SynthSpec synth_spec(const std::string& json) {
  return json.empty() ? harness::SynthSpec::desk_default() : harness::SynthSpec::from_json(Json::parse(json));
}

// An ASR checkpoint with the vocabularies and optional LM stored beside it.
struct Recognizer {
  models::HctcModel model;
  text::SubwordVocab vocab;
  std::optional<text::NgramLm> lm;
  models::DecodeConfig decode;

  static Recognizer load(const std::string& checkpoint, const std::string& vocab_path, const std::string& lm_path,
                         int beam_width, int n_best, double alpha) {
    Recognizer r{models::load_hctc(checkpoint), text::SubwordVocab::load(vocab_path, text::Level::kLong), {}, {}};
    if (!lm_path.empty()) r.lm = text::NgramLm::read_arpa(lm_path);
    r.decode.beam_width = beam_width;
    r.decode.n_best = n_best;
    r.decode.alpha = alpha;
    return r;
  }

  std::string transcribe(const dsp::AudioBuffer& audio) const {
    return models::transcribe(audio, model, vocab, lm ? &*lm : nullptr, decode).text;
  }
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Speech-to-intent core library";

  // The most recently registered translator is tried first, so the base goes first.
  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<InputError>(m, "InputError", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());
  py::register_exception<TrainingError>(m, "TrainingError", base.ptr());

  m.def("num_intents", [] { return models::kNumIntents; });
  m.def("intent_name", [](int id) { return models::intent_name(id); });
  m.def("intent_id", [](const std::string& name) { return models::intent_id(name); });

  m.def(
      "featurize",
      [](py::array_t<double, py::array::c_style | py::array::forcecast> samples, int sample_rate,
         const std::string& config) { return dsp::featurize(to_audio(samples, sample_rate), feature_config(config)).frames; },
      py::arg("samples"), py::arg("sample_rate") = 16000, py::arg("config_json") = "",
      "Stacked log-mel frames (rows are output steps).");

  m.def("read_wav", [](const std::string& path) {
    const auto a = dsp::read_wav(path);
    return py::make_tuple(to_numpy(a.samples), a.sample_rate_hz);
  });
  m.def("write_wav", [](const std::string& path, py::array_t<double, py::array::c_style | py::array::forcecast> samples,
                        int sample_rate) { dsp::write_wav(path, to_audio(samples, sample_rate)); });

  m.def(
      "ctc_loss",
      [](const Matrix& logprobs, const std::vector<int>& target) {
        auto r = ctc::ctc_loss(logprobs, target);
        return py::make_tuple(r.loss, r.grad);
      },
      py::arg("logprobs"), py::arg("target"), "Negative log-likelihood and its gradient w.r.t. the log-probabilities.");

  m.def(
      "prefix_beam_search",
      [](const Matrix& logprobs, int beam_width, int n_best) {
        py::list out;
        for (const auto& h : ctc::prefix_beam_search(logprobs, {beam_width, n_best}))
          out.append(py::make_tuple(h.ids, h.acoustic_logp));
        return out;
      },
      py::arg("logprobs"), py::arg("beam_width") = 100, py::arg("n_best") = 100);
  m.def("greedy_decode", [](const Matrix& logprobs) { return ctc::greedy_decode(logprobs); });

  m.def("wer", [](const std::string& ref, const std::string& hyp) { return harness::wer(ref, hyp); });
  m.def("corpus_wer", &harness::corpus_wer);
  m.def("intent_metrics_json", [](const std::vector<int>& preds, const std::vector<int>& golds) {
    return harness::intent_metrics(preds, golds).to_json().dump();
  });

  py::enum_<text::Level>(m, "Level")
      .value("char", text::Level::kChar)
      .value("short", text::Level::kShort)
      .value("long", text::Level::kLong);

  py::class_<text::SubwordVocab>(m, "SubwordVocab")
      .def_static(
          "build",
          [](const std::vector<std::string>& corpus, int size, text::Level level) {
            return text::build_vocab(corpus, size, level);
          },
          py::arg("corpus"), py::arg("size"), py::arg("level"))
      .def_static("load", &text::SubwordVocab::load)
      .def("save", &text::SubwordVocab::save)
      .def("__len__", &text::SubwordVocab::size)
      .def("piece", [](const text::SubwordVocab& v, int id) { return v.piece(id).text; })
      .def("segment", [](const text::SubwordVocab& v, const std::string& s) { return text::segment(s, v).ids; })
      .def("detokenize",
           [](const text::SubwordVocab& v, const std::vector<int>& ids) { return text::detokenize(ids, v); });

  m.def(
      "make_records_json",
      [](int n, std::uint64_t seed, const std::vector<double>& noise_levels, const std::string& spec) {
        harness::CorpusOptions o;
        o.n = n;
        o.seed = seed;
        o.noise_levels = noise_levels;
        Json out = Json::array();
        for (const auto& r : harness::make_records(synth_spec(spec), o)) out.push_back(r.to_json());
        return out.dump();
      },
      py::arg("n"), py::arg("seed"), py::arg("noise_levels") = std::vector<double>{0.0}, py::arg("spec_json") = "");
  m.def(
      "synthesize",
      [](const std::string& record, const std::string& spec) {
        const auto spec_v = synth_spec(spec);
        const auto a = harness::synthesize(spec_v, harness::ManifestRecord::from_json(Json::parse(record)));
        return py::make_tuple(to_numpy(a.samples), a.sample_rate_hz);
      },
      py::arg("record_json"), py::arg("spec_json") = "");
  m.def("derive_intent", [](const std::string& transcript) {
    return harness::derive_intent(harness::SynthSpec::desk_default(), transcript);
  });

  py::class_<models::S2IModel>(m, "S2IModel")
      .def_static("load", &models::load_s2i)
      .def("save", [](const models::S2IModel& s, const std::string& path) { models::save_checkpoint(s, path); })
      .def("pool", [](const models::S2IModel& s) { return models::pool_name(s.net.pool); })
      .def(
          "predict",
          [](const models::S2IModel& s, py::array_t<double, py::array::c_style | py::array::forcecast> samples,
             int sample_rate) {
            const auto p = models::predict_intent(to_audio(samples, sample_rate), s);
            return py::make_tuple(p.intent, p.confidence, Eigen::RowVectorXd(p.distribution));
          },
          py::arg("samples"), py::arg("sample_rate") = 16000, "(intent id, confidence, distribution)");

  py::class_<Recognizer>(m, "Recognizer")
      .def_static("load", &Recognizer::load, py::arg("checkpoint"), py::arg("vocab"), py::arg("lm") = "",
                  py::arg("beam_width") = 100, py::arg("n_best") = 100, py::arg("alpha") = 0.5)
      .def(
          "transcribe",
          [](const Recognizer& r, py::array_t<double, py::array::c_style | py::array::forcecast> samples,
             int sample_rate) { return r.transcribe(to_audio(samples, sample_rate)); },
          py::arg("samples"), py::arg("sample_rate") = 16000);

  m.def(
      "run_plan_json",
      [](const std::string& plan, const std::string& run_dir) {
        const auto p = training::ExperimentPlan::from_json(Json::parse(plan));
        std::vector<Json> rows;
        {
          py::gil_scoped_release release;
          rows = training::run_experiment(p, run_dir);
        }
        return Json(rows).dump();
      },
      py::arg("plan_json"), py::arg("run_dir"), "Runs every phase of a plan; returns the ledger rows.");
}
