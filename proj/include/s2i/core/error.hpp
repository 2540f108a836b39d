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

#pragma once

#include <stdexcept>
#include <string>

namespace s2i {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad caller input: short audio, non-finite samples, invalid ids.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent or out-of-range configuration values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed files: checkpoints, WAV, vocab, ARPA, manifests.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Training diverged or could not proceed.
class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace s2i
