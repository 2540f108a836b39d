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

#include "s2i/core/json_io.hpp"

#include <fstream>

#include "s2i/core/error.hpp"

namespace s2i {

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& value) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path);
  out << value.dump(2) << '\n';
}

std::vector<Json> read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  std::vector<Json> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(Json::parse(line));
    } catch (const Json::exception& e) {
      throw FormatError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void write_jsonl(const std::string& path, const std::vector<Json>& records) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path);
  for (const auto& r : records) out << r.dump() << '\n';
}

void append_jsonl(const std::string& path, const Json& record) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw FormatError("cannot append to " + path);
  out << record.dump() << '\n';
}

}  // namespace s2i
