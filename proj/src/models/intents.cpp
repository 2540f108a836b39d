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

#include "s2i/models/intents.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "s2i/core/error.hpp"

namespace s2i::models {

namespace {

const std::array<std::string, kNumIntents>& names() {
  static const std::array<std::string, kNumIntents> kNames{
      "Return",        "Refund",         "Order Status",   "Cancel Order",  "Delivery Time",
      "Payment Issue", "Exchange",       "Wrong Item",     "Damaged Item",  "Missing Item",
      "Address Change", "Account Login", "Coupon",         "Cash On Delivery", "EMI Options",
      "Warranty",      "Installation",   "Track Package",  "Seller Contact", "Price Drop",
      "Out Of Stock",  "Invoice",        "Gift Card",      "Membership",    "Language Change",
      "Talk To Agent", "Others",         "Blank"};
  return kNames;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

const std::string& intent_name(int id) {
  if (id < 0 || id >= kNumIntents) throw InputError("intent id out of range: " + std::to_string(id));
  return names()[id];
}

int intent_id(std::string_view name) {
  const std::string key = lower(name);
  for (int i = 0; i < kNumIntents; ++i)
    if (lower(names()[i]) == key) return i;
  throw InputError("unknown intent: " + std::string(name));
}

}  // namespace s2i::models
