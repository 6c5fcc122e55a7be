// Copyright 2026 The MICA Simulator Authors.
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

// A tolerant JSON reader for hand-written policy and scenario files.
//
// Accepted beyond strict JSON: hexadecimal integers (0x...), trailing commas,
// missing commas between object members or array items, and // line
// comments. Object members keep their source order and duplicate keys are
// preserved so that schema checks can report them precisely.

#ifndef MICA_RELAXED_JSON_H_
#define MICA_RELAXED_JSON_H_

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mica/common.h"

namespace mica::json {

struct Value {
  enum class Kind { kNull, kBool, kInt, kString, kArray, kObject };

  Kind kind = Kind::kNull;
  bool boolean = false;
  int64_t integer = 0;
  std::string str;
  std::vector<Value> items;
  std::vector<std::pair<std::string, Value>> members;
  int line = 0;

  bool is_object() const { return kind == Kind::kObject; }
  bool is_array() const { return kind == Kind::kArray; }
  bool is_string() const { return kind == Kind::kString; }
  bool is_int() const { return kind == Kind::kInt; }
  bool is_bool() const { return kind == Kind::kBool; }

  // First member with the given key, or nullptr.
  const Value* Find(std::string_view key) const;

  static Value Int(int64_t v);
  static Value String(std::string s);
  static Value Bool(bool b);
  static Value Object();
  static Value Array();
  Value& Add(std::string key, Value v);
  Value& Push(Value v);
};

// SyntaxError carries "line N: ..." in its message.
StatusOr<Value> Parse(std::string_view text);

// Compact strict-JSON rendering (integers in decimal).
std::string Dump(const Value& v);
// Indented rendering with two-space steps.
std::string DumpPretty(const Value& v);

}  // namespace mica::json

#endif  // MICA_RELAXED_JSON_H_
