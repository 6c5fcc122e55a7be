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

// Structured monitor call log: one record per RMI/RSI call or filter
// verdict, serialized as line-delimited JSON.

#ifndef MICA_EVENT_LOG_H_
#define MICA_EVENT_LOG_H_

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mica/common.h"
#include "mica/relaxed_json.h"

namespace mica {

struct EventRecord {
  uint64_t seq = 0;
  std::string call;
  std::optional<RealmId> realm;
  json::Value args;
  std::string result;
};

class EventLog {
 public:
  void Append(std::string call, std::optional<RealmId> realm, json::Value args,
              const Status& result);
  void Append(std::string call, std::optional<RealmId> realm, json::Value args,
              std::string result);

  const EventRecord& at(size_t i) const { return *records_[i]; }
  size_t size() const { return records_.size(); }
  // One compact JSON object per line, keys in a fixed order.
  std::string ToJsonLines() const;

 private:
  // Records are immutable once appended, so copies of a log share them.
  std::vector<std::shared_ptr<const EventRecord>> records_;
};

}  // namespace mica

#endif  // MICA_EVENT_LOG_H_
