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

#include "mica/event_log.h"

namespace mica {

void EventLog::Append(std::string call, std::optional<RealmId> realm,
                      json::Value args, const Status& result) {
  Append(std::move(call), realm, std::move(args),
         result.ok() ? std::string("ok") : result.ToString());
}

void EventLog::Append(std::string call, std::optional<RealmId> realm,
                      json::Value args, std::string result) {
  auto rec = std::make_shared<EventRecord>();
  rec->seq = records_.size();
  rec->call = std::move(call);
  rec->realm = realm;
  rec->args = std::move(args);
  rec->result = std::move(result);
  records_.push_back(std::move(rec));
}

std::string EventLog::ToJsonLines() const {
  std::string out;
  for (const auto& rec : records_) {
    const EventRecord& r = *rec;
    json::Value line = json::Value::Object();
    line.Add("seq", json::Value::Int(static_cast<int64_t>(r.seq)));
    line.Add("call", json::Value::String(r.call));
    if (r.realm) {
      line.Add("realm", json::Value::Int(static_cast<int64_t>(r.realm->gid)));
    }
    line.Add("args", r.args);
    line.Add("result", json::Value::String(r.result));
    out += json::Dump(line);
    out += '\n';
  }
  return out;
}

}  // namespace mica
