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

// Information-flow matrices over a settled platform.
//
// ComputeFlowOracle finds flows by experiment: on a private copy of the
// platform, each source realm stamps a marker into every page it can write,
// then every realm and the host look for that marker in everything they can
// read. It never looks at policies or channel bindings.
//
// DeriveFlowMatrix predicts the same matrix from the monitor's own view:
// active channels (writer to reader) and unprotected mappings.

#ifndef MICA_FLOW_ORACLE_H_
#define MICA_FLOW_ORACLE_H_

#include <map>
#include <set>
#include <string>

#include "mica/monitor.h"
#include "mica/relaxed_json.h"

namespace mica {

// Sink id used for the host.
inline constexpr RealmId kHostSink{0};

struct FlowMatrix {
  std::map<RealmId, std::set<RealmId>> edges;  // source -> sinks

  bool Has(RealmId source, RealmId sink) const;
  bool ToHost(RealmId source) const { return Has(source, kHostSink); }
  void Add(RealmId source, RealmId sink) { edges[source].insert(sink); }
  // "a->b" lines for edges in this matrix but not in `other`.
  std::vector<std::string> Difference(const FlowMatrix& other) const;
  json::Value ToJson() const;

  friend bool operator==(const FlowMatrix&, const FlowMatrix&) = default;
};

FlowMatrix ComputeFlowOracle(const Platform& platform);
FlowMatrix DeriveFlowMatrix(const Platform& platform);

}  // namespace mica

#endif  // MICA_FLOW_ORACLE_H_
