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

// Generated topologies: fixed-shape chains for token-size measurements and
// seeded random small deployments for cross-checking the monitor against
// the flow oracle.

#ifndef MICA_TOPOLOGY_H_
#define MICA_TOPOLOGY_H_

#include <cstdint>
#include <vector>

#include "mica/scenario.h"

namespace mica {

// R01 - R02 - ... - Rn, one protected RW channel per adjacent pair, every
// realm uploading. Names and per-neighbour entries are fixed-width so each
// extra realm adds the same number of token bytes.
Scenario ChainScenario(size_t realms);

struct TokenSizeRow {
  size_t realms = 0;
  size_t token_bytes = 0;
  size_t platform_token_bytes = 0;  // of the initiator
  size_t policy_bytes = 0;          // sum over the group
};

// Group-token sizes for chains of 1..max_realms, attested from R01.
StatusOr<std::vector<TokenSizeRow>> ChainTokenSizes(size_t max_realms);

struct RandomTopologyOptions {
  size_t max_realms = 4;
  size_t max_channels = 4;
  // Per-realm probability of each injected policy fault; the gpa shift and
  // window overlap faults use half of it.
  double fault_rate = 0.05;
};

// A random deployment of up to 4 realms and 4 channels with a random upload
// order. Every peer is named by RIM. Identical seeds give identical
// scenarios.
Scenario RandomScenario(uint64_t seed, const RandomTopologyOptions& opts = {});

}  // namespace mica

#endif  // MICA_TOPOLOGY_H_
