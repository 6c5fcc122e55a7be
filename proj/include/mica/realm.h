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

// Realm descriptors: lifecycle state, the stage-2 mapping table (RTT),
// measurements and the committed policy with its channel bindings.

#ifndef MICA_REALM_H_
#define MICA_REALM_H_

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mica/common.h"
#include "mica/policy.h"

namespace mica {

enum class RealmState : uint8_t {
  kNew,
  kActive,
  kLockedDown,
  kPolicyCommitted,
  kTerminated,
};
std::string_view RealmStateName(RealmState s);

enum class MappingKind : uint8_t { kPrivate, kProtectedShared, kUnprotected };
std::string_view MappingKindName(MappingKind k);

// For protected-shared entries `rights` holds what the committed policy
// granted. The entry is only usable while the backing SGT row is active.
struct RttEntry {
  uint64_t ipa = 0;
  GranuleId pa;
  Rights rights;
  MappingKind kind = MappingKind::kPrivate;

  friend bool operator==(const RttEntry&, const RttEntry&) = default;
};

// A committed memory channel of one realm: the IPA window its self mapping
// covers and the pas backing it, in IPA order.
struct ChannelBinding {
  std::string name;
  ChannelType type = ChannelType::kProtected;
  uint64_t ipa_base = 0;
  std::vector<GranuleId> pas;
  Rights rights;  // the self mapping's prot

  uint64_t size() const { return pas.size() * kGranuleSize; }
  friend bool operator==(const ChannelBinding&,
                         const ChannelBinding&) = default;
};

struct Realm {
  RealmId id;
  RealmState state = RealmState::kNew;
  Digest rim{};
  Digest rem{};
  // REM as it was right before the policy digest was folded in.
  Digest rem_base{};
  std::optional<GranuleId> pd;
  std::optional<PolicyConfig> policy;
  Bytes policy_blob;
  // Keyed by ipa. Mutate through Map/Unmap so the pa index stays in sync.
  std::map<uint64_t, RttEntry> rtt;
  std::map<GranuleId, uint64_t> pa_index;
  std::vector<ChannelBinding> bindings;
  // Resolved peers of the committed policy: local id -> realm. Permanent.
  std::map<std::string, RealmId> peer_bindings;
  // Per ANY-bearing channel: remaining admissions and realms admitted.
  std::map<std::string, int64_t> any_remaining;
  std::map<std::string, std::set<RealmId>> any_members;
  std::string termination_reason;

  // Staged group attestation token and read cursor.
  Bytes staged_token;
  size_t staged_cursor = 0;
  bool has_staged_token = false;

  bool alive() const { return state != RealmState::kTerminated; }
  bool committed() const { return state == RealmState::kPolicyCommitted; }
  bool locked() const {
    return state == RealmState::kLockedDown ||
           state == RealmState::kPolicyCommitted;
  }
  const ChannelBinding* FindBinding(std::string_view name) const;
  const ChannelBinding* BindingForPa(GranuleId pa) const;
  const RttEntry* FindByPa(GranuleId pa) const;
  void Map(const RttEntry& e);
  void Unmap(uint64_t ipa);
  void ClearRtt();
  std::vector<GranuleId> PrivatePas() const;
};

}  // namespace mica

#endif  // MICA_REALM_H_
