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

// Policy documents: the peers a realm talks to, its memory channels and its
// control-flow channels, together with the canonical MICAPOL1 binary form
// stored in the policy descriptor granule.
//
// The SELF keyword is resolved to the document's Self local id during
// parsing, so a PolicyConfig only ever names peers by local id (or ANY).
// Every PolicyConfig produced by ParsePolicy or DecodePolicy is canonical:
// peers sorted by local id, channels by name, mappings by peer with ANY
// last, and event ranges sorted without duplicates.

#ifndef MICA_POLICY_H_
#define MICA_POLICY_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mica/common.h"
#include "mica/relaxed_json.h"

namespace mica {

inline constexpr char kPolicyMagic[8] = {'M', 'I', 'C', 'A',
                                         'P', 'O', 'L', '1'};
inline constexpr uint8_t kPolicyVersion = 1;
// One PD granule holds the whole blob.
inline constexpr size_t kPolicyBudget = kGranuleSize;
inline constexpr size_t kMaxLocalIdLength = 16;
inline constexpr size_t kMaxChannelNameLength = 32;

enum class ChannelType : uint8_t { kProtected = 0, kUnprotected = 1 };
enum class TransType : uint8_t { kCall = 0, kException = 1 };
enum class FilterAction : uint8_t { kAllow = 0, kScrub = 1, kBlock = 2 };

std::string_view ChannelTypeName(ChannelType t);
std::string_view TransTypeName(TransType t);
std::string_view FilterActionName(FilterAction a);

struct PeerSpec {
  std::string local_id;
  std::optional<Digest> expected_rim;
  bool is_gateway = false;
  bool strict = false;

  friend bool operator==(const PeerSpec&, const PeerSpec&) = default;
};

struct MappingSpec {
  bool any = false;
  std::string who;  // local id; empty when `any`
  std::optional<uint64_t> gpa;
  Rights prot;
  int64_t count = 0;  // ANY only; negative means unlimited

  friend bool operator==(const MappingSpec&, const MappingSpec&) = default;
};

struct MemChannelSpec {
  std::string name;
  uint64_t size = 0;
  ChannelType type = ChannelType::kProtected;
  std::vector<MappingSpec> mappings;

  const MappingSpec* FindMapping(std::string_view local_id) const;
  const MappingSpec* FindAny() const;
  uint64_t granules() const { return size / kGranuleSize; }

  friend bool operator==(const MemChannelSpec&,
                         const MemChannelSpec&) = default;
};

struct TransChannelSpec {
  std::string name;
  std::string owner;
  TransType type = TransType::kCall;
  std::vector<uint64_t> range;
  FilterAction action = FilterAction::kBlock;

  bool Covers(uint64_t id) const;

  friend bool operator==(const TransChannelSpec&,
                         const TransChannelSpec&) = default;
};

struct PolicyConfig {
  std::string self_id;
  std::vector<PeerSpec> peers;
  std::vector<MemChannelSpec> mem_channels;
  std::vector<TransChannelSpec> trans_channels;

  const PeerSpec* FindPeer(std::string_view local_id) const;
  const PeerSpec* self() const { return FindPeer(self_id); }
  const MemChannelSpec* FindMemChannel(std::string_view name) const;
  // The self mapping of `ch`, or nullptr for a channel that only describes
  // other peers.
  const MappingSpec* SelfMapping(const MemChannelSpec& ch) const {
    return ch.FindMapping(self_id);
  }
  // True when the owner of this document holds any unprotected mapping or an
  // Allow policy for explicit calls; only gateways may.
  bool HoldsGatewayCapabilities() const;

  friend bool operator==(const PolicyConfig&, const PolicyConfig&) = default;
};

// Sorts every list into canonical order.
void Canonicalize(PolicyConfig* p);

// kAuthoring also rejects a non-gateway Self that holds gateway
// capabilities. kAsUploaded skips that rule: the monitor reports it as a
// gateway violation and terminates the uploader.
enum class StructureCheck : uint8_t { kAuthoring, kAsUploaded };

// Structural invariants shared by the text parser and the monitor's
// validator: Self is a declared peer, references resolve, sizes and
// addresses are granule-aligned, ranges are non-empty and disjoint per
// (owner, type).
Status CheckPolicyStructure(const PolicyConfig& p,
                            StructureCheck mode = StructureCheck::kAuthoring);

// Parses the human-readable document.
// Errors: SyntaxError, SchemaError, DuplicatePeer, DuplicateMapping,
// EmptyRange.
StatusOr<PolicyConfig> ParsePolicy(std::string_view text);
StatusOr<PolicyConfig> PolicyFromJson(
    const json::Value& doc, StructureCheck mode = StructureCheck::kAuthoring);

// Renders a document that ParsePolicy reads back to an equal PolicyConfig.
json::Value PolicyToJson(const PolicyConfig& p);
std::string PolicyToText(const PolicyConfig& p);

// MICAPOL1 encoding. PolicyTooLarge past `budget` bytes.
StatusOr<Bytes> EncodePolicy(const PolicyConfig& p,
                             size_t budget = kPolicyBudget);
// The content of a freshly designated PD: no peers, no channels.
Bytes EncodeEmptyPolicy();

struct DecodedPolicy {
  PolicyConfig config;
  size_t consumed = 0;
};
// Decodes a blob possibly followed by unrelated bytes.
StatusOr<DecodedPolicy> DecodePolicyPrefix(std::span<const uint8_t> blob);
// Errors: BadMagic, BadVersion, TruncatedBlob, BadBlob (malformed content or
// trailing bytes).
StatusOr<PolicyConfig> DecodePolicy(std::span<const uint8_t> blob);

Digest PolicyDigest(std::span<const uint8_t> blob);

}  // namespace mica

#endif  // MICA_POLICY_H_
