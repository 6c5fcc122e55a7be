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

// Platform tokens and MICA group tokens, plus the group token verifier.
// Byte layouts are documented in docs/token-format.md.

#ifndef MICA_ATTESTATION_H_
#define MICA_ATTESTATION_H_

#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "mica/common.h"
#include "mica/policy.h"
#include "mica/signer.h"

namespace mica {

inline constexpr char kPlatformTokenMagic[8] = {'M', 'I', 'C', 'A',
                                                'P', 'L', 'T', '1'};
inline constexpr char kGroupTokenMagic[8] = {'M', 'I', 'C', 'A',
                                             'G', 'R', 'P', '1'};
inline constexpr uint8_t kGroupTokenVersion = 1;

struct PlatformToken {
  uint64_t gid = 0;
  Digest rim{};
  Digest rem{};
  std::string identity;
  Digest nonce{};
  std::string algorithm;  // digest algorithm of rim/rem
  Bytes signature;

  // The signed portion: everything but the signature.
  Bytes SignedBytes() const;
  Bytes Encode() const;
  static StatusOr<PlatformToken> Decode(std::span<const uint8_t> bytes);
};

PlatformToken MakePlatformToken(uint64_t gid, const Digest& rim,
                                const Digest& rem, std::string identity,
                                const Digest& nonce, const Signer& signer);

struct ChannelFlag {
  std::string name;
  uint64_t key = 0;  // pa of the first backing granule; shared by all peers
  bool active = false;

  friend bool operator==(const ChannelFlag&, const ChannelFlag&) = default;
};

struct GroupRecord {
  uint64_t gid = 0;
  bool committed = false;
  Digest rem_base{};  // REM before the policy digest was folded in
  Bytes platform_token;
  Bytes policy_blob;
  std::vector<ChannelFlag> channels;
};

struct GroupToken {
  std::string algorithm;
  Digest nonce{};
  std::vector<GroupRecord> records;
  Digest group_digest{};
  std::string signer_algorithm;
  Bytes signature;

  // Digest over the nonce and every encoded record.
  Digest ComputeDigest() const;
  Bytes Encode() const;
  static StatusOr<GroupToken> Decode(std::span<const uint8_t> bytes);
};

// Signs and encodes; records must already be sorted by gid.
Bytes SealGroupToken(GroupToken token, const Signer& signer);

struct VerifiedRealm {
  uint64_t gid = 0;
  Digest rim{};
  Digest rem{};
  bool committed = false;
  std::optional<PolicyConfig> policy;
};

struct VerifiedChannel {
  uint64_t key = 0;
  std::set<std::string> names;
  std::set<uint64_t> members;
  bool active = false;
};

struct VerifiedGroup {
  Digest nonce{};
  std::vector<VerifiedRealm> realms;
  std::vector<VerifiedChannel> channels;
};

// Errors, in check order: MalformedToken, DigestMismatch, BadSignature,
// NonceMismatch, InconsistentActivity.
StatusOr<VerifiedGroup> VerifyGroupToken(std::span<const uint8_t> token,
                                         const Signer& anchor,
                                         const Digest& expected_nonce);

}  // namespace mica

#endif  // MICA_ATTESTATION_H_
