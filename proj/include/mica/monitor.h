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

// The platform: simulated physical memory, the realm manager and the
// monitor's RMI/RSI surface with policy upload, validation, channel
// activation and the exit filter.
//
// A Platform is a plain value. Copying it yields an independent platform,
// which the flow oracle uses to run what-if experiments.

#ifndef MICA_MONITOR_H_
#define MICA_MONITOR_H_

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "mica/common.h"
#include "mica/event_log.h"
#include "mica/granule_space.h"
#include "mica/policy.h"
#include "mica/realm.h"
#include "mica/sgt.h"
#include "mica/signer.h"

namespace mica {

struct Viewer {
  bool host = true;
  RealmId realm;

  static Viewer Host() { return Viewer{}; }
  static Viewer Of(RealmId r) { return Viewer{false, r}; }
};

struct ExitEvent {
  RealmId realm;
  TransType kind = TransType::kCall;
  uint64_t id = 0;
  std::vector<uint64_t> payload;
};

struct FilterVerdict {
  FilterAction action = FilterAction::kBlock;
  std::optional<std::vector<uint64_t>> delivered;
};

// What the host observes after the filter.
struct HostEvent {
  RealmId realm;
  TransType kind = TransType::kCall;
  uint64_t id = 0;
  FilterAction action = FilterAction::kAllow;
  std::vector<uint64_t> payload;
};

// The exception event that is never fully blocked.
inline constexpr uint64_t kPreemptionEventId = 0;

enum class ValidationFailure : uint8_t {
  kNone,
  kMalformedPolicy,
  kAmbiguousPeer,
  kSizeMismatch,
  kDuplicatePa,
  kRightsEscalation,
  kRightsExceedAny,
  kGpaMismatch,
  kStrictViolation,
  kGatewayViolation,
  kMissingSharedMarking,
  kUndeclaredSharedMapping,
  kAnyExhausted,
};
std::string_view ValidationFailureName(ValidationFailure f);

struct PeerResolution {
  RealmId owner;         // whose policy names the peer
  std::string local_id;  // the name used in that policy
  RealmId peer;

  friend bool operator==(const PeerResolution&,
                         const PeerResolution&) = default;
};

struct AnyAdmission {
  RealmId owner;
  std::string channel;  // owner's channel name
  RealmId member;
  Rights requested;  // the member's self prot on the channel

  friend bool operator==(const AnyAdmission&, const AnyAdmission&) = default;
};

// A compatible pair of realms sharing one channel.
struct ChannelEdge {
  RealmId a, b;
  std::string channel_a, channel_b;
};

struct ValidationReport {
  ValidationFailure failure = ValidationFailure::kNone;
  std::string detail;
  // Unprotected IPAs not covered by any declared channel; unmapped on commit.
  std::vector<uint64_t> unmap_ipas;
  // The uploader's channel bindings.
  std::vector<ChannelBinding> bindings;
  // New peer resolutions, for the uploader and for the realms it meets.
  std::vector<PeerResolution> resolutions;
  std::vector<AnyAdmission> any_admissions;
  std::vector<ChannelEdge> edges;
  // Uploader channels that are active once the policy commits.
  std::vector<std::string> active_channels;

  bool ok() const { return failure == ValidationFailure::kNone; }
};

// Runtime view of one protected channel, derived from committed bindings
// and the SGT.
struct ChannelRuntime {
  std::string name;
  std::vector<GranuleId> pas;
  std::set<RealmId> peers;  // live realms validated on every backing row
  int64_t any_remaining = 0;
  bool active = false;
};

struct PlatformConfig {
  uint64_t granule_count = kDefaultGranuleCount;
  uint64_t private_ipa_base = kPrivateIpaBase;
  std::string identity = "mica-sim-platform";
  std::shared_ptr<const Signer> signer;  // defaults to a fixed-seed signer
};

class Platform {
 public:
  explicit Platform(PlatformConfig config = {});

  // --- granule space -------------------------------------------------------
  Status DelegateGranule(GranuleId g);
  Status UndelegateGranule(GranuleId g);
  // Fault (as an error code) when the tag or RTT rights deny the access.
  StatusOr<Bytes> ReadAs(GranuleId g, Viewer viewer) const;
  Status WriteAs(GranuleId g, Viewer viewer, uint64_t offset,
                 std::span<const uint8_t> data);

  // --- realm manager -------------------------------------------------------
  // Errors: GranuleNotDelegated, ImageTooLarge, InvalidArgument.
  StatusOr<RealmId> CreateRealm(std::span<const uint8_t> image,
                                std::span<const GranuleId> private_granules);
  Status ExtendRem(RealmId r, const Digest& value);
  // Idempotent. Zeroes and undelegates private and PD granules, drops the
  // realm from the SGT and releases rows nobody maps any more.
  void TerminateRealm(RealmId r, std::string reason = {});

  // --- realm and host memory accesses --------------------------------------
  StatusOr<Bytes> RealmRead(RealmId r, uint64_t ipa, size_t len) const;
  Status RealmWrite(RealmId r, uint64_t ipa, std::span<const uint8_t> data);
  StatusOr<Bytes> HostRead(GranuleId g, uint64_t offset, size_t len) const;
  Status HostWrite(GranuleId g, uint64_t offset, std::span<const uint8_t> data);

  // --- RMI -----------------------------------------------------------------
  Status RmiRealmPd(RealmId r, GranuleId g);
  Status RmiSgt(GranuleId g);
  Status RmiDataCreateUnknownShared(RealmId r, GranuleId g, uint64_t ipa);
  Status RmiMapUnprotected(RealmId r, GranuleId g, uint64_t ipa, Rights rights);
  Status RmiRttUnmap(RealmId r, uint64_t ipa);

  // --- RSI -----------------------------------------------------------------
  // Terminates the realm on decode or validation failure; the returned
  // status then carries RealmTerminated-class information (BadBlob or
  // ValidationFailed). SecondUpload, NoPd and BadAddress leave it running.
  Status RsiUploadPolicy(RealmId r, uint64_t blob_ipa);
  // Pure: what an upload of `p` by `r` would conclude right now.
  ValidationReport ValidatePolicy(RealmId r, const PolicyConfig& p) const;
  // Admission of `member` through the ANY mapping of `owner`'s channel.
  // Errors: AnyExhausted, RightsExceedAny, InvalidArgument.
  Status ConnectAny(RealmId owner, std::string_view channel, RealmId member,
                    Rights requested);
  FilterVerdict RealmExit(const ExitEvent& e);

  // Group attestation (implemented in attestation.cc).
  StatusOr<size_t> RsiAttestTokenInitGroup(RealmId r, const Digest& nonce);
  StatusOr<size_t> RsiAttestTokenContinueGroup(RealmId r, uint64_t buffer_ipa,
                                               size_t max);
  // Realms reachable from `r` over active channels, sorted by gid.
  std::vector<RealmId> GroupOf(RealmId r) const;
  Bytes BuildGroupToken(RealmId r, const Digest& nonce) const;

  // --- queries -------------------------------------------------------------
  const PlatformConfig& config() const { return config_; }
  const GranuleSpace& granules() const { return space_; }
  const SharedGranuleTable& sgt() const { return sgt_; }
  const Realm* realm(RealmId r) const;
  std::vector<RealmId> realm_ids() const;
  std::optional<RealmId> FindRealm(uint64_t gid) const;
  const EventLog& log() const { return log_; }
  const std::vector<HostEvent>& host_events() const { return host_events_; }
  const Signer& signer() const { return *config_.signer; }
  const ValidationReport* last_report(RealmId r) const;

  // Rights a realm currently holds through an RTT entry.
  Rights EffectiveRights(RealmId r, const RttEntry& e) const;
  // True when at least two live realms are validated on the row.
  bool RowActive(GranuleId pa) const;
  // Every distinct protected channel among committed realms.
  std::vector<ChannelRuntime> Channels() const;

 private:
  Realm* mutable_realm(RealmId r);
  StatusOr<Realm*> LiveRealm(RealmId r);
  Status CheckHostMayRemap(RealmId r, const Realm** out);
  const RttEntry* Translate(const Realm& realm, uint64_t ipa) const;
  void Commit(Realm* realm, const PolicyConfig& p, const Bytes& blob,
              const ValidationReport& report);

  PlatformConfig config_;
  GranuleSpace space_;
  SharedGranuleTable sgt_;
  std::map<RealmId, Realm> realms_;
  std::map<RealmId, ValidationReport> reports_;
  uint64_t next_gid_ = 1;
  EventLog log_;
  std::vector<HostEvent> host_events_;
};

}  // namespace mica

#endif  // MICA_MONITOR_H_
