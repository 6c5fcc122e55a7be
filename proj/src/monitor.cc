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

#include "mica/monitor.h"

#include <algorithm>
#include <deque>

#include "mica/digest.h"

namespace mica {
namespace {

json::Value Hex(uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "0x%llx", static_cast<unsigned long long>(v));
  return json::Value::String(buf);
}

json::Value Args() { return json::Value::Object(); }

}  // namespace

std::string_view RealmStateName(RealmState s) {
  switch (s) {
    case RealmState::kNew: return "New";
    case RealmState::kActive: return "Active";
    case RealmState::kLockedDown: return "LockedDown";
    case RealmState::kPolicyCommitted: return "PolicyCommitted";
    case RealmState::kTerminated: return "Terminated";
  }
  return "?";
}

std::string_view MappingKindName(MappingKind k) {
  switch (k) {
    case MappingKind::kPrivate: return "Private";
    case MappingKind::kProtectedShared: return "ProtectedShared";
    case MappingKind::kUnprotected: return "Unprotected";
  }
  return "?";
}

const ChannelBinding* Realm::FindBinding(std::string_view name) const {
  for (const auto& b : bindings) {
    if (b.name == name) return &b;
  }
  return nullptr;
}

const ChannelBinding* Realm::BindingForPa(GranuleId pa) const {
  for (const auto& b : bindings) {
    if (std::find(b.pas.begin(), b.pas.end(), pa) != b.pas.end()) return &b;
  }
  return nullptr;
}

const RttEntry* Realm::FindByPa(GranuleId pa) const {
  auto it = pa_index.find(pa);
  return it == pa_index.end() ? nullptr : &rtt.at(it->second);
}

void Realm::Map(const RttEntry& e) {
  rtt[e.ipa] = e;
  pa_index[e.pa] = e.ipa;
}

void Realm::Unmap(uint64_t ipa) {
  auto it = rtt.find(ipa);
  if (it == rtt.end()) return;
  pa_index.erase(it->second.pa);
  rtt.erase(it);
}

void Realm::ClearRtt() {
  rtt.clear();
  pa_index.clear();
}

std::vector<GranuleId> Realm::PrivatePas() const {
  std::vector<GranuleId> out;
  for (const auto& [ipa, e] : rtt) {
    if (e.kind == MappingKind::kPrivate) out.push_back(e.pa);
  }
  return out;
}

std::string_view ValidationFailureName(ValidationFailure f) {
  switch (f) {
    case ValidationFailure::kNone: return "None";
    case ValidationFailure::kMalformedPolicy: return "MalformedPolicy";
    case ValidationFailure::kAmbiguousPeer: return "AmbiguousPeer";
    case ValidationFailure::kSizeMismatch: return "SizeMismatch";
    case ValidationFailure::kDuplicatePa: return "DuplicatePa";
    case ValidationFailure::kRightsEscalation: return "RightsEscalation";
    case ValidationFailure::kRightsExceedAny: return "RightsExceedAny";
    case ValidationFailure::kGpaMismatch: return "GpaMismatch";
    case ValidationFailure::kStrictViolation: return "StrictViolation";
    case ValidationFailure::kGatewayViolation: return "GatewayViolation";
    case ValidationFailure::kMissingSharedMarking: return "MissingSharedMarking";
    case ValidationFailure::kUndeclaredSharedMapping:
      return "UndeclaredSharedMapping";
    case ValidationFailure::kAnyExhausted: return "AnyExhausted";
  }
  return "?";
}

Platform::Platform(PlatformConfig config)
    : config_(std::move(config)), space_(config_.granule_count) {
  if (config_.signer == nullptr) {
    config_.signer = KeyedDigestSigner::FromSeed("mica-default");
  }
}

const Realm* Platform::realm(RealmId r) const {
  auto it = realms_.find(r);
  return it == realms_.end() ? nullptr : &it->second;
}

Realm* Platform::mutable_realm(RealmId r) {
  auto it = realms_.find(r);
  return it == realms_.end() ? nullptr : &it->second;
}

std::vector<RealmId> Platform::realm_ids() const {
  std::vector<RealmId> ids;
  for (const auto& [id, realm] : realms_) ids.push_back(id);
  return ids;
}

std::optional<RealmId> Platform::FindRealm(uint64_t gid) const {
  if (realms_.count(RealmId{gid}) == 0) return std::nullopt;
  return RealmId{gid};
}

const ValidationReport* Platform::last_report(RealmId r) const {
  auto it = reports_.find(r);
  return it == reports_.end() ? nullptr : &it->second;
}

StatusOr<Realm*> Platform::LiveRealm(RealmId r) {
  Realm* realm = mutable_realm(r);
  if (realm == nullptr) return Error(ErrorCode::kNoSuchRealm);
  if (!realm->alive()) return Error(ErrorCode::kRealmTerminated);
  return realm;
}

// --- granule space ----------------------------------------------------------

Status Platform::DelegateGranule(GranuleId g) {
  Status st = space_.Delegate(g);
  json::Value a = Args();
  a.Add("granule", Hex(g.pa));
  log_.Append("RMI_GRANULE_DELEGATE", std::nullopt, std::move(a), st);
  return st;
}

Status Platform::UndelegateGranule(GranuleId g) {
  Status st = space_.Undelegate(g);
  json::Value a = Args();
  a.Add("granule", Hex(g.pa));
  log_.Append("RMI_GRANULE_UNDELEGATE", std::nullopt, std::move(a), st);
  return st;
}

StatusOr<Bytes> Platform::ReadAs(GranuleId g, Viewer viewer) const {
  MICA_RETURN_IF_ERROR(space_.Check(g));
  if (viewer.host) {
    if (!IsHostAccessible(space_.tag(g))) return Error(ErrorCode::kFault);
    return space_.ReadPage(g);
  }
  const Realm* realm = this->realm(viewer.realm);
  if (realm == nullptr) return Error(ErrorCode::kNoSuchRealm);
  const RttEntry* e = realm->FindByPa(g);
  if (e == nullptr || !EffectiveRights(realm->id, *e).can_read()) {
    return Error(ErrorCode::kFault);
  }
  return space_.ReadPage(g);
}

Status Platform::WriteAs(GranuleId g, Viewer viewer, uint64_t offset,
                         std::span<const uint8_t> data) {
  MICA_RETURN_IF_ERROR(space_.Check(g));
  if (offset + data.size() > kGranuleSize) {
    return Error(ErrorCode::kInvalidArgument, "write crosses granule end");
  }
  if (viewer.host) return HostWrite(g, offset, data);
  const Realm* realm = this->realm(viewer.realm);
  if (realm == nullptr) return Error(ErrorCode::kNoSuchRealm);
  const RttEntry* e = realm->FindByPa(g);
  if (e == nullptr || !EffectiveRights(realm->id, *e).can_write()) {
    return Error(ErrorCode::kFault);
  }
  space_.Write(g, offset, data);
  return Status::Ok();
}

// --- realm manager ----------------------------------------------------------

StatusOr<RealmId> Platform::CreateRealm(
    std::span<const uint8_t> image, std::span<const GranuleId> private_granules) {
  auto fail = [&](Status st) {
    json::Value a = Args();
    a.Add("image_bytes", json::Value::Int(static_cast<int64_t>(image.size())));
    a.Add("granules",
          json::Value::Int(static_cast<int64_t>(private_granules.size())));
    log_.Append("CREATE_REALM", std::nullopt, std::move(a), st);
    return st;
  };
  std::set<GranuleId> seen;
  for (GranuleId g : private_granules) {
    if (Status st = space_.Check(g); !st.ok()) return fail(st);
    if (space_.tag(g) != GranuleTag::kDelegated) {
      return fail(Error(ErrorCode::kGranuleNotDelegated,
                        std::string(GranuleTagName(space_.tag(g)))));
    }
    if (!seen.insert(g).second) {
      return fail(Error(ErrorCode::kInvalidArgument, "granule listed twice"));
    }
  }
  if (image.size() > private_granules.size() * kGranuleSize) {
    return fail(Error(ErrorCode::kImageTooLarge));
  }

  Realm realm;
  realm.id = RealmId{next_gid_++};
  realm.state = RealmState::kNew;
  Sha256Builder rim;
  rim.Update("MICA-RIM-v1");
  rim.UpdateU64(config_.private_ipa_base);
  rim.UpdateU64(private_granules.size());
  rim.UpdateU64(image.size());
  rim.Update(image);
  for (size_t i = 0; i < private_granules.size(); ++i) {
    GranuleId g = private_granules[i];
    uint64_t ipa = config_.private_ipa_base + i * kGranuleSize;
    space_.Retag(g, GranuleTag::kRealmPrivate);
    size_t off = i * kGranuleSize;
    if (off < image.size()) {
      size_t n = std::min<size_t>(kGranuleSize, image.size() - off);
      space_.Write(g, 0, image.subspan(off, n));
    }
    realm.Map(RttEntry{ipa, g, Rights::RWX(), MappingKind::kPrivate});
    rim.UpdateU64(ipa);
    rim.UpdateU64(static_cast<uint64_t>(MappingKind::kPrivate));
  }
  realm.rim = rim.Finish();
  realm.state = RealmState::kActive;
  RealmId id = realm.id;
  realms_.emplace(id, std::move(realm));

  json::Value a = Args();
  a.Add("image_bytes", json::Value::Int(static_cast<int64_t>(image.size())));
  a.Add("granules",
        json::Value::Int(static_cast<int64_t>(private_granules.size())));
  a.Add("rim", json::Value::String(HexEncode(realms_.at(id).rim)));
  log_.Append("CREATE_REALM", id, std::move(a), Status::Ok());
  return id;
}

Status Platform::ExtendRem(RealmId r, const Digest& value) {
  Status st;
  if (auto realm = LiveRealm(r); !realm.ok()) {
    st = realm.status();
  } else if ((*realm)->committed()) {
    // REM is frozen once the policy digest has been folded in.
    st = Error(ErrorCode::kBadRealmState, "measurements frozen after commit");
  } else {
    (*realm)->rem = ExtendMeasurement((*realm)->rem, value);
  }
  json::Value a = Args();
  a.Add("value", json::Value::String(HexEncode(value)));
  log_.Append("RSI_MEASUREMENT_EXTEND", r, std::move(a), st);
  return st;
}

void Platform::TerminateRealm(RealmId r, std::string reason) {
  Realm* realm = mutable_realm(r);
  if (realm == nullptr || !realm->alive()) return;
  for (const auto& [ipa, e] : realm->rtt) {
    if (e.kind == MappingKind::kPrivate) space_.Release(e.pa);
  }
  if (realm->pd) space_.Release(*realm->pd);
  for (GranuleId pa : sgt_.RemoveRealm(r)) space_.Release(pa);
  sgt_.Flush(&space_);
  realm->ClearRtt();
  realm->bindings.clear();
  realm->policy.reset();
  realm->policy_blob.clear();
  realm->pd.reset();
  realm->staged_token.clear();
  realm->has_staged_token = false;
  realm->state = RealmState::kTerminated;
  realm->termination_reason = reason;
  json::Value a = Args();
  if (!reason.empty()) a.Add("reason", json::Value::String(reason));
  log_.Append("TERMINATE_REALM", r, std::move(a), Status::Ok());
}

// --- memory accesses --------------------------------------------------------

const RttEntry* Platform::Translate(const Realm& realm, uint64_t ipa) const {
  auto it = realm.rtt.find(ipa - ipa % kGranuleSize);
  return it == realm.rtt.end() ? nullptr : &it->second;
}

Rights Platform::EffectiveRights(RealmId r, const RttEntry& e) const {
  const Realm* realm = this->realm(r);
  if (realm == nullptr || !realm->alive()) return Rights::None();
  switch (e.kind) {
    case MappingKind::kPrivate:
    case MappingKind::kUnprotected:
      return e.rights;
    case MappingKind::kProtectedShared: {
      const SgtRow* row = sgt_.Find(e.pa);
      if (row == nullptr || row->ValidatedCount() < 2) return Rights::None();
      const SgtEntry* mine = row->Find(r);
      if (mine == nullptr || !mine->validated) return Rights::None();
      return mine->granted;
    }
  }
  return Rights::None();
}

bool Platform::RowActive(GranuleId pa) const {
  const SgtRow* row = sgt_.Find(pa);
  return row != nullptr && row->ValidatedCount() >= 2;
}

StatusOr<Bytes> Platform::RealmRead(RealmId r, uint64_t ipa, size_t len) const {
  const Realm* realm = this->realm(r);
  if (realm == nullptr) return Error(ErrorCode::kNoSuchRealm);
  Bytes out(len);
  size_t done = 0;
  while (done < len) {
    uint64_t at = ipa + done;
    const RttEntry* e = Translate(*realm, at);
    if (e == nullptr || !EffectiveRights(r, *e).can_read()) {
      return Error(ErrorCode::kFault);
    }
    uint64_t off = at % kGranuleSize;
    size_t n = std::min<size_t>(len - done, kGranuleSize - off);
    space_.Read(e->pa, off, std::span<uint8_t>(out.data() + done, n));
    done += n;
  }
  return out;
}

Status Platform::RealmWrite(RealmId r, uint64_t ipa,
                            std::span<const uint8_t> data) {
  const Realm* realm = this->realm(r);
  if (realm == nullptr) return Error(ErrorCode::kNoSuchRealm);
  // Check the whole range first so a faulting write changes nothing.
  for (uint64_t at = ipa - ipa % kGranuleSize; at < ipa + data.size();
       at += kGranuleSize) {
    const RttEntry* e = Translate(*realm, at);
    if (e == nullptr || !EffectiveRights(r, *e).can_write()) {
      return Error(ErrorCode::kFault);
    }
  }
  size_t done = 0;
  while (done < data.size()) {
    uint64_t at = ipa + done;
    const RttEntry* e = Translate(*realm, at);
    uint64_t off = at % kGranuleSize;
    size_t n = std::min<size_t>(data.size() - done, kGranuleSize - off);
    space_.Write(e->pa, off, data.subspan(done, n));
    done += n;
  }
  return Status::Ok();
}

StatusOr<Bytes> Platform::HostRead(GranuleId g, uint64_t offset,
                                   size_t len) const {
  MICA_RETURN_IF_ERROR(space_.Check(g));
  if (offset + len > kGranuleSize) {
    return Error(ErrorCode::kInvalidArgument, "read crosses granule end");
  }
  if (!IsHostAccessible(space_.tag(g))) return Error(ErrorCode::kFault);
  Bytes out(len);
  space_.Read(g, offset, out);
  return out;
}

Status Platform::HostWrite(GranuleId g, uint64_t offset,
                           std::span<const uint8_t> data) {
  MICA_RETURN_IF_ERROR(space_.Check(g));
  if (offset + data.size() > kGranuleSize) {
    return Error(ErrorCode::kInvalidArgument, "write crosses granule end");
  }
  if (!IsHostAccessible(space_.tag(g))) return Error(ErrorCode::kFault);
  space_.Write(g, offset, data);
  return Status::Ok();
}

// --- RMI --------------------------------------------------------------------

Status Platform::CheckHostMayRemap(RealmId r, const Realm** out) {
  auto realm = LiveRealm(r);
  if (!realm.ok()) return realm.status();
  if ((*realm)->locked()) return Error(ErrorCode::kLockedDown);
  *out = *realm;
  return Status::Ok();
}

Status Platform::RmiRealmPd(RealmId r, GranuleId g) {
  auto run = [&]() -> Status {
    const Realm* ro;
    MICA_RETURN_IF_ERROR(CheckHostMayRemap(r, &ro));
    if (ro->pd) return Error(ErrorCode::kPdAlreadySet);
    MICA_RETURN_IF_ERROR(space_.Check(g));
    if (space_.tag(g) != GranuleTag::kDelegated) {
      return Error(ErrorCode::kGranuleNotDelegated,
                   std::string(GranuleTagName(space_.tag(g))));
    }
    space_.Retag(g, GranuleTag::kPd);
    space_.Write(g, 0, EncodeEmptyPolicy());
    mutable_realm(r)->pd = g;
    return Status::Ok();
  };
  Status st = run();
  json::Value a = Args();
  a.Add("granule", Hex(g.pa));
  log_.Append("RMI_REALM_PD", r, std::move(a), st);
  return st;
}

Status Platform::RmiSgt(GranuleId g) {
  auto run = [&]() -> Status {
    MICA_RETURN_IF_ERROR(space_.Check(g));
    if (space_.tag(g) != GranuleTag::kDelegated) {
      return Error(ErrorCode::kGranuleNotDelegated,
                   std::string(GranuleTagName(space_.tag(g))));
    }
    space_.Retag(g, GranuleTag::kSgt);
    sgt_.AddStorage(g);
    return Status::Ok();
  };
  Status st = run();
  json::Value a = Args();
  a.Add("granule", Hex(g.pa));
  log_.Append("RMI_SGT", std::nullopt, std::move(a), st);
  return st;
}

Status Platform::RmiDataCreateUnknownShared(RealmId r, GranuleId g,
                                            uint64_t ipa) {
  auto run = [&]() -> Status {
    const Realm* ro;
    MICA_RETURN_IF_ERROR(CheckHostMayRemap(r, &ro));
    MICA_RETURN_IF_ERROR(space_.Check(g));
    if (!IsGranuleAligned(ipa)) {
      return Error(ErrorCode::kInvalidArgument, "unaligned ipa");
    }
    if (ro->rtt.count(ipa) != 0) return Error(ErrorCode::kIpaOccupied);
    GranuleTag tag = space_.tag(g);
    if (tag != GranuleTag::kDelegated && tag != GranuleTag::kProtectedShared) {
      return Error(ErrorCode::kGranuleNotDelegated,
                   std::string(GranuleTagName(tag)));
    }
    if (ro->FindByPa(g) != nullptr) return Error(ErrorCode::kAliasedInRealm);
    MICA_RETURN_IF_ERROR(sgt_.AddEntry(g, SgtEntry{r, ipa, Rights::None(), false}));
    if (tag == GranuleTag::kDelegated) {
      space_.Retag(g, GranuleTag::kProtectedShared);
    }
    mutable_realm(r)->Map(
        RttEntry{ipa, g, Rights::None(), MappingKind::kProtectedShared});
    sgt_.Flush(&space_);
    return Status::Ok();
  };
  Status st = run();
  json::Value a = Args();
  a.Add("granule", Hex(g.pa));
  a.Add("ipa", Hex(ipa));
  log_.Append("RMI_DATA_CREATE_UNKNOWN_SHARED", r, std::move(a), st);
  return st;
}

Status Platform::RmiMapUnprotected(RealmId r, GranuleId g, uint64_t ipa,
                                   Rights rights) {
  auto run = [&]() -> Status {
    const Realm* ro;
    MICA_RETURN_IF_ERROR(CheckHostMayRemap(r, &ro));
    MICA_RETURN_IF_ERROR(space_.Check(g));
    if (!IsGranuleAligned(ipa)) {
      return Error(ErrorCode::kInvalidArgument, "unaligned ipa");
    }
    if (rights.empty()) return Error(ErrorCode::kInvalidArgument, "no rights");
    if (ro->rtt.count(ipa) != 0) return Error(ErrorCode::kIpaOccupied);
    if (ro->FindByPa(g) != nullptr) return Error(ErrorCode::kAliasedInRealm);
    GranuleTag tag = space_.tag(g);
    if (tag != GranuleTag::kNormalUndelegated &&
        tag != GranuleTag::kUnprotected) {
      return Error(ErrorCode::kInvalidArgument,
                   "granule is " + std::string(GranuleTagName(tag)));
    }
    space_.Retag(g, GranuleTag::kUnprotected);
    mutable_realm(r)->Map(RttEntry{ipa, g, rights, MappingKind::kUnprotected});
    return Status::Ok();
  };
  Status st = run();
  json::Value a = Args();
  a.Add("granule", Hex(g.pa));
  a.Add("ipa", Hex(ipa));
  a.Add("rights", json::Value::String(rights.ToString()));
  log_.Append("RMI_MAP_UNPROTECTED", r, std::move(a), st);
  return st;
}

Status Platform::RmiRttUnmap(RealmId r, uint64_t ipa) {
  auto run = [&]() -> Status {
    const Realm* ro;
    MICA_RETURN_IF_ERROR(CheckHostMayRemap(r, &ro));
    auto it = ro->rtt.find(ipa);
    if (it == ro->rtt.end()) return Error(ErrorCode::kInvalidArgument, "unmapped");
    if (it->second.kind != MappingKind::kUnprotected) {
      return Error(ErrorCode::kInvalidArgument,
                   "only unprotected entries can be unmapped by the host");
    }
    mutable_realm(r)->Unmap(ipa);
    return Status::Ok();
  };
  Status st = run();
  json::Value a = Args();
  a.Add("ipa", Hex(ipa));
  log_.Append("RMI_RTT_UNMAP", r, std::move(a), st);
  return st;
}

// --- exit filter ------------------------------------------------------------

FilterVerdict Platform::RealmExit(const ExitEvent& e) {
  FilterVerdict v;
  const Realm* realm = this->realm(e.realm);
  if (realm == nullptr || !realm->alive()) {
    v.action = FilterAction::kBlock;
  } else if (!realm->committed()) {
    v.action = FilterAction::kAllow;
  } else {
    const PolicyConfig& p = *realm->policy;
    v.action = FilterAction::kBlock;
    for (const auto& tc : p.trans_channels) {
      if (tc.owner == p.self_id && tc.type == e.kind && tc.Covers(e.id)) {
        v.action = tc.action;
        break;
      }
    }
    if (e.kind == TransType::kException && e.id == kPreemptionEventId &&
        v.action == FilterAction::kBlock) {
      v.action = FilterAction::kScrub;
    }
  }
  if (v.action == FilterAction::kAllow) {
    v.delivered = e.payload;
  } else if (v.action == FilterAction::kScrub) {
    std::vector<uint64_t> scrubbed(std::max<size_t>(1, e.payload.size()), 0);
    scrubbed[0] = e.id;
    v.delivered = std::move(scrubbed);
  }
  if (v.delivered) {
    host_events_.push_back(
        HostEvent{e.realm, e.kind, e.id, v.action, *v.delivered});
  }
  json::Value a = Args();
  a.Add("kind", json::Value::String(std::string(TransTypeName(e.kind))));
  a.Add("id", json::Value::Int(static_cast<int64_t>(e.id)));
  a.Add("registers", json::Value::Int(static_cast<int64_t>(e.payload.size())));
  log_.Append("REALM_EXIT", e.realm, std::move(a),
              std::string(FilterActionName(v.action)));
  return v;
}

// --- channel queries --------------------------------------------------------

std::vector<ChannelRuntime> Platform::Channels() const {
  std::vector<ChannelRuntime> out;
  std::set<GranuleId> seen;
  for (const auto& [id, realm] : realms_) {
    if (!realm.committed()) continue;
    for (const auto& b : realm.bindings) {
      if (b.type != ChannelType::kProtected || b.pas.empty()) continue;
      if (!seen.insert(b.pas.front()).second) continue;
      ChannelRuntime ch;
      ch.name = b.name;
      ch.pas = b.pas;
      std::optional<std::set<RealmId>> peers;
      for (GranuleId pa : b.pas) {
        std::set<RealmId> here;
        if (const SgtRow* row = sgt_.Find(pa)) {
          for (const auto& e : row->entries) {
            const Realm* other = this->realm(e.realm);
            if (e.validated && other != nullptr && other->alive()) {
              here.insert(e.realm);
            }
          }
        }
        if (!peers) {
          peers = std::move(here);
        } else {
          std::set<RealmId> both;
          std::set_intersection(peers->begin(), peers->end(), here.begin(),
                                here.end(), std::inserter(both, both.end()));
          peers = std::move(both);
        }
      }
      ch.peers = std::move(*peers);
      ch.active = ch.peers.size() >= 2;
      for (RealmId m : ch.peers) {
        const Realm* mr = this->realm(m);
        const ChannelBinding* mb = mr->BindingForPa(b.pas.front());
        if (mb == nullptr) continue;
        auto it = mr->any_remaining.find(mb->name);
        if (it != mr->any_remaining.end()) {
          ch.any_remaining = it->second;
          break;
        }
      }
      out.push_back(std::move(ch));
    }
  }
  return out;
}

std::vector<RealmId> Platform::GroupOf(RealmId r) const {
  std::map<RealmId, std::set<RealmId>> adj;
  for (const auto& ch : Channels()) {
    if (!ch.active) continue;
    for (RealmId a : ch.peers) {
      for (RealmId b : ch.peers) {
        if (a != b) adj[a].insert(b);
      }
    }
  }
  std::set<RealmId> seen{r};
  std::deque<RealmId> queue{r};
  while (!queue.empty()) {
    RealmId x = queue.front();
    queue.pop_front();
    for (RealmId y : adj[x]) {
      if (seen.insert(y).second) queue.push_back(y);
    }
  }
  return {seen.begin(), seen.end()};
}

}  // namespace mica
