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

// Policy upload and validation.
//
// Validation runs in two phases. The local phase binds every declared
// channel to the uploader's RTT and checks the one-to-one correspondence
// with host-marked protected-shared mappings. The traversal phase walks a
// work queue of (realm, channel) pairs across the SGT, checking each pair
// of committed realms that share channel pages exactly once.

#include <algorithm>
#include <deque>
#include <tuple>

#include "mica/digest.h"
#include "mica/monitor.h"

namespace mica {
namespace {

MappingKind KindFor(ChannelType t) {
  return t == ChannelType::kProtected ? MappingKind::kProtectedShared
                                      : MappingKind::kUnprotected;
}

bool Fail(ValidationReport* rep, ValidationFailure f, std::string detail) {
  rep->failure = f;
  rep->detail = std::move(detail);
  return false;
}

// One side of a pair check.
struct Party {
  RealmId id;
  const Digest* rim = nullptr;
  const PolicyConfig* policy = nullptr;
  const std::vector<ChannelBinding>* bindings = nullptr;
};

// Mutable copy of the resolution state touched by one validation.
struct Tentative {
  std::map<RealmId, std::map<std::string, RealmId>> bindings;
  std::map<std::pair<RealmId, std::string>, int64_t> any_remaining;
  std::map<std::pair<RealmId, std::string>, std::set<RealmId>> any_members;
};

struct Resolution {
  bool ok = false;
  bool any = false;
  std::string local_id;
  std::string why;
};

bool SamePeer(const PeerSpec& a, const PeerSpec& b) {
  if (a.expected_rim && b.expected_rim) return *a.expected_rim == *b.expected_rim;
  return a.local_id == b.local_id;
}

const PeerSpec* MatchPeer(const PolicyConfig& in, const PeerSpec& want) {
  for (const auto& p : in.peers) {
    if (SamePeer(p, want)) return &p;
  }
  return nullptr;
}

bool RangeSuperset(const std::vector<uint64_t>& big,
                   const std::vector<uint64_t>& small) {
  return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

}  // namespace

// True when `declarer` captures everything `peer_policy` (whose owner it
// calls `local_id`) declares: its channels, its peers and its own
// control-flow policies.
static bool Captures(const PolicyConfig& declarer, const std::string& local_id,
                     const PolicyConfig& peer_policy, std::string* why) {
  for (const auto& qch : peer_policy.mem_channels) {
    const MappingSpec* qself = peer_policy.SelfMapping(qch);
    if (qself == nullptr) continue;
    const MemChannelSpec* pch = declarer.FindMemChannel(qch.name);
    if (pch == nullptr) {
      *why = "channel " + qch.name + " not declared";
      return false;
    }
    if (pch->size != qch.size || pch->type != qch.type) {
      *why = "channel " + qch.name + " shape differs";
      return false;
    }
    const MappingSpec* pm = pch->FindMapping(local_id);
    if (pm == nullptr || !qself->prot.SubsetOf(pm->prot)) {
      *why = "channel " + qch.name + " rights not captured";
      return false;
    }
    for (const auto& m : qch.mappings) {
      if (!m.any && m.who == peer_policy.self_id) continue;
      if (m.any) {
        if (pch->FindAny() == nullptr) {
          *why = "channel " + qch.name + " ANY mapping not captured";
          return false;
        }
        continue;
      }
      const PeerSpec* qpeer = peer_policy.FindPeer(m.who);
      bool found = false;
      for (const auto& pm2 : pch->mappings) {
        if (pm2.any || pm2.who == local_id) continue;
        const PeerSpec* ppeer = declarer.FindPeer(pm2.who);
        if (ppeer != nullptr && SamePeer(*ppeer, *qpeer)) found = true;
      }
      if (!found) {
        *why = "channel " + qch.name + " mapping for " + m.who + " not captured";
        return false;
      }
    }
  }
  for (const auto& qpeer : peer_policy.peers) {
    if (qpeer.local_id == peer_policy.self_id) continue;
    if (MatchPeer(declarer, qpeer) == nullptr) {
      *why = "peer " + qpeer.local_id + " not captured";
      return false;
    }
  }
  for (const auto& qtc : peer_policy.trans_channels) {
    if (qtc.owner != peer_policy.self_id) continue;
    bool covered = false;
    for (const auto& ptc : declarer.trans_channels) {
      if (ptc.owner == local_id && ptc.type == qtc.type &&
          ptc.action == qtc.action && RangeSuperset(ptc.range, qtc.range)) {
        covered = true;
      }
    }
    if (!covered) {
      *why = "control-flow channel " + qtc.name + " not captured";
      return false;
    }
  }
  return true;
}

ValidationReport Platform::ValidatePolicy(RealmId r,
                                          const PolicyConfig& p) const {
  ValidationReport rep;
  const Realm* uploader = realm(r);
  if (uploader == nullptr || !uploader->alive()) {
    Fail(&rep, ValidationFailure::kMalformedPolicy, "no such live realm");
    return rep;
  }
  if (p.self() != nullptr && !p.self()->is_gateway &&
      p.HoldsGatewayCapabilities()) {
    Fail(&rep, ValidationFailure::kGatewayViolation,
         "non-gateway Self holds gateway capabilities");
    return rep;
  }
  if (Status st = CheckPolicyStructure(p); !st.ok()) {
    Fail(&rep, ValidationFailure::kMalformedPolicy, st.ToString());
    return rep;
  }

  // --- local phase: bind channels to the uploader's RTT ---
  std::map<uint64_t, std::string> claimed;  // ipa -> channel
  std::map<GranuleId, std::string> claimed_pa;
  std::vector<const MemChannelSpec*> order;
  for (const auto& ch : p.mem_channels) {
    const MappingSpec* self = p.SelfMapping(ch);
    if (self != nullptr && self->gpa) order.push_back(&ch);
  }
  for (const auto& ch : p.mem_channels) {
    const MappingSpec* self = p.SelfMapping(ch);
    if (self != nullptr && !self->gpa) order.push_back(&ch);
  }
  for (const MemChannelSpec* ch : order) {
    const MappingSpec* self = p.SelfMapping(*ch);
    MappingKind want = KindFor(ch->type);
    uint64_t n = ch->granules();
    uint64_t base = 0;
    if (self->gpa) {
      base = *self->gpa;
      uint64_t have = 0;
      for (uint64_t i = 0; i < n; ++i) {
        uint64_t ipa = base + i * kGranuleSize;
        if (auto c = claimed.find(ipa); c != claimed.end()) {
          Fail(&rep, ValidationFailure::kDuplicatePa,
               "channel " + ch->name + " overlaps " + c->second);
          return rep;
        }
        auto e = uploader->rtt.find(ipa);
        if (e != uploader->rtt.end() && e->second.kind == want) ++have;
      }
      if (have == 0) {
        Fail(&rep, ValidationFailure::kMissingSharedMarking,
             "channel " + ch->name + " has no " +
                 std::string(MappingKindName(want)) + " backing");
        return rep;
      }
      if (have < n) {
        Fail(&rep, ValidationFailure::kSizeMismatch,
             "channel " + ch->name + " is only partly backed");
        return rep;
      }
    } else {
      // Lowest contiguous run of unclaimed entries of the right kind.
      bool found = false;
      uint64_t run_start = 0, run_len = 0, prev = 0;
      bool any_unclaimed = false;
      for (const auto& [ipa, e] : uploader->rtt) {
        if (e.kind != want || claimed.count(ipa) != 0) {
          run_len = 0;
          continue;
        }
        any_unclaimed = true;
        if (run_len > 0 && ipa == prev + kGranuleSize) {
          ++run_len;
        } else {
          run_start = ipa;
          run_len = 1;
        }
        prev = ipa;
        if (run_len == n) {
          found = true;
          break;
        }
      }
      if (!found) {
        Fail(&rep,
             any_unclaimed ? ValidationFailure::kSizeMismatch
                           : ValidationFailure::kMissingSharedMarking,
             "no backing of " + std::to_string(ch->size) + " bytes for " +
                 ch->name);
        return rep;
      }
      base = run_start;
    }
    ChannelBinding b;
    b.name = ch->name;
    b.type = ch->type;
    b.ipa_base = base;
    b.rights = self->prot;
    for (uint64_t i = 0; i < n; ++i) {
      uint64_t ipa = base + i * kGranuleSize;
      GranuleId pa = uploader->rtt.at(ipa).pa;
      if (auto c = claimed_pa.find(pa); c != claimed_pa.end()) {
        Fail(&rep, ValidationFailure::kDuplicatePa,
             "channels " + c->second + " and " + ch->name +
                 " share a physical page");
        return rep;
      }
      claimed_pa[pa] = ch->name;
      claimed[ipa] = ch->name;
      b.pas.push_back(pa);
    }
    rep.bindings.push_back(std::move(b));
  }
  std::sort(rep.bindings.begin(), rep.bindings.end(),
            [](const ChannelBinding& a, const ChannelBinding& b) {
              return a.name < b.name;
            });

  for (const auto& [ipa, e] : uploader->rtt) {
    if (claimed.count(ipa) != 0) continue;
    if (e.kind == MappingKind::kUnprotected) {
      rep.unmap_ipas.push_back(ipa);
    } else if (e.kind == MappingKind::kProtectedShared) {
      bool adjacent = false;
      for (const auto& b : rep.bindings) {
        if (b.type != ChannelType::kProtected) continue;
        if (ipa == b.ipa_base + b.size() || ipa + kGranuleSize == b.ipa_base) {
          adjacent = true;
        }
      }
      Fail(&rep,
           adjacent ? ValidationFailure::kSizeMismatch
                    : ValidationFailure::kUndeclaredSharedMapping,
           "protected-shared mapping at ipa " + std::to_string(ipa) +
               " is not covered by any declared channel");
      return rep;
    }
  }

  // --- traversal phase ---
  auto party = [&](RealmId id) -> std::optional<Party> {
    if (id == r) return Party{r, &uploader->rim, &p, &rep.bindings};
    const Realm* other = realm(id);
    if (other == nullptr || !other->committed()) return std::nullopt;
    return Party{id, &other->rim, &*other->policy, &other->bindings};
  };

  Tentative t;
  auto bindings_of = [&](RealmId id) -> std::map<std::string, RealmId>& {
    auto [it, inserted] = t.bindings.try_emplace(id);
    if (inserted && id != r) it->second = realm(id)->peer_bindings;
    return it->second;
  };
  auto any_key_init = [&](RealmId id, const MemChannelSpec& ch) {
    auto key = std::make_pair(id, ch.name);
    if (t.any_remaining.count(key) == 0) {
      const Realm* o = realm(id);
      int64_t rem = ch.FindAny()->count;
      std::set<RealmId> members;
      if (id != r) {
        if (auto it = o->any_remaining.find(ch.name); it != o->any_remaining.end()) {
          rem = it->second;
        }
        if (auto it = o->any_members.find(ch.name); it != o->any_members.end()) {
          members = it->second;
        }
      }
      t.any_remaining[key] = rem;
      t.any_members[key] = std::move(members);
    }
    return key;
  };

  // Participants (committed realms and the uploader) mapping any of `pas`.
  auto participants = [&](const std::vector<GranuleId>& pas, RealmId except) {
    std::set<RealmId> out;
    for (GranuleId pa : pas) {
      const SgtRow* row = sgt_.Find(pa);
      if (row == nullptr) continue;
      for (const auto& e : row->entries) {
        if (e.realm != except && party(e.realm)) out.insert(e.realm);
      }
    }
    return out;
  };

  // How `owner` names `other` on channel `ch`.
  auto resolve = [&](const Party& owner, const MemChannelSpec& ch,
                     const ChannelBinding& b, const Party& other) {
    Resolution res;
    auto& known = bindings_of(owner.id);
    for (const auto& [local, gid] : known) {
      if (gid != other.id) continue;
      if (ch.FindMapping(local) != nullptr) {
        res.ok = true;
        res.local_id = local;
      } else if (ch.FindAny() != nullptr) {
        res.ok = res.any = true;
      } else {
        res.why = "already resolved as " + local + ", which " + ch.name +
                  " does not name";
      }
      return res;
    }
    std::set<RealmId> pool = participants(b.pas, owner.id);
    auto unbound = [&](RealmId z) {
      for (const auto& [local, gid] : known) {
        if (gid == z) return false;
      }
      return true;
    };
    std::vector<std::string> hashed, hashless;
    std::set<Digest> hashes;
    for (const auto& m : ch.mappings) {
      if (m.any || m.who == owner.policy->self_id) continue;
      const PeerSpec* peer = owner.policy->FindPeer(m.who);
      if (peer->expected_rim) hashes.insert(*peer->expected_rim);
      if (known.count(m.who) != 0) continue;
      if (peer->expected_rim) {
        if (*peer->expected_rim != *other.rim) continue;
        size_t twins = 0;
        for (RealmId z : pool) {
          if (unbound(z) && *party(z)->rim == *other.rim) ++twins;
        }
        if (twins > 1) {
          res.why = m.who + " matches several realms with the same RIM";
          return res;
        }
        hashed.push_back(m.who);
      } else {
        hashless.push_back(m.who);
      }
    }
    if (hashed.size() == 1) {
      res.ok = true;
      res.local_id = hashed.front();
      return res;
    }
    if (hashed.size() > 1) {
      res.why = "several peers expect the same RIM";
      return res;
    }
    if (!hashless.empty() && hashes.count(*other.rim) == 0) {
      size_t candidates = 0;
      for (RealmId z : pool) {
        if (unbound(z) && hashes.count(*party(z)->rim) == 0) ++candidates;
      }
      if (hashless.size() > 1 || candidates > 1) {
        res.why = "cannot tell which realm is " + hashless.front();
        return res;
      }
      res.ok = true;
      res.local_id = hashless.front();
      return res;
    }
    if (ch.FindAny() != nullptr) {
      res.ok = res.any = true;
      return res;
    }
    res.why = "no mapping on " + ch.name + " admits realm " +
              std::to_string(other.id.gid);
    return res;
  };

  // `owner` grants `other`, which requests `other_prot` at `other_base`.
  auto check_side = [&](const Party& owner, const ChannelBinding& ob,
                        const Party& other, const ChannelBinding& xb) -> bool {
    const MemChannelSpec& ch = *owner.policy->FindMemChannel(ob.name);
    Resolution res = resolve(owner, ch, ob, other);
    std::string tag = std::to_string(owner.id.gid) + "->" +
                      std::to_string(other.id.gid) + " on " + ob.name;
    if (!res.ok) {
      return Fail(&rep, ValidationFailure::kAmbiguousPeer, tag + ": " + res.why);
    }
    const MappingSpec* m = res.any ? ch.FindAny() : ch.FindMapping(res.local_id);
    if (!xb.rights.SubsetOf(m->prot)) {
      return Fail(&rep,
                  res.any ? ValidationFailure::kRightsExceedAny
                          : ValidationFailure::kRightsEscalation,
                  tag + ": requests " + xb.rights.ToString() + ", granted " +
                      m->prot.ToString());
    }
    if (m->gpa && *m->gpa != xb.ipa_base) {
      return Fail(&rep, ValidationFailure::kGpaMismatch, tag);
    }
    if (res.any) {
      auto key = any_key_init(owner.id, ch);
      auto& members = t.any_members[key];
      if (members.count(other.id) == 0) {
        int64_t& left = t.any_remaining[key];
        if (left == 0) {
          return Fail(&rep, ValidationFailure::kAnyExhausted, tag);
        }
        if (left > 0) --left;
        members.insert(other.id);
        rep.any_admissions.push_back(
            AnyAdmission{owner.id, ch.name, other.id, xb.rights});
      }
      return true;
    }
    const PeerSpec* peer = owner.policy->FindPeer(res.local_id);
    if (!peer->is_gateway && other.policy->HoldsGatewayCapabilities()) {
      return Fail(&rep, ValidationFailure::kGatewayViolation,
                  tag + ": " + res.local_id + " is not a gateway");
    }
    std::string why;
    if (peer->strict && !Captures(*owner.policy, res.local_id, *other.policy, &why)) {
      return Fail(&rep, ValidationFailure::kStrictViolation,
                  tag + ": strict peer " + res.local_id + ": " + why);
    }
    auto& known = bindings_of(owner.id);
    if (known.count(res.local_id) == 0) {
      known[res.local_id] = other.id;
      rep.resolutions.push_back(PeerResolution{owner.id, res.local_id, other.id});
    }
    return true;
  };

  std::deque<std::pair<RealmId, size_t>> queue;
  auto enqueue = [&](const Party& x) {
    for (size_t i = 0; i < x.bindings->size(); ++i) {
      if ((*x.bindings)[i].type == ChannelType::kProtected) {
        queue.emplace_back(x.id, i);
      }
    }
  };
  std::set<std::tuple<uint64_t, uint64_t, uint64_t>> visited;
  std::set<RealmId> expanded{r};
  enqueue(*party(r));
  while (!queue.empty()) {
    auto [xid, bi] = queue.front();
    queue.pop_front();
    Party x = *party(xid);
    const ChannelBinding& xb = (*x.bindings)[bi];
    for (RealmId yid : participants(xb.pas, xid)) {
      auto key = std::make_tuple(std::min(xid, yid).gid, std::max(xid, yid).gid,
                                 xb.pas.front().pa);
      if (!visited.insert(key).second) continue;
      Party y = *party(yid);
      const ChannelBinding* yb = nullptr;
      for (const auto& cand : *y.bindings) {
        if (std::find(cand.pas.begin(), cand.pas.end(), xb.pas.front()) !=
            cand.pas.end()) {
          yb = &cand;
        }
      }
      if (yb == nullptr || yb->pas != xb.pas) {
        Fail(&rep, ValidationFailure::kSizeMismatch,
             "realms " + std::to_string(xid.gid) + " and " +
                 std::to_string(yid.gid) + " back " + xb.name +
                 " with different pages");
        return rep;
      }
      if (!check_side(x, xb, y, *yb) || !check_side(y, *yb, x, xb)) return rep;
      rep.edges.push_back(ChannelEdge{xid, yid, xb.name, yb->name});
      if (expanded.insert(yid).second) enqueue(y);
    }
  }

  // --- activation ---
  for (const auto& b : rep.bindings) {
    if (b.type != ChannelType::kProtected) continue;
    bool active = true;
    for (GranuleId pa : b.pas) {
      const SgtRow* row = sgt_.Find(pa);
      size_t validated = 1;  // the uploader, once committed
      for (const auto& e : row->entries) {
        if (e.realm != r && e.validated) ++validated;
      }
      if (validated < 2) active = false;
    }
    if (active) rep.active_channels.push_back(b.name);
  }
  return rep;
}

Status Platform::ConnectAny(RealmId owner, std::string_view channel,
                            RealmId member, Rights requested) {
  auto run = [&]() -> Status {
    Realm* o = mutable_realm(owner);
    if (o == nullptr || !o->committed()) {
      return Error(ErrorCode::kInvalidArgument, "owner has no committed policy");
    }
    const MemChannelSpec* ch = o->policy->FindMemChannel(channel);
    const MappingSpec* any = ch == nullptr ? nullptr : ch->FindAny();
    if (any == nullptr) {
      return Error(ErrorCode::kInvalidArgument, "channel has no ANY mapping");
    }
    if (!requested.SubsetOf(any->prot)) {
      return Error(ErrorCode::kRightsExceedAny);
    }
    std::string name(channel);
    auto& members = o->any_members[name];
    if (members.count(member) != 0) return Status::Ok();
    auto [it, fresh] = o->any_remaining.try_emplace(name, any->count);
    if (it->second == 0) return Error(ErrorCode::kAnyExhausted);
    if (it->second > 0) --it->second;
    members.insert(member);
    return Status::Ok();
  };
  Status st = run();
  json::Value a = json::Value::Object();
  a.Add("channel", json::Value::String(std::string(channel)));
  a.Add("member", json::Value::Int(static_cast<int64_t>(member.gid)));
  a.Add("rights", json::Value::String(requested.ToString()));
  log_.Append("CONNECT_ANY", owner, std::move(a), st);
  return st;
}

void Platform::Commit(Realm* realm, const PolicyConfig& p, const Bytes& blob,
                      const ValidationReport& report) {
  realm->rem_base = realm->rem;
  realm->rem = ExtendMeasurement(realm->rem, PolicyDigest(blob));
  realm->policy = p;
  realm->policy_blob = blob;
  realm->bindings = report.bindings;
  realm->state = RealmState::kPolicyCommitted;
  for (uint64_t ipa : report.unmap_ipas) realm->Unmap(ipa);
  for (const auto& b : report.bindings) {
    for (size_t i = 0; i < b.pas.size(); ++i) {
      RttEntry& e = realm->rtt.at(b.ipa_base + i * kGranuleSize);
      if (b.type == ChannelType::kUnprotected) {
        e.rights = e.rights & b.rights;
      } else {
        e.rights = b.rights;
        sgt_.SetGranted(b.pas[i], realm->id, b.rights, true);
      }
    }
  }
  for (const auto& ch : p.mem_channels) {
    const MappingSpec* any = ch.FindAny();
    if (any != nullptr && p.SelfMapping(ch) != nullptr) {
      realm->any_remaining.try_emplace(ch.name, any->count);
    }
  }
  for (const auto& res : report.resolutions) {
    mutable_realm(res.owner)->peer_bindings[res.local_id] = res.peer;
  }
  for (const auto& adm : report.any_admissions) {
    // Admissions were checked against the same state; this cannot fail.
    (void)ConnectAny(adm.owner, adm.channel, adm.member, adm.requested);
  }
  sgt_.Flush(&space_);
}

Status Platform::RsiUploadPolicy(RealmId r, uint64_t blob_ipa) {
  json::Value args = json::Value::Object();
  char buf[24];
  std::snprintf(buf, sizeof(buf), "0x%llx",
                static_cast<unsigned long long>(blob_ipa));
  args.Add("blob_ipa", json::Value::String(buf));
  auto finish = [&](Status st) {
    log_.Append("RSI_UPLOAD_POLICY", r, args, st);
    return st;
  };

  Realm* realm = mutable_realm(r);
  if (realm == nullptr) return finish(Error(ErrorCode::kNoSuchRealm));
  if (!realm->alive()) return finish(Error(ErrorCode::kRealmTerminated));
  if (realm->locked()) return finish(Error(ErrorCode::kSecondUpload));
  if (!realm->pd) return finish(Error(ErrorCode::kNoPd));
  const RttEntry* first = Translate(*realm, blob_ipa);
  if (first == nullptr || first->kind != MappingKind::kPrivate) {
    return finish(Error(ErrorCode::kBadAddress, "blob is not in private memory"));
  }

  realm->state = RealmState::kLockedDown;
  Bytes raw;
  for (uint64_t at = blob_ipa; raw.size() < kPolicyBudget;) {
    const RttEntry* e = Translate(*realm, at);
    if (e == nullptr || e->kind != MappingKind::kPrivate) break;
    uint64_t off = at % kGranuleSize;
    size_t n = std::min<size_t>(kPolicyBudget - raw.size(), kGranuleSize - off);
    size_t start = raw.size();
    raw.resize(start + n);
    space_.Read(e->pa, off, std::span<uint8_t>(raw.data() + start, n));
    at += n;
  }

  auto decoded = DecodePolicyPrefix(raw);
  if (!decoded.ok()) {
    TerminateRealm(r, "BadBlob");
    return finish(Error(ErrorCode::kBadBlob, decoded.status().ToString()));
  }
  Bytes blob(raw.begin(), raw.begin() + decoded->consumed);
  space_.Zero(*realm->pd);
  space_.Write(*realm->pd, 0, blob);

  ValidationReport report = ValidatePolicy(r, decoded->config);
  reports_[r] = report;
  if (!report.ok()) {
    std::string reason(ValidationFailureName(report.failure));
    TerminateRealm(r, reason);
    return finish(Error(ErrorCode::kValidationFailed, reason + ": " + report.detail));
  }
  Commit(mutable_realm(r), decoded->config, blob, report);
  return finish(Status::Ok());
}

}  // namespace mica
