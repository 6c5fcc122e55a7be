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

#include "mica/topology.h"

#include <algorithm>
#include <cstdio>
#include <random>

#include "mica/attestation.h"

namespace mica {
namespace {

using json::Value;

constexpr uint64_t kChannelIpaBase = 0x1'0000'0000;
constexpr uint64_t kChannelIpaStride = 0x10'0000;

std::string Numbered(char prefix, size_t i) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%c%02zu", prefix, i);
  return buf;
}

Value PeerEntry(const std::string& name, bool gateway, bool strict) {
  Value v = Value::Object();
  v.Add("hash", Value::String("rim:" + name));
  v.Add("is_gateway", Value::Bool(gateway));
  v.Add("strict", Value::Bool(strict));
  return v;
}

Value Mapping(uint64_t gpa, Rights prot) {
  Value v = Value::Object();
  v.Add("gpa", Value::Int(static_cast<int64_t>(gpa)));
  v.Add("prot", Value::String(prot.ToString()));
  return v;
}

Value TransEntry(const std::string& owner, TransType type,
                 std::vector<uint64_t> range, FilterAction action) {
  Value v = Value::Object();
  v.Add("owner", Value::String(owner));
  v.Add("type", Value::String(std::string(TransTypeName(type))));
  Value& r = v.Add("range", Value::Array());
  for (uint64_t id : range) r.Push(Value::Int(static_cast<int64_t>(id)));
  v.Add("policy", Value::String(std::string(FilterActionName(action))));
  return v;
}

Bytes ImageFor(const std::string& name) {
  std::string s = "synthetic image " + name;
  return Bytes(s.begin(), s.end());
}

ScenarioAction Action(size_t index, std::string op, Value args,
                      std::optional<std::string> expect = std::nullopt) {
  ScenarioAction a;
  a.index = index;
  a.op = std::move(op);
  a.args = std::move(args);
  a.expect = std::move(expect);
  return a;
}

}  // namespace

Scenario ChainScenario(size_t realms) {
  Scenario s;
  s.name = "chain-" + std::to_string(realms);
  s.seed = "chain";
  s.granules = 64 + 4 * realms;
  for (size_t i = 1; i <= realms; ++i) {
    ScenarioRealm r;
    r.name = Numbered('R', i);
    r.image = ImageFor(r.name);
    r.private_granules = 1;

    Value peers = Value::Object();
    Value chans = Value::Object();
    Value trans = Value::Object();
    peers.Add("Self", Value::String(r.name));
    peers.Add(r.name, PeerEntry(r.name, false, false));
    for (size_t j : {i - 1, i + 1}) {
      if (j < 1 || j > realms) continue;
      std::string other = Numbered('R', j);
      peers.Add(other, PeerEntry(other, false, false));
      size_t c = std::min(i, j);
      uint64_t gpa = kChannelIpaBase + c * kChannelIpaStride;
      Value ch = Value::Object();
      ch.Add("size", Value::Int(kGranuleSize));
      ch.Add("type", Value::String("PROTECTED"));
      Value& maps = ch.Add("mappings", Value::Object());
      maps.Add(r.name, Mapping(gpa, Rights::RW()));
      maps.Add(other, Mapping(gpa, Rights::RW()));
      chans.Add(Numbered('c', c), std::move(ch));
    }
    Value doc = Value::Object();
    doc.Add("Peers", std::move(peers));
    doc.Add("MemChannels", std::move(chans));
    doc.Add("TransChannels", std::move(trans));
    r.policy_doc = std::move(doc);
    s.realms.push_back(std::move(r));
  }
  for (size_t c = 1; c < realms; ++c) {
    s.objects.push_back(
        ScenarioObject{Numbered('c', c), SlotAttribute::kPrivateShared, kGranuleSize});
    for (size_t j : {c, c + 1}) {
      s.slots.push_back(ScenarioSlot{Numbered('R', j), Numbered('c', c),
                                     kChannelIpaBase + c * kChannelIpaStride,
                                     Rights::RW()});
    }
  }
  for (size_t i = 1; i <= realms; ++i) {
    Value args = Value::Object();
    args.Add("realm", Value::String(Numbered('R', i)));
    s.actions.push_back(Action(s.actions.size(), "upload_policy", std::move(args), "ok"));
  }
  return s;
}

StatusOr<std::vector<TokenSizeRow>> ChainTokenSizes(size_t max_realms) {
  std::vector<TokenSizeRow> rows;
  Digest nonce = NonceFromText("sizes");
  for (size_t n = 1; n <= max_realms; ++n) {
    ScenarioRunner runner(ChainScenario(n));
    MICA_RETURN_IF_ERROR(runner.Setup());
    for (const auto& a : runner.scenario().actions) {
      StepResult res = runner.Step(a);
      if (!res.passed) {
        return Error(ErrorCode::kValidationFailed,
                     "chain of " + std::to_string(n) + ": step " +
                         std::to_string(res.index) + " gave " + res.outcome +
                         " (" + res.detail + ")");
      }
    }
    RealmId first = *runner.RealmByName("R01");
    Bytes token = runner.platform().BuildGroupToken(first, nonce);
    MICA_ASSIGN_OR_RETURN(GroupToken decoded, GroupToken::Decode(token));
    if (decoded.records.size() != n) {
      return Error(ErrorCode::kInconsistentActivity,
                   "chain of " + std::to_string(n) + " attested " +
                       std::to_string(decoded.records.size()) + " realms");
    }
    TokenSizeRow row;
    row.realms = n;
    row.token_bytes = token.size();
    row.platform_token_bytes = decoded.records.front().platform_token.size();
    for (const auto& rec : decoded.records) row.policy_bytes += rec.policy_blob.size();
    rows.push_back(row);
  }
  return rows;
}

Scenario RandomScenario(uint64_t seed, const RandomTopologyOptions& opts) {
  std::mt19937_64 rng(seed);
  auto chance = [&](double p) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
  };
  auto pick = [&](size_t lo, size_t hi) {
    return std::uniform_int_distribution<size_t>(lo, hi)(rng);
  };
  static constexpr Rights kRights[] = {Rights::R(), Rights::W(), Rights::RW()};

  Scenario s;
  s.name = "random-" + std::to_string(seed);
  s.seed = s.name;
  s.granules = 96;
  size_t n = pick(1, opts.max_realms);
  // Single-realm draws exercise little; keep them rare.
  if (n == 1) n = pick(1, opts.max_realms);
  std::vector<std::string> names;
  std::vector<bool> gateway(n);
  for (size_t i = 0; i < n; ++i) {
    names.push_back(std::string(1, static_cast<char>('A' + i)));
    gateway[i] = chance(0.35);
  }

  struct Channel {
    std::string name;
    ChannelType type;
    size_t granules;
    std::vector<size_t> members;
    std::vector<Rights> rights;  // per member
    std::optional<size_t> any_owner;
    int64_t any_count = -1;
    Rights any_prot;
  };
  std::vector<Channel> channels;
  size_t k = pick(1, opts.max_channels);
  for (size_t c = 0; c < k; ++c) {
    Channel ch;
    ch.name = "m" + std::to_string(c);
    ch.granules = pick(1, 2);
    std::vector<size_t> gws;
    for (size_t i = 0; i < n; ++i) {
      if (gateway[i]) gws.push_back(i);
    }
    bool misplaced = chance(opts.fault_rate);
    if (chance(0.25) && (!gws.empty() || misplaced)) {
      ch.type = ChannelType::kUnprotected;
      // Held by a gateway unless the fault puts it on anyone.
      size_t owner = !gws.empty() && !misplaced ? gws[pick(0, gws.size() - 1)]
                                                : pick(0, n - 1);
      ch.members.push_back(owner);
      for (size_t i = 0; i < n; ++i) {
        if (i != owner && gateway[i] && chance(0.3)) ch.members.push_back(i);
      }
    } else {
      if (n < 2) continue;
      ch.type = ChannelType::kProtected;
      std::vector<size_t> all(n);
      for (size_t i = 0; i < n; ++i) all[i] = i;
      std::shuffle(all.begin(), all.end(), rng);
      size_t m = std::min(n, pick(2, 3));
      ch.members.assign(all.begin(), all.begin() + m);
      std::sort(ch.members.begin(), ch.members.end());
      if (chance(0.2)) {
        ch.any_owner = ch.members[pick(0, ch.members.size() - 1)];
        static constexpr int64_t kCounts[] = {-1, 1, 2};
        ch.any_count = kCounts[pick(0, 2)];
        ch.any_prot = chance(0.8) ? Rights::RW() : Rights::R();
      }
    }
    for (size_t i = 0; i < ch.members.size(); ++i) {
      ch.rights.push_back(kRights[pick(0, 2)]);
    }
    channels.push_back(std::move(ch));
  }

  auto gpa_of = [](size_t c) { return kChannelIpaBase + c * kChannelIpaStride; };
  auto member_index = [](const Channel& ch, size_t r) -> std::optional<size_t> {
    for (size_t i = 0; i < ch.members.size(); ++i) {
      if (ch.members[i] == r) return i;
    }
    return std::nullopt;
  };
  // Peers of `r` as seen from its own policy: everyone it names on a channel.
  auto names_of = [&](size_t r) {
    std::set<size_t> out;
    for (const auto& ch : channels) {
      auto mi = member_index(ch, r);
      if (!mi) continue;
      if (ch.any_owner && *ch.any_owner == r) continue;
      for (size_t m : ch.members) {
        if (m == r) continue;
        if (ch.any_owner && *ch.any_owner != m) continue;
        out.insert(m);
      }
    }
    return out;
  };

  std::vector<bool> omit_slot_used(n, false);
  for (size_t r = 0; r < n; ++r) {
    ScenarioRealm realm;
    realm.name = names[r];
    realm.image = ImageFor(realm.name + std::to_string(seed));
    realm.private_granules = 1;

    Value peers = Value::Object();
    peers.Add("Self", Value::String(names[r]));
    peers.Add(names[r], PeerEntry(names[r], gateway[r], false));
    std::set<size_t> named = names_of(r);
    std::set<size_t> strict;
    for (size_t q : named) {
      bool lie = chance(opts.fault_rate / 2);
      bool is_strict = chance(0.15);
      if (is_strict) strict.insert(q);
      peers.Add(names[q], PeerEntry(names[q], gateway[q] != lie, is_strict));
    }

    Value chans = Value::Object();
    bool escalate = chance(opts.fault_rate);
    bool wrong_size = chance(opts.fault_rate);
    bool drop_channel = chance(opts.fault_rate);
    bool shift_gpa = chance(opts.fault_rate / 2);
    bool overlap = chance(opts.fault_rate / 2);
    bool escalated = false, resized = false, dropped = false, shifted = false;
    std::optional<uint64_t> first_self_gpa;
    for (size_t c = 0; c < channels.size(); ++c) {
      const Channel& ch = channels[c];
      auto mi = member_index(ch, r);
      if (!mi) continue;
      if (drop_channel && !dropped && ch.type == ChannelType::kProtected) {
        dropped = true;
        continue;
      }
      uint64_t granules = ch.granules;
      if (wrong_size && !resized) {
        resized = true;
        ++granules;
      }
      Value cv = Value::Object();
      cv.Add("size", Value::Int(static_cast<int64_t>(granules * kGranuleSize)));
      cv.Add("type", Value::String(std::string(ChannelTypeName(ch.type))));
      Value& maps = cv.Add("mappings", Value::Object());
      for (size_t i = 0; i < ch.members.size(); ++i) {
        size_t m = ch.members[i];
        if (m != r && named.count(m) == 0) continue;
        Rights prot = ch.rights[i];
        uint64_t gpa = gpa_of(c);
        if (m == r && escalate && !escalated) {
          escalated = true;
          prot = prot | Rights(Rights::kExec);
        }
        if (m != r && shift_gpa && !shifted) {
          shifted = true;
          gpa += kGranuleSize;
        }
        if (m == r) {
          // A second self window placed on top of the first.
          if (overlap && first_self_gpa) gpa = *first_self_gpa;
          if (!first_self_gpa) first_self_gpa = gpa;
        }
        maps.Add(names[m], Mapping(gpa, prot));
      }
      if (ch.any_owner && *ch.any_owner == r) {
        Value any = Mapping(gpa_of(c), ch.any_prot);
        any.Add("count", Value::Int(ch.any_count));
        maps.Add("ANY", std::move(any));
      }
      chans.Add(ch.name, std::move(cv));
    }

    Value trans = Value::Object();
    auto own_trans = [&](size_t who, Value* into, const std::string& prefix) {
      into->Add(prefix + "x", TransEntry(names[who], TransType::kException,
                                         {1, 2}, FilterAction::kAllow));
      into->Add(prefix + "c", TransEntry(names[who], TransType::kCall, {3},
                                         gateway[who] ? FilterAction::kAllow
                                                      : FilterAction::kScrub));
    };
    own_trans(r, &trans, "cf");
    // A strict declaration mirrors the peer's control-flow rules.
    for (size_t q : strict) own_trans(q, &trans, "cf" + names[q]);
    Value doc = Value::Object();
    doc.Add("Peers", std::move(peers));
    doc.Add("MemChannels", std::move(chans));
    doc.Add("TransChannels", std::move(trans));
    realm.policy_doc = std::move(doc);
    s.realms.push_back(std::move(realm));
  }

  for (size_t c = 0; c < channels.size(); ++c) {
    const Channel& ch = channels[c];
    s.objects.push_back(ScenarioObject{
        ch.name,
        ch.type == ChannelType::kProtected ? SlotAttribute::kPrivateShared
                                           : SlotAttribute::kShared,
        ch.granules * kGranuleSize});
    for (size_t i = 0; i < ch.members.size(); ++i) {
      size_t m = ch.members[i];
      if (!omit_slot_used[m] && chance(opts.fault_rate / 2)) {
        omit_slot_used[m] = true;
        continue;
      }
      s.slots.push_back(
          ScenarioSlot{names[m], ch.name, gpa_of(c), Rights::RW()});
    }
  }

  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  for (size_t r : order) {
    if (chance(0.1)) continue;  // never uploads
    Value args = Value::Object();
    args.Add("realm", Value::String(names[r]));
    s.actions.push_back(Action(s.actions.size(), "upload_policy", std::move(args)));
  }
  return s;
}

}  // namespace mica
