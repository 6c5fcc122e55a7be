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

#include "mica/flow_oracle.h"

#include <cstring>

namespace mica {
namespace {

constexpr size_t kMarkerSize = 16;

std::array<uint8_t, kMarkerSize> Marker(RealmId source, uint64_t ipa) {
  std::array<uint8_t, kMarkerSize> m{};
  std::memcpy(m.data(), "FLW", 3);
  m[3] = 0xa5;
  for (int i = 0; i < 4; ++i) m[4 + i] = static_cast<uint8_t>(source.gid >> (8 * i));
  for (int i = 0; i < 8; ++i) m[8 + i] = static_cast<uint8_t>(ipa >> (8 * i));
  return m;
}

bool CarriesMarkerFrom(const Bytes& page, RealmId source) {
  if (page.size() < kMarkerSize) return false;
  auto want = Marker(source, 0);
  return std::memcmp(page.data(), want.data(), 8) == 0;
}

std::string Name(RealmId r) {
  return r == kHostSink ? std::string("host") : std::to_string(r.gid);
}

}  // namespace

bool FlowMatrix::Has(RealmId source, RealmId sink) const {
  auto it = edges.find(source);
  return it != edges.end() && it->second.count(sink) != 0;
}

std::vector<std::string> FlowMatrix::Difference(const FlowMatrix& other) const {
  std::vector<std::string> out;
  for (const auto& [src, sinks] : edges) {
    for (RealmId sink : sinks) {
      if (!other.Has(src, sink)) out.push_back(Name(src) + "->" + Name(sink));
    }
  }
  return out;
}

json::Value FlowMatrix::ToJson() const {
  json::Value out = json::Value::Array();
  for (const auto& [src, sinks] : edges) {
    for (RealmId sink : sinks) {
      json::Value e = json::Value::Object();
      e.Add("from", json::Value::String(Name(src)));
      e.Add("to", json::Value::String(Name(sink)));
      out.Push(std::move(e));
    }
  }
  return out;
}

FlowMatrix ComputeFlowOracle(const Platform& platform) {
  FlowMatrix out;
  for (RealmId s : platform.realm_ids()) {
    const Realm* src = platform.realm(s);
    if (!src->alive()) continue;
    Platform scratch = platform;
    for (const auto& [ipa, e] : src->rtt) {
      auto m = Marker(s, ipa);
      (void)scratch.RealmWrite(s, ipa, m);
    }
    for (RealmId t : scratch.realm_ids()) {
      if (t == s) continue;
      const Realm* sink = scratch.realm(t);
      if (!sink->alive()) continue;
      for (const auto& [ipa, e] : sink->rtt) {
        auto page = scratch.RealmRead(t, ipa, kMarkerSize);
        if (page.ok() && CarriesMarkerFrom(*page, s)) {
          out.Add(s, t);
          break;
        }
      }
    }
    const GranuleSpace& space = scratch.granules();
    for (uint64_t i = 0; i < space.granule_count(); ++i) {
      auto page = scratch.HostRead(GranuleId::FromIndex(i), 0, kMarkerSize);
      if (page.ok() && CarriesMarkerFrom(*page, s)) {
        out.Add(s, kHostSink);
        break;
      }
    }
  }
  return out;
}

FlowMatrix DeriveFlowMatrix(const Platform& platform) {
  FlowMatrix out;
  for (const auto& ch : platform.Channels()) {
    if (!ch.active) continue;
    for (RealmId a : ch.peers) {
      const ChannelBinding* ab = platform.realm(a)->BindingForPa(ch.pas.front());
      if (ab == nullptr || !ab->rights.can_write()) continue;
      for (RealmId b : ch.peers) {
        if (a == b) continue;
        const ChannelBinding* bb = platform.realm(b)->BindingForPa(ch.pas.front());
        if (bb != nullptr && bb->rights.can_read()) out.Add(a, b);
      }
    }
  }
  // Unprotected memory: the host always sees it; other realms see it when
  // they map the same page with read rights.
  std::map<GranuleId, std::vector<std::pair<RealmId, Rights>>> unprotected;
  for (RealmId r : platform.realm_ids()) {
    const Realm* realm = platform.realm(r);
    if (!realm->alive()) continue;
    for (const auto& [ipa, e] : realm->rtt) {
      if (e.kind == MappingKind::kUnprotected) {
        unprotected[e.pa].emplace_back(r, e.rights);
      }
    }
  }
  for (const auto& [pa, users] : unprotected) {
    for (const auto& [a, ra] : users) {
      if (!ra.can_write()) continue;
      out.Add(a, kHostSink);
      for (const auto& [b, rb] : users) {
        if (a != b && rb.can_read()) out.Add(a, b);
      }
    }
  }
  return out;
}

}  // namespace mica
