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

#include "mica/policy.h"

#include <algorithm>
#include <set>

#include "mica/digest.h"

namespace mica {

std::string_view ChannelTypeName(ChannelType t) {
  return t == ChannelType::kProtected ? "PROTECTED" : "UNPROTECTED";
}

std::string_view TransTypeName(TransType t) {
  return t == TransType::kCall ? "call" : "exception";
}

std::string_view FilterActionName(FilterAction a) {
  switch (a) {
    case FilterAction::kAllow: return "ALLOW";
    case FilterAction::kScrub: return "SCRUB";
    case FilterAction::kBlock: return "BLOCK";
  }
  return "?";
}

const MappingSpec* MemChannelSpec::FindMapping(std::string_view local_id) const {
  for (const auto& m : mappings) {
    if (!m.any && m.who == local_id) return &m;
  }
  return nullptr;
}

const MappingSpec* MemChannelSpec::FindAny() const {
  for (const auto& m : mappings) {
    if (m.any) return &m;
  }
  return nullptr;
}

bool TransChannelSpec::Covers(uint64_t id) const {
  return std::binary_search(range.begin(), range.end(), id);
}

const PeerSpec* PolicyConfig::FindPeer(std::string_view local_id) const {
  for (const auto& p : peers) {
    if (p.local_id == local_id) return &p;
  }
  return nullptr;
}

const MemChannelSpec* PolicyConfig::FindMemChannel(std::string_view name) const {
  for (const auto& c : mem_channels) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

bool PolicyConfig::HoldsGatewayCapabilities() const {
  for (const auto& ch : mem_channels) {
    if (ch.type == ChannelType::kUnprotected && SelfMapping(ch) != nullptr) {
      return true;
    }
  }
  for (const auto& tc : trans_channels) {
    if (tc.owner == self_id && tc.type == TransType::kCall &&
        tc.action == FilterAction::kAllow) {
      return true;
    }
  }
  return false;
}

void Canonicalize(PolicyConfig* p) {
  std::sort(p->peers.begin(), p->peers.end(),
            [](const PeerSpec& a, const PeerSpec& b) {
              return a.local_id < b.local_id;
            });
  for (auto& ch : p->mem_channels) {
    std::sort(ch.mappings.begin(), ch.mappings.end(),
              [](const MappingSpec& a, const MappingSpec& b) {
                if (a.any != b.any) return !a.any;
                return a.who < b.who;
              });
  }
  std::sort(p->mem_channels.begin(), p->mem_channels.end(),
            [](const MemChannelSpec& a, const MemChannelSpec& b) {
              return a.name < b.name;
            });
  for (auto& tc : p->trans_channels) {
    std::sort(tc.range.begin(), tc.range.end());
    tc.range.erase(std::unique(tc.range.begin(), tc.range.end()),
                   tc.range.end());
  }
  std::sort(p->trans_channels.begin(), p->trans_channels.end(),
            [](const TransChannelSpec& a, const TransChannelSpec& b) {
              return a.name < b.name;
            });
}

namespace {

Status Schema(std::string path, std::string_view what) {
  return Error(ErrorCode::kSchemaError, path + ": " + std::string(what));
}

bool IsReservedId(std::string_view id) {
  return id == "SELF" || id == "Self" || id == "ANY" || id == "any" ||
         id == "self";
}

}  // namespace

Status CheckPolicyStructure(const PolicyConfig& p, StructureCheck mode) {
  std::set<std::string> ids;
  for (const auto& peer : p.peers) {
    if (peer.local_id.empty() || peer.local_id.size() > kMaxLocalIdLength ||
        IsReservedId(peer.local_id)) {
      return Schema("Peers." + peer.local_id, "invalid local id");
    }
    if (!ids.insert(peer.local_id).second) {
      return Error(ErrorCode::kDuplicatePeer, peer.local_id);
    }
  }
  if (p.self() == nullptr) {
    return Schema("Peers.Self", "Self must name a declared peer");
  }

  std::set<std::string> names;
  for (const auto& ch : p.mem_channels) {
    std::string path = "MemChannels." + ch.name;
    if (ch.name.empty() || ch.name.size() > kMaxChannelNameLength) {
      return Schema(path, "invalid channel name");
    }
    if (!names.insert(ch.name).second) return Schema(path, "duplicate channel");
    if (ch.size < kGranuleSize || ch.size % kGranuleSize != 0) {
      return Schema(path + ".size", "must be a positive multiple of 4096");
    }
    std::set<std::string> who;
    bool any_seen = false;
    for (const auto& m : ch.mappings) {
      std::string mpath = path + ".mappings." + (m.any ? "ANY" : m.who);
      if (m.any) {
        if (any_seen) return Error(ErrorCode::kDuplicateMapping, mpath);
        any_seen = true;
      } else {
        if (p.FindPeer(m.who) == nullptr) {
          return Schema(mpath, "unknown peer");
        }
        if (!who.insert(m.who).second) {
          return Error(ErrorCode::kDuplicateMapping, mpath);
        }
        if (m.count != 0) return Schema(mpath, "count is only valid for ANY");
      }
      if (m.prot.empty()) return Schema(mpath + ".prot", "must be non-empty");
      if (m.gpa && !IsGranuleAligned(*m.gpa)) {
        return Schema(mpath + ".gpa", "must be granule-aligned");
      }
    }
  }

  for (const auto& tc : p.trans_channels) {
    std::string path = "TransChannels." + tc.name;
    if (tc.name.empty() || tc.name.size() > kMaxChannelNameLength) {
      return Schema(path, "invalid channel name");
    }
    if (!names.insert(tc.name).second) return Schema(path, "duplicate channel");
    if (p.FindPeer(tc.owner) == nullptr) {
      return Schema(path + ".owner", "unknown peer");
    }
    if (tc.range.empty()) return Error(ErrorCode::kEmptyRange, path);
  }
  for (size_t i = 0; i < p.trans_channels.size(); ++i) {
    for (size_t j = i + 1; j < p.trans_channels.size(); ++j) {
      const auto& a = p.trans_channels[i];
      const auto& b = p.trans_channels[j];
      if (a.owner != b.owner || a.type != b.type) continue;
      for (uint64_t id : a.range) {
        if (b.Covers(id)) {
          return Schema("TransChannels." + b.name + ".range",
                        "overlaps " + a.name);
        }
      }
    }
  }

  if (mode == StructureCheck::kAuthoring && !p.self()->is_gateway &&
      p.HoldsGatewayCapabilities()) {
    return Schema("Peers." + p.self_id,
                  "a non-gateway Self may not hold unprotected mappings or "
                  "allow explicit calls");
  }
  return Status::Ok();
}

Digest PolicyDigest(std::span<const uint8_t> blob) { return Sha256(blob); }

}  // namespace mica
