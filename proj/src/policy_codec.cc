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

// MICAPOL1 binary layout (all integers little-endian). See
// docs/policy-binary.md for the byte-level description.
//
//   magic[8] "MICAPOL1" | version u8
//   peers section:  len u32 | count u16 | count x PeerEntry      (49 B)
//   mem section:    len u32 | count u16 | count x MemEntry       (42 B + 35 B/mapping)
//   trans section:  len u32 | count u16 | count x TransEntry     (52 B + 8 B/id)
//
// `len` counts the bytes after the length field itself.

#include <cstring>

#include "mica/binary_io.h"
#include "mica/policy.h"

namespace mica {
namespace {

constexpr uint8_t kPeerSelf = 1;
constexpr uint8_t kPeerGateway = 2;
constexpr uint8_t kPeerStrict = 4;
constexpr uint8_t kPeerHasHash = 8;
constexpr uint8_t kMappingHasGpa = 1;
constexpr uint8_t kWhoPeer = 0;
constexpr uint8_t kWhoAny = 1;

void EncodePeers(const PolicyConfig& p, ByteWriter* w) {
  ByteWriter body;
  body.U16(static_cast<uint16_t>(p.peers.size()));
  for (const auto& peer : p.peers) {
    body.FixedString(peer.local_id, kMaxLocalIdLength);
    uint8_t flags = 0;
    if (peer.local_id == p.self_id) flags |= kPeerSelf;
    if (peer.is_gateway) flags |= kPeerGateway;
    if (peer.strict) flags |= kPeerStrict;
    if (peer.expected_rim) flags |= kPeerHasHash;
    body.U8(flags);
    body.Raw(peer.expected_rim ? *peer.expected_rim : Digest{});
  }
  w->U32(static_cast<uint32_t>(body.size()));
  w->Raw(body.bytes());
}

void EncodeMem(const PolicyConfig& p, ByteWriter* w) {
  ByteWriter body;
  body.U16(static_cast<uint16_t>(p.mem_channels.size()));
  for (const auto& ch : p.mem_channels) {
    body.FixedString(ch.name, kMaxChannelNameLength);
    body.U64(ch.size);
    body.U8(static_cast<uint8_t>(ch.type));
    body.U8(static_cast<uint8_t>(ch.mappings.size()));
    for (const auto& m : ch.mappings) {
      body.U8(m.any ? kWhoAny : kWhoPeer);
      body.FixedString(m.any ? std::string() : m.who, kMaxLocalIdLength);
      body.U8(m.gpa ? kMappingHasGpa : 0);
      body.U64(m.gpa.value_or(0));
      body.U8(m.prot.bits());
      body.U64(static_cast<uint64_t>(m.count));
    }
  }
  w->U32(static_cast<uint32_t>(body.size()));
  w->Raw(body.bytes());
}

void EncodeTrans(const PolicyConfig& p, ByteWriter* w) {
  ByteWriter body;
  body.U16(static_cast<uint16_t>(p.trans_channels.size()));
  for (const auto& tc : p.trans_channels) {
    body.FixedString(tc.name, kMaxChannelNameLength);
    body.FixedString(tc.owner, kMaxLocalIdLength);
    body.U8(static_cast<uint8_t>(tc.type));
    body.U8(static_cast<uint8_t>(tc.action));
    body.U16(static_cast<uint16_t>(tc.range.size()));
    for (uint64_t id : tc.range) body.U64(id);
  }
  w->U32(static_cast<uint32_t>(body.size()));
  w->Raw(body.bytes());
}

Status Malformed(std::string_view what) {
  return Error(ErrorCode::kBadBlob, std::string(what));
}

// Reads one section and checks that exactly `len` bytes were consumed.
template <typename Fn>
Status ReadSection(ByteReader* r, Fn&& fn) {
  uint32_t len;
  MICA_RETURN_IF_ERROR(r->U32(&len));
  std::span<const uint8_t> body;
  MICA_RETURN_IF_ERROR(r->Span(len, &body));
  ByteReader sub(body);
  MICA_RETURN_IF_ERROR(fn(&sub));
  if (!sub.done()) return Malformed("section length disagrees with entries");
  return Status::Ok();
}

Status DecodePeers(ByteReader* r, PolicyConfig* p) {
  uint16_t count;
  MICA_RETURN_IF_ERROR(r->U16(&count));
  int selves = 0;
  for (uint16_t i = 0; i < count; ++i) {
    PeerSpec peer;
    MICA_RETURN_IF_ERROR(r->FixedString(kMaxLocalIdLength, &peer.local_id));
    uint8_t flags;
    MICA_RETURN_IF_ERROR(r->U8(&flags));
    if (flags & ~(kPeerSelf | kPeerGateway | kPeerStrict | kPeerHasHash)) {
      return Malformed("unknown peer flags");
    }
    Digest hash;
    MICA_RETURN_IF_ERROR(r->Raw(hash));
    if (flags & kPeerHasHash) {
      peer.expected_rim = hash;
    } else if (hash != Digest{}) {
      return Malformed("hash bytes without hash flag");
    }
    peer.is_gateway = flags & kPeerGateway;
    peer.strict = flags & kPeerStrict;
    if (flags & kPeerSelf) {
      ++selves;
      p->self_id = peer.local_id;
    }
    p->peers.push_back(std::move(peer));
  }
  if (selves > 1 || (selves == 0 && count > 0)) {
    return Malformed("exactly one peer must be flagged Self");
  }
  return Status::Ok();
}

Status DecodeMem(ByteReader* r, PolicyConfig* p) {
  uint16_t count;
  MICA_RETURN_IF_ERROR(r->U16(&count));
  for (uint16_t i = 0; i < count; ++i) {
    MemChannelSpec ch;
    MICA_RETURN_IF_ERROR(r->FixedString(kMaxChannelNameLength, &ch.name));
    MICA_RETURN_IF_ERROR(r->U64(&ch.size));
    uint8_t type, nmap;
    MICA_RETURN_IF_ERROR(r->U8(&type));
    if (type > 1) return Malformed("unknown channel type");
    ch.type = static_cast<ChannelType>(type);
    MICA_RETURN_IF_ERROR(r->U8(&nmap));
    for (uint8_t j = 0; j < nmap; ++j) {
      MappingSpec m;
      uint8_t kind, flags, prot;
      uint64_t gpa, cnt;
      MICA_RETURN_IF_ERROR(r->U8(&kind));
      if (kind > kWhoAny) return Malformed("unknown mapping kind");
      m.any = kind == kWhoAny;
      MICA_RETURN_IF_ERROR(r->FixedString(kMaxLocalIdLength, &m.who));
      if (m.any && !m.who.empty()) return Malformed("ANY mapping with a name");
      MICA_RETURN_IF_ERROR(r->U8(&flags));
      if (flags & ~kMappingHasGpa) return Malformed("unknown mapping flags");
      MICA_RETURN_IF_ERROR(r->U64(&gpa));
      if (flags & kMappingHasGpa) {
        m.gpa = gpa;
      } else if (gpa != 0) {
        return Malformed("gpa bytes without gpa flag");
      }
      MICA_RETURN_IF_ERROR(r->U8(&prot));
      if (prot > 7) return Malformed("unknown rights bits");
      m.prot = Rights(prot);
      MICA_RETURN_IF_ERROR(r->U64(&cnt));
      m.count = static_cast<int64_t>(cnt);
      ch.mappings.push_back(std::move(m));
    }
    p->mem_channels.push_back(std::move(ch));
  }
  return Status::Ok();
}

Status DecodeTrans(ByteReader* r, PolicyConfig* p) {
  uint16_t count;
  MICA_RETURN_IF_ERROR(r->U16(&count));
  for (uint16_t i = 0; i < count; ++i) {
    TransChannelSpec tc;
    MICA_RETURN_IF_ERROR(r->FixedString(kMaxChannelNameLength, &tc.name));
    MICA_RETURN_IF_ERROR(r->FixedString(kMaxLocalIdLength, &tc.owner));
    uint8_t type, action;
    MICA_RETURN_IF_ERROR(r->U8(&type));
    MICA_RETURN_IF_ERROR(r->U8(&action));
    if (type > 1 || action > 2) return Malformed("unknown transition encoding");
    tc.type = static_cast<TransType>(type);
    tc.action = static_cast<FilterAction>(action);
    uint16_t n;
    MICA_RETURN_IF_ERROR(r->U16(&n));
    for (uint16_t j = 0; j < n; ++j) {
      uint64_t id;
      MICA_RETURN_IF_ERROR(r->U64(&id));
      tc.range.push_back(id);
    }
    p->trans_channels.push_back(std::move(tc));
  }
  return Status::Ok();
}

}  // namespace

StatusOr<Bytes> EncodePolicy(const PolicyConfig& p, size_t budget) {
  for (const auto& peer : p.peers) {
    if (peer.local_id.size() > kMaxLocalIdLength) {
      return Error(ErrorCode::kInvalidArgument, "local id too long");
    }
  }
  for (const auto& ch : p.mem_channels) {
    if (ch.name.size() > kMaxChannelNameLength || ch.mappings.size() > 255) {
      return Error(ErrorCode::kInvalidArgument, "channel " + ch.name);
    }
  }
  for (const auto& tc : p.trans_channels) {
    if (tc.name.size() > kMaxChannelNameLength ||
        tc.owner.size() > kMaxLocalIdLength || tc.range.size() > 0xffff) {
      return Error(ErrorCode::kInvalidArgument, "channel " + tc.name);
    }
  }
  if (p.peers.size() > 0xffff || p.mem_channels.size() > 0xffff ||
      p.trans_channels.size() > 0xffff) {
    return Error(ErrorCode::kPolicyTooLarge, "too many entries");
  }
  PolicyConfig canonical = p;
  Canonicalize(&canonical);
  ByteWriter w;
  w.Raw(std::span<const uint8_t>(reinterpret_cast<const uint8_t*>(kPolicyMagic),
                                 sizeof(kPolicyMagic)));
  w.U8(kPolicyVersion);
  EncodePeers(canonical, &w);
  EncodeMem(canonical, &w);
  EncodeTrans(canonical, &w);
  if (w.size() > budget) {
    return Error(ErrorCode::kPolicyTooLarge,
                 std::to_string(w.size()) + " bytes exceeds the " +
                     std::to_string(budget) + "-byte policy descriptor");
  }
  return std::move(w).Take();
}

Bytes EncodeEmptyPolicy() { return EncodePolicy(PolicyConfig{}).value(); }

StatusOr<DecodedPolicy> DecodePolicyPrefix(std::span<const uint8_t> blob) {
  size_t magic_len = std::min(blob.size(), sizeof(kPolicyMagic));
  if (std::memcmp(blob.data(), kPolicyMagic, magic_len) != 0) {
    return Error(ErrorCode::kBadMagic);
  }
  ByteReader r(blob);
  std::span<const uint8_t> magic;
  MICA_RETURN_IF_ERROR(r.Span(sizeof(kPolicyMagic), &magic));
  uint8_t version;
  MICA_RETURN_IF_ERROR(r.U8(&version));
  if (version != kPolicyVersion) {
    return Error(ErrorCode::kBadVersion, std::to_string(version));
  }
  DecodedPolicy out;
  MICA_RETURN_IF_ERROR(
      ReadSection(&r, [&](ByteReader* s) { return DecodePeers(s, &out.config); }));
  MICA_RETURN_IF_ERROR(
      ReadSection(&r, [&](ByteReader* s) { return DecodeMem(s, &out.config); }));
  MICA_RETURN_IF_ERROR(
      ReadSection(&r, [&](ByteReader* s) { return DecodeTrans(s, &out.config); }));
  out.consumed = r.offset();
  Canonicalize(&out.config);
  return out;
}

StatusOr<PolicyConfig> DecodePolicy(std::span<const uint8_t> blob) {
  MICA_ASSIGN_OR_RETURN(DecodedPolicy d, DecodePolicyPrefix(blob));
  if (d.consumed != blob.size()) return Malformed("trailing bytes");
  return std::move(d.config);
}

}  // namespace mica
