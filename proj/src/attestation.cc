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

#include "mica/attestation.h"

#include <algorithm>
#include <map>

#include "mica/binary_io.h"
#include "mica/digest.h"
#include "mica/monitor.h"

namespace mica {
namespace {

Status Malformed(std::string what) {
  return Error(ErrorCode::kMalformedToken, std::move(what));
}

template <size_t N>
Status ExpectMagic(ByteReader* r, const char (&magic)[N]) {
  std::array<uint8_t, N> got;
  if (!r->Raw(got).ok() || !std::equal(got.begin(), got.end(), magic)) {
    return Malformed("bad magic");
  }
  return Status::Ok();
}

std::span<const uint8_t> MagicBytes(const char (&m)[8]) {
  return {reinterpret_cast<const uint8_t*>(m), 8};
}

void WriteRecord(ByteWriter* w, const GroupRecord& rec) {
  w->U64(rec.gid);
  w->U8(rec.committed ? 1 : 0);
  w->Raw(rec.rem_base);
  w->Blob(rec.platform_token);
  w->Blob(rec.policy_blob);
  w->U16(static_cast<uint16_t>(rec.channels.size()));
  for (const auto& ch : rec.channels) {
    w->ShortString(ch.name);
    w->U64(ch.key);
    w->U8(ch.active ? 1 : 0);
  }
}

Status ReadRecord(ByteReader* r, GroupRecord* rec) {
  uint8_t committed;
  MICA_RETURN_IF_ERROR(r->U64(&rec->gid));
  MICA_RETURN_IF_ERROR(r->U8(&committed));
  if (committed > 1) return Malformed("committed flag");
  rec->committed = committed == 1;
  MICA_RETURN_IF_ERROR(r->Raw(rec->rem_base));
  MICA_RETURN_IF_ERROR(r->Blob(&rec->platform_token));
  MICA_RETURN_IF_ERROR(r->Blob(&rec->policy_blob));
  uint16_t n;
  MICA_RETURN_IF_ERROR(r->U16(&n));
  for (uint16_t i = 0; i < n; ++i) {
    ChannelFlag ch;
    uint8_t active;
    MICA_RETURN_IF_ERROR(r->ShortString(&ch.name));
    MICA_RETURN_IF_ERROR(r->U64(&ch.key));
    MICA_RETURN_IF_ERROR(r->U8(&active));
    if (active > 1) return Malformed("active flag");
    ch.active = active == 1;
    rec->channels.push_back(std::move(ch));
  }
  return Status::Ok();
}

}  // namespace

// --- platform token ---------------------------------------------------------

Bytes PlatformToken::SignedBytes() const {
  ByteWriter w;
  w.Raw(MagicBytes(kPlatformTokenMagic));
  w.U64(gid);
  w.Raw(rim);
  w.Raw(rem);
  w.ShortString(identity);
  w.Raw(nonce);
  w.ShortString(algorithm);
  return std::move(w).Take();
}

Bytes PlatformToken::Encode() const {
  ByteWriter w;
  w.Raw(SignedBytes());
  w.Blob(signature);
  return std::move(w).Take();
}

StatusOr<PlatformToken> PlatformToken::Decode(std::span<const uint8_t> bytes) {
  ByteReader r(bytes);
  PlatformToken t;
  auto body = [&]() -> Status {
    MICA_RETURN_IF_ERROR(ExpectMagic(&r, kPlatformTokenMagic));
    MICA_RETURN_IF_ERROR(r.U64(&t.gid));
    MICA_RETURN_IF_ERROR(r.Raw(t.rim));
    MICA_RETURN_IF_ERROR(r.Raw(t.rem));
    MICA_RETURN_IF_ERROR(r.ShortString(&t.identity));
    MICA_RETURN_IF_ERROR(r.Raw(t.nonce));
    MICA_RETURN_IF_ERROR(r.ShortString(&t.algorithm));
    MICA_RETURN_IF_ERROR(r.Blob(&t.signature));
    if (!r.done()) return Malformed("trailing bytes in platform token");
    return Status::Ok();
  };
  if (Status st = body(); !st.ok()) {
    return st.code() == ErrorCode::kMalformedToken ? st : Malformed(st.ToString());
  }
  return t;
}

PlatformToken MakePlatformToken(uint64_t gid, const Digest& rim,
                                const Digest& rem, std::string identity,
                                const Digest& nonce, const Signer& signer) {
  PlatformToken t;
  t.gid = gid;
  t.rim = rim;
  t.rem = rem;
  t.identity = std::move(identity);
  t.nonce = nonce;
  t.algorithm = std::string(kDigestAlgorithm);
  t.signature = signer.Sign(t.SignedBytes());
  return t;
}

// --- group token ------------------------------------------------------------

Digest GroupToken::ComputeDigest() const {
  ByteWriter w;
  w.Raw(MagicBytes(kGroupTokenMagic));
  w.Raw(nonce);
  for (const auto& rec : records) WriteRecord(&w, rec);
  return Sha256(w.bytes());
}

Bytes GroupToken::Encode() const {
  ByteWriter w;
  w.Raw(MagicBytes(kGroupTokenMagic));
  w.U8(kGroupTokenVersion);
  w.ShortString(algorithm);
  w.Raw(nonce);
  w.U16(static_cast<uint16_t>(records.size()));
  for (const auto& rec : records) WriteRecord(&w, rec);
  w.Raw(group_digest);
  w.ShortString(signer_algorithm);
  w.Blob(signature);
  return std::move(w).Take();
}

StatusOr<GroupToken> GroupToken::Decode(std::span<const uint8_t> bytes) {
  ByteReader r(bytes);
  GroupToken t;
  auto body = [&]() -> Status {
    MICA_RETURN_IF_ERROR(ExpectMagic(&r, kGroupTokenMagic));
    uint8_t version;
    MICA_RETURN_IF_ERROR(r.U8(&version));
    if (version != kGroupTokenVersion) return Malformed("unknown version");
    MICA_RETURN_IF_ERROR(r.ShortString(&t.algorithm));
    MICA_RETURN_IF_ERROR(r.Raw(t.nonce));
    uint16_t n;
    MICA_RETURN_IF_ERROR(r.U16(&n));
    for (uint16_t i = 0; i < n; ++i) {
      GroupRecord rec;
      MICA_RETURN_IF_ERROR(ReadRecord(&r, &rec));
      t.records.push_back(std::move(rec));
    }
    MICA_RETURN_IF_ERROR(r.Raw(t.group_digest));
    MICA_RETURN_IF_ERROR(r.ShortString(&t.signer_algorithm));
    MICA_RETURN_IF_ERROR(r.Blob(&t.signature));
    if (!r.done()) return Malformed("trailing bytes");
    return Status::Ok();
  };
  if (Status st = body(); !st.ok()) {
    return st.code() == ErrorCode::kMalformedToken ? st : Malformed(st.ToString());
  }
  return t;
}

Bytes SealGroupToken(GroupToken token, const Signer& signer) {
  token.algorithm = std::string(kDigestAlgorithm);
  token.group_digest = token.ComputeDigest();
  token.signer_algorithm = signer.algorithm();
  token.signature = signer.Sign(token.group_digest);
  return token.Encode();
}

StatusOr<VerifiedGroup> VerifyGroupToken(std::span<const uint8_t> bytes,
                                         const Signer& anchor,
                                         const Digest& expected_nonce) {
  MICA_ASSIGN_OR_RETURN(GroupToken t, GroupToken::Decode(bytes));
  std::vector<PlatformToken> platform;
  for (const auto& rec : t.records) {
    MICA_ASSIGN_OR_RETURN(PlatformToken pt,
                          PlatformToken::Decode(rec.platform_token));
    if (pt.gid != rec.gid) return Malformed("record gid mismatch");
    platform.push_back(std::move(pt));
  }

  if (t.ComputeDigest() != t.group_digest) {
    return Error(ErrorCode::kDigestMismatch, "group digest");
  }
  for (size_t i = 0; i < t.records.size(); ++i) {
    const GroupRecord& rec = t.records[i];
    Digest want = rec.committed
                      ? ExtendMeasurement(rec.rem_base, PolicyDigest(rec.policy_blob))
                      : rec.rem_base;
    if (want != platform[i].rem) {
      return Error(ErrorCode::kDigestMismatch,
                   "policy of realm " + std::to_string(rec.gid));
    }
  }

  if (!anchor.Verify(t.group_digest, t.signature)) {
    return Error(ErrorCode::kBadSignature, "group signature");
  }
  for (const auto& pt : platform) {
    if (!anchor.Verify(pt.SignedBytes(), pt.signature)) {
      return Error(ErrorCode::kBadSignature,
                   "platform token of realm " + std::to_string(pt.gid));
    }
  }

  if (t.nonce != expected_nonce) return Error(ErrorCode::kNonceMismatch);
  for (const auto& pt : platform) {
    if (pt.nonce != expected_nonce) {
      return Error(ErrorCode::kNonceMismatch,
                   "platform token of realm " + std::to_string(pt.gid));
    }
  }

  VerifiedGroup out;
  out.nonce = t.nonce;
  std::map<uint64_t, VerifiedChannel> channels;
  for (size_t i = 0; i < t.records.size(); ++i) {
    const GroupRecord& rec = t.records[i];
    VerifiedRealm vr;
    vr.gid = rec.gid;
    vr.rim = platform[i].rim;
    vr.rem = platform[i].rem;
    vr.committed = rec.committed;
    if (rec.committed) {
      auto p = DecodePolicy(rec.policy_blob);
      if (!p.ok()) return Malformed("policy blob: " + p.status().ToString());
      vr.policy = std::move(p).value();
    }
    out.realms.push_back(std::move(vr));
    for (const auto& ch : rec.channels) {
      auto [it, fresh] = channels.try_emplace(ch.key);
      VerifiedChannel& vc = it->second;
      if (fresh) {
        vc.key = ch.key;
        vc.active = ch.active;
      } else if (vc.active != ch.active) {
        return Error(ErrorCode::kInconsistentActivity,
                     "channel " + ch.name + " of realm " + std::to_string(rec.gid));
      }
      vc.names.insert(ch.name);
      vc.members.insert(rec.gid);
    }
  }
  for (auto& [key, vc] : channels) out.channels.push_back(std::move(vc));
  return out;
}

// --- monitor side -----------------------------------------------------------

Bytes Platform::BuildGroupToken(RealmId r, const Digest& nonce) const {
  GroupToken t;
  t.nonce = nonce;
  for (RealmId id : GroupOf(r)) {
    const Realm& m = *realm(id);
    GroupRecord rec;
    rec.gid = id.gid;
    rec.committed = m.committed();
    rec.rem_base = m.committed() ? m.rem_base : m.rem;
    rec.platform_token = MakePlatformToken(id.gid, m.rim, m.rem,
                                           config_.identity, nonce, signer())
                             .Encode();
    if (m.committed()) {
      rec.policy_blob = m.policy_blob;
      for (const auto& b : m.bindings) {
        if (b.type != ChannelType::kProtected) continue;
        const SgtRow* row = sgt_.Find(b.pas.front());
        const SgtEntry* mine = row == nullptr ? nullptr : row->Find(id);
        bool active = mine != nullptr && mine->validated &&
                      std::all_of(b.pas.begin(), b.pas.end(),
                                  [&](GranuleId pa) { return RowActive(pa); });
        rec.channels.push_back(ChannelFlag{b.name, b.pas.front().pa, active});
      }
    }
    t.records.push_back(std::move(rec));
  }
  return SealGroupToken(std::move(t), signer());
}

StatusOr<size_t> Platform::RsiAttestTokenInitGroup(RealmId r,
                                                   const Digest& nonce) {
  auto run = [&]() -> StatusOr<size_t> {
    MICA_ASSIGN_OR_RETURN(Realm * realm, LiveRealm(r));
    Bytes token = BuildGroupToken(r, nonce);
    realm->staged_token = std::move(token);
    realm->staged_cursor = 0;
    realm->has_staged_token = true;
    return realm->staged_token.size();
  };
  auto res = run();
  json::Value a = json::Value::Object();
  a.Add("nonce", json::Value::String(HexEncode(nonce)));
  if (res.ok()) a.Add("size", json::Value::Int(static_cast<int64_t>(*res)));
  log_.Append("RSI_ATTEST_TOKEN_INIT_GROUP", r, std::move(a), res.status());
  return res;
}

StatusOr<size_t> Platform::RsiAttestTokenContinueGroup(RealmId r,
                                                       uint64_t buffer_ipa,
                                                       size_t max) {
  auto run = [&]() -> StatusOr<size_t> {
    MICA_ASSIGN_OR_RETURN(Realm * realm, LiveRealm(r));
    if (!realm->has_staged_token) return Error(ErrorCode::kNoStagedToken);
    size_t n = std::min(max, realm->staged_token.size() - realm->staged_cursor);
    for (uint64_t at = buffer_ipa - buffer_ipa % kGranuleSize;
         at < buffer_ipa + std::max<size_t>(n, 1); at += kGranuleSize) {
      const RttEntry* e = Translate(*realm, at);
      if (e == nullptr || e->kind != MappingKind::kPrivate) {
        return Error(ErrorCode::kNoStagedToken,
                     "buffer is not in private memory");
      }
    }
    size_t done = 0;
    while (done < n) {
      uint64_t at = buffer_ipa + done;
      const RttEntry* e = Translate(*realm, at);
      uint64_t off = at % kGranuleSize;
      size_t k = std::min<size_t>(n - done, kGranuleSize - off);
      space_.Write(e->pa, off,
                   std::span<const uint8_t>(
                       realm->staged_token.data() + realm->staged_cursor + done, k));
      done += k;
    }
    realm->staged_cursor += n;
    return n;
  };
  auto res = run();
  json::Value a = json::Value::Object();
  char buf[24];
  std::snprintf(buf, sizeof(buf), "0x%llx",
                static_cast<unsigned long long>(buffer_ipa));
  a.Add("buffer_ipa", json::Value::String(buf));
  a.Add("max", json::Value::Int(static_cast<int64_t>(max)));
  if (res.ok()) a.Add("written", json::Value::Int(static_cast<int64_t>(*res)));
  log_.Append("RSI_ATTEST_TOKEN_CONTINUE_GROUP", r, std::move(a), res.status());
  return res;
}

}  // namespace mica
