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


#include <gtest/gtest.h>

#include "mica/attestation.h"
#include "mica/digest.h"
#include "mica/scenario.h"
#include "test_util.h"

namespace mica {
namespace {

using testing::Map;
using testing::PolicyBuilder;
using testing::ToBytes;

constexpr uint64_t kIpa = 0x1'0000'0000;

Digest Nonce(std::string_view s) { return Sha256(ToBytes(s)); }

class AttestationTest : public testing::PlatformFixture {
 protected:
  // Two realms sharing one RW page, both committed.
  std::pair<RealmId, RealmId> Pair(std::string_view tag) {
    RealmId a = Launch(std::string(tag) + " a");
    RealmId b = Launch(std::string(tag) + " b");
    auto page = Object(1);
    EXPECT_TRUE(vmm_.AddSlot(a, kIpa, SlotAttribute::kPrivateShared, page).ok());
    EXPECT_TRUE(vmm_.AddSlot(b, kIpa, SlotAttribute::kPrivateShared, page).ok());
    auto policy = [&](std::string self) {
      return PolicyBuilder(self)
          .Peer("a", Rim(a))
          .Peer("b", Rim(b))
          .Channel("link", kGranuleSize,
                   {Map("a", kIpa, Rights::RW()), Map("b", kIpa, Rights::RW())})
          .Build();
    };
    EXPECT_TRUE(Upload(a, policy("a")).ok());
    EXPECT_TRUE(Upload(b, policy("b")).ok());
    return {a, b};
  }

  StatusOr<VerifiedGroup> Verify(const Bytes& token, const Digest& nonce) {
    return VerifyGroupToken(token, platform_.signer(), nonce);
  }
};

std::set<uint64_t> Gids(const VerifiedGroup& g) {
  std::set<uint64_t> out;
  for (const auto& r : g.realms) out.insert(r.gid);
  return out;
}

TEST_F(AttestationTest, IsolatedRealmIsSingletonGroup) {
  RealmId r = Launch("alone");
  ASSERT_TRUE(Upload(r, PolicyBuilder("S").Peer("S", std::nullopt).Build()).ok());
  EXPECT_EQ(platform_.GroupOf(r), std::vector<RealmId>{r});
  Digest n = Nonce("one");
  auto g = Verify(platform_.BuildGroupToken(r, n), n);
  ASSERT_TRUE(g.ok()) << g.status().ToString();
  ASSERT_EQ(g->realms.size(), 1u);
  EXPECT_EQ(g->realms[0].gid, r.gid);
  EXPECT_EQ(g->realms[0].rim, Rim(r));
  EXPECT_EQ(g->realms[0].rem, platform_.realm(r)->rem);
  EXPECT_TRUE(g->realms[0].committed);
  EXPECT_TRUE(g->channels.empty());
}

TEST_F(AttestationTest, UncommittedRealmIsReportedAsSuch) {
  RealmId r = Launch("fresh");
  Digest n = Nonce("fresh");
  auto g = Verify(platform_.BuildGroupToken(r, n), n);
  ASSERT_TRUE(g.ok());
  ASSERT_EQ(g->realms.size(), 1u);
  EXPECT_FALSE(g->realms[0].committed);
  EXPECT_FALSE(g->realms[0].policy);
}

TEST_F(AttestationTest, DisjointPairs) {
  auto [a, b] = Pair("left");
  auto [c, d] = Pair("right");
  Digest n = Nonce("pairs");
  auto ga = Verify(platform_.BuildGroupToken(a, n), n);
  auto gc = Verify(platform_.BuildGroupToken(c, n), n);
  ASSERT_TRUE(ga.ok() && gc.ok());
  EXPECT_EQ(Gids(*ga), (std::set<uint64_t>{a.gid, b.gid}));
  EXPECT_EQ(Gids(*gc), (std::set<uint64_t>{c.gid, d.gid}));
  ASSERT_EQ(ga->channels.size(), 1u);
  EXPECT_TRUE(ga->channels[0].active);
  EXPECT_EQ(ga->channels[0].members, (std::set<uint64_t>{a.gid, b.gid}));
  EXPECT_EQ(ga->channels[0].names, std::set<std::string>{"link"});
}

TEST_F(AttestationTest, SameGroupTokensAreEqual) {
  auto [a, b] = Pair("eq");
  Digest n = Nonce("same");
  EXPECT_EQ(platform_.BuildGroupToken(a, n), platform_.BuildGroupToken(b, n));
  EXPECT_NE(platform_.BuildGroupToken(a, n),
            platform_.BuildGroupToken(a, Nonce("other")));
}

// A committed singleton on its own platform, with `peers` unreferenced peers
// and `pad` extra bytes of platform identity, to steer the token size.
struct PaddedRealm {
  std::unique_ptr<Platform> platform;
  RealmId realm;
};

PaddedRealm MakePadded(size_t peers, size_t pad) {
  PaddedRealm out;
  out.platform = std::make_unique<Platform>(PlatformConfig{
      .granule_count = 32, .identity = "sim" + std::string(pad, '.')});
  Vmm vmm(out.platform.get());
  out.realm = *vmm.LaunchRealm(ToBytes("padded"), 2);
  PolicyBuilder pb("S");
  pb.Peer("S", std::nullopt);
  for (size_t i = 0; i < peers; ++i) pb.Peer("p" + std::to_string(i), Digest{});
  EXPECT_TRUE(
      GuestUploadPolicy(out.platform.get(), out.realm, *EncodePolicy(pb.Build()))
          .ok());
  return out;
}

TEST(ChunkingTest, ExactlyThreeThousandBytesIn1024Chunks) {
  Digest nonce = Nonce("chunks");
  auto size = [&](size_t peers, size_t pad) {
    PaddedRealm p = MakePadded(peers, pad);
    return p.platform->BuildGroupToken(p.realm, nonce).size();
  };
  size_t peers = 0;
  while (size(peers + 1, 0) <= 3000) ++peers;
  size_t pad = 3000 - size(peers, 0);

  PaddedRealm p = MakePadded(peers, pad);
  Platform& pf = *p.platform;
  auto total = pf.RsiAttestTokenInitGroup(p.realm, nonce);
  ASSERT_TRUE(total.ok());
  ASSERT_EQ(*total, 3000u);
  std::vector<size_t> writes;
  Bytes assembled;
  for (int i = 0; i < 4; ++i) {
    auto n = pf.RsiAttestTokenContinueGroup(p.realm, kPrivateIpaBase, 1024);
    ASSERT_TRUE(n.ok());
    writes.push_back(*n);
    auto chunk = pf.RealmRead(p.realm, kPrivateIpaBase, *n);
    ASSERT_TRUE(chunk.ok());
    assembled.insert(assembled.end(), chunk->begin(), chunk->end());
  }
  EXPECT_EQ(writes, (std::vector<size_t>{1024, 1024, 952, 0}));
  EXPECT_EQ(assembled, pf.BuildGroupToken(p.realm, nonce));
  EXPECT_TRUE(VerifyGroupToken(assembled, pf.signer(), nonce).ok());
}

TEST_F(AttestationTest, InitRestartsStaging) {
  auto [a, b] = Pair("restart");
  Digest n = Nonce("restart");
  ASSERT_TRUE(platform_.RsiAttestTokenInitGroup(a, n).ok());
  ASSERT_TRUE(platform_.RsiAttestTokenContinueGroup(a, kPrivateIpaBase, 100).ok());
  ASSERT_TRUE(platform_.RsiAttestTokenInitGroup(a, n).ok());
  auto k = platform_.RsiAttestTokenContinueGroup(a, kPrivateIpaBase, 100);
  ASSERT_TRUE(k.ok());
  Bytes head = *platform_.RealmRead(a, kPrivateIpaBase, 100);
  Bytes want = platform_.BuildGroupToken(a, n);
  EXPECT_EQ(head, Bytes(want.begin(), want.begin() + 100));
}

TEST_F(AttestationTest, ContinueGuards) {
  auto [a, b] = Pair("guards");
  EXPECT_EQ(platform_.RsiAttestTokenContinueGroup(a, kPrivateIpaBase, 64).code(),
            ErrorCode::kNoStagedToken);
  ASSERT_TRUE(platform_.RsiAttestTokenInitGroup(a, Nonce("g")).ok());
  // The shared channel page is not private memory.
  EXPECT_EQ(platform_.RsiAttestTokenContinueGroup(a, kIpa, 64).code(),
            ErrorCode::kNoStagedToken);
  EXPECT_EQ(platform_.RsiAttestTokenContinueGroup(a, 0x7'0000'0000, 64).code(),
            ErrorCode::kNoStagedToken);
  // A buffer running off the end of private memory is refused as a whole.
  EXPECT_EQ(platform_
                .RsiAttestTokenContinueGroup(
                    a, kPrivateIpaBase + 2 * kGranuleSize - 10, 64)
                .code(),
            ErrorCode::kNoStagedToken);
}

TEST_F(AttestationTest, VerifyErrors) {
  auto [a, b] = Pair("verify");
  Digest n = Nonce("fresh");
  Bytes token = platform_.BuildGroupToken(a, n);
  ASSERT_TRUE(Verify(token, n).ok());

  EXPECT_EQ(Verify(token, Nonce("stale")).code(), ErrorCode::kNonceMismatch);

  auto other = KeyedDigestSigner::FromSeed("another platform");
  EXPECT_EQ(VerifyGroupToken(token, *other, n).code(), ErrorCode::kBadSignature);

  auto decoded = GroupToken::Decode(token);
  ASSERT_TRUE(decoded.ok());
  GroupToken bad = *decoded;
  bad.records[0].policy_blob[20] ^= 0x01;
  EXPECT_EQ(Verify(bad.Encode(), n).code(), ErrorCode::kDigestMismatch);

  // Re-sealed with the right key but claiming an inactive channel.
  GroupToken flipped = *decoded;
  flipped.records[0].channels[0].active = false;
  EXPECT_EQ(Verify(SealGroupToken(flipped, platform_.signer()), n).code(),
            ErrorCode::kInconsistentActivity);

  Bytes cut(token.begin(), token.begin() + token.size() / 2);
  EXPECT_EQ(Verify(cut, n).code(), ErrorCode::kMalformedToken);
}

TEST_F(AttestationTest, EverySignatureBitMatters) {
  auto [a, b] = Pair("sig");
  Digest n = Nonce("sig");
  auto decoded = GroupToken::Decode(platform_.BuildGroupToken(a, n));
  ASSERT_TRUE(decoded.ok());
  for (size_t bit = 0; bit < decoded->signature.size() * 8; bit += 7) {
    GroupToken t = *decoded;
    t.signature[bit / 8] ^= static_cast<uint8_t>(1u << (bit % 8));
    EXPECT_EQ(Verify(t.Encode(), n).code(), ErrorCode::kBadSignature) << bit;
  }
}

TEST_F(AttestationTest, PlatformTokenRoundTrip) {
  RealmId r = Launch("pt");
  const Realm* realm = platform_.realm(r);
  PlatformToken t = MakePlatformToken(r.gid, realm->rim, realm->rem,
                                      "test-platform", Nonce("pt"),
                                      platform_.signer());
  EXPECT_EQ(t.algorithm, "sha-256");
  EXPECT_TRUE(platform_.signer().Verify(t.SignedBytes(), t.signature));
  auto back = PlatformToken::Decode(t.Encode());
  ASSERT_TRUE(back.ok());
  EXPECT_EQ(back->gid, r.gid);
  EXPECT_EQ(back->rim, realm->rim);
  EXPECT_EQ(back->identity, "test-platform");
  EXPECT_EQ(back->Encode(), t.Encode());
}

TEST(PipelineAttestationTest, GraphMatchesTopology) {
  ScenarioRunner runner(testing::MustLoadScenario("scenarios/pipeline.json"));
  ScenarioReport report = runner.Run();
  ASSERT_TRUE(report.passed()) << testing::Describe(report);
  RealmId g = *runner.RealmByName("G");
  RealmId e = *runner.RealmByName("E");
  RealmId n = *runner.RealmByName("N");
  Digest nonce = Nonce("graph");
  auto token = runner.RetrieveToken(g, nonce);
  ASSERT_TRUE(token.ok());
  auto vg = VerifyGroupToken(*token, runner.signer(), nonce);
  ASSERT_TRUE(vg.ok()) << vg.status().ToString();
  EXPECT_EQ(Gids(*vg), (std::set<uint64_t>{g.gid, e.gid, n.gid}));
  std::map<std::string, std::set<uint64_t>> edges;
  for (const auto& ch : vg->channels) {
    EXPECT_TRUE(ch.active);
    ASSERT_EQ(ch.names.size(), 1u);
    edges[*ch.names.begin()] = ch.members;
  }
  EXPECT_EQ(edges, (std::map<std::string, std::set<uint64_t>>{
                       {"ge", {g.gid, e.gid}},
                       {"en", {e.gid, n.gid}},
                       {"ng", {n.gid, g.gid}},
                   }));
  for (const auto& r : vg->realms) {
    ASSERT_TRUE(r.policy);
    EXPECT_EQ(r.rim, runner.const_platform().realm(RealmId{r.gid})->rim);
  }
}

}  // namespace
}  // namespace mica
