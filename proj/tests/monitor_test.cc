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

#include "mica/flow_oracle.h"
#include "mica/monitor.h"
#include "test_util.h"

namespace mica {
namespace {

using testing::Map;
using testing::MapAny;
using testing::PolicyBuilder;
using testing::ToBytes;

constexpr uint64_t kIpa = 0x1'0000'0000;

class MonitorTest : public testing::PlatformFixture {
 protected:
  // A realm created straight through the RMI surface, without a PD.
  RealmId BareRealm(std::string_view image) {
    auto g = vmm_.AllocateGranules(1);
    EXPECT_TRUE(g.ok());
    EXPECT_TRUE(platform_.DelegateGranule((*g)[0]).ok());
    auto r = platform_.CreateRealm(ToBytes(image), *g);
    EXPECT_TRUE(r.ok());
    return *r;
  }

  GranuleId Delegated() {
    auto g = vmm_.AllocateGranules(1);
    EXPECT_TRUE(g.ok());
    EXPECT_TRUE(platform_.DelegateGranule((*g)[0]).ok());
    return (*g)[0];
  }
};

TEST_F(MonitorTest, RealmPdHoldsEmptyPolicy) {
  RealmId r = BareRealm("pd");
  GranuleId g = Delegated();
  ASSERT_TRUE(platform_.RmiRealmPd(r, g).ok());
  EXPECT_EQ(platform_.realm(r)->pd, g);
  EXPECT_EQ(platform_.granules().tag(g), GranuleTag::kPd);
  Bytes page = platform_.granules().ReadPage(g);
  Bytes empty = EncodeEmptyPolicy();
  EXPECT_TRUE(std::equal(empty.begin(), empty.end(), page.begin()));
  EXPECT_EQ(platform_.HostRead(g, 0, 8).code(), ErrorCode::kFault);
}

TEST_F(MonitorTest, RealmPdTwice) {
  RealmId r = BareRealm("pd");
  ASSERT_TRUE(platform_.RmiRealmPd(r, Delegated()).ok());
  EXPECT_EQ(platform_.RmiRealmPd(r, Delegated()).code(),
            ErrorCode::kPdAlreadySet);
}

TEST_F(MonitorTest, RealmPdNeedsDelegatedGranule) {
  RealmId r = BareRealm("pd");
  RealmId other = Launch("other");
  GranuleId priv = platform_.realm(other)->PrivatePas().front();
  EXPECT_EQ(platform_.RmiRealmPd(r, priv).code(),
            ErrorCode::kGranuleNotDelegated);
}

TEST_F(MonitorTest, UploadWithoutPd) {
  RealmId r = BareRealm("no pd");
  Bytes blob = *EncodePolicy(PolicyBuilder("A").Peer("A", std::nullopt).Build());
  ASSERT_TRUE(platform_.RealmWrite(r, kPrivateIpaBase, blob).ok());
  EXPECT_EQ(platform_.RsiUploadPolicy(r, kPrivateIpaBase).code(),
            ErrorCode::kNoPd);
  EXPECT_TRUE(platform_.realm(r)->alive());
}

TEST_F(MonitorTest, SgtCapacityFromRowLayout) {
  EXPECT_EQ(SharedGranuleTable::kSlotsPerGranule,
            kGranuleSize / SharedGranuleTable::kRowBytes);
  EXPECT_EQ(SharedGranuleTable::kSlotsPerGranule, 36u);
  ASSERT_TRUE(platform_.RmiSgt(Delegated()).ok());
  EXPECT_EQ(platform_.sgt().capacity_slots(), 36u);
  ASSERT_TRUE(platform_.RmiSgt(Delegated()).ok());
  EXPECT_EQ(platform_.sgt().capacity_slots(), 72u);
}

TEST_F(MonitorTest, SgtFullWithoutMoreStorage) {
  RealmId r = BareRealm("sgt");
  ASSERT_TRUE(platform_.RmiSgt(Delegated()).ok());
  for (size_t i = 0; i < SharedGranuleTable::kSlotsPerGranule; ++i) {
    ASSERT_TRUE(platform_
                    .RmiDataCreateUnknownShared(r, Delegated(),
                                                kIpa + i * kGranuleSize)
                    .ok())
        << i;
  }
  GranuleId extra = Delegated();
  uint64_t next = kIpa + SharedGranuleTable::kSlotsPerGranule * kGranuleSize;
  EXPECT_EQ(platform_.RmiDataCreateUnknownShared(r, extra, next).code(),
            ErrorCode::kSgtFull);
  ASSERT_TRUE(platform_.RmiSgt(Delegated()).ok());
  EXPECT_TRUE(platform_.RmiDataCreateUnknownShared(r, extra, next).ok());
}

TEST_F(MonitorTest, CreateUnknownSharedAddsUnvalidatedEntries) {
  RealmId a = Launch("A");
  RealmId b = Launch("B");
  auto obj = Object(1);
  ASSERT_TRUE(vmm_.AddSlot(a, kIpa, SlotAttribute::kPrivateShared, obj).ok());
  ASSERT_TRUE(
      vmm_.AddSlot(b, kIpa + 0x5000, SlotAttribute::kPrivateShared, obj).ok());
  const SgtRow* row = platform_.sgt().Find(obj[0]);
  ASSERT_NE(row, nullptr);
  ASSERT_EQ(row->entries.size(), 2u);
  for (const SgtEntry& e : row->entries) EXPECT_FALSE(e.validated);
  EXPECT_EQ(platform_.granules().tag(obj[0]), GranuleTag::kProtectedShared);
  EXPECT_EQ(platform_.RealmRead(a, kIpa, 1).code(), ErrorCode::kFault);
  EXPECT_EQ(platform_.RealmWrite(b, kIpa + 0x5000, Bytes(1, 1)).code(),
            ErrorCode::kFault);
}

TEST_F(MonitorTest, AliasedInRealm) {
  RealmId a = Launch("A");
  auto obj = Object(1);
  ASSERT_TRUE(vmm_.AddSlot(a, kIpa, SlotAttribute::kPrivateShared, obj).ok());
  EXPECT_EQ(platform_.RmiDataCreateUnknownShared(a, obj[0], kIpa + 0x1000).code(),
            ErrorCode::kAliasedInRealm);
}

TEST_F(MonitorTest, MappingAfterLockdown) {
  RealmId a = Launch("A");
  ASSERT_TRUE(Upload(a, PolicyBuilder("A").Peer("A", std::nullopt).Build()).ok());
  auto prot = Object(1);
  auto shared = Object(1, SlotAttribute::kShared);
  EXPECT_EQ(platform_.RmiDataCreateUnknownShared(a, prot[0], kIpa).code(),
            ErrorCode::kLockedDown);
  EXPECT_EQ(platform_.RmiMapUnprotected(a, shared[0], kIpa, Rights::RW()).code(),
            ErrorCode::kLockedDown);
  EXPECT_EQ(platform_.RmiRttUnmap(a, kIpa).code(), ErrorCode::kLockedDown);
}

TEST_F(MonitorTest, UnprotectedSharedMemory) {
  RealmId a = Launch("A");
  auto nic = Object(1, SlotAttribute::kShared);
  ASSERT_TRUE(platform_.RmiMapUnprotected(a, nic[0], kIpa, Rights::RW()).ok());
  ASSERT_TRUE(platform_.HostWrite(nic[0], 16, ToBytes("from host")).ok());
  auto got = platform_.RealmRead(a, kIpa + 16, 9);
  ASSERT_TRUE(got.ok());
  EXPECT_EQ(*got, ToBytes("from host"));
}

TEST_F(MonitorTest, UncoveredUnprotectedRegionIsUnmapped) {
  RealmId a = Launch("A");
  auto nic = Object(2, SlotAttribute::kShared);
  ASSERT_TRUE(platform_.RmiMapUnprotected(a, nic[0], kIpa, Rights::RW()).ok());
  ASSERT_TRUE(
      platform_.RmiMapUnprotected(a, nic[1], kIpa + 0x10000, Rights::RW()).ok());
  // The policy covers only the first page.
  PolicyConfig p = PolicyBuilder("A")
                       .Peer("A", std::nullopt, /*gateway=*/true)
                       .Channel("nic", kGranuleSize,
                                {Map("A", kIpa, Rights::RW())},
                                ChannelType::kUnprotected)
                       .Build();
  ASSERT_TRUE(Upload(a, p).ok());
  const Realm* realm = platform_.realm(a);
  EXPECT_NE(realm->rtt.find(kIpa), realm->rtt.end());
  EXPECT_EQ(realm->rtt.find(kIpa + 0x10000), realm->rtt.end());
  EXPECT_EQ(platform_.RealmRead(a, kIpa + 0x10000, 1).code(), ErrorCode::kFault);
  EXPECT_TRUE(platform_.RealmRead(a, kIpa, 1).ok());
}

TEST_F(MonitorTest, UnprotectedRightsNarrowToPolicy) {
  RealmId a = Launch("A");
  auto nic = Object(1, SlotAttribute::kShared);
  ASSERT_TRUE(platform_.RmiMapUnprotected(a, nic[0], kIpa, Rights::RW()).ok());
  PolicyConfig p = PolicyBuilder("A")
                       .Peer("A", std::nullopt, true)
                       .Channel("nic", kGranuleSize, {Map("A", kIpa, Rights::R())},
                                ChannelType::kUnprotected)
                       .Build();
  ASSERT_TRUE(Upload(a, p).ok());
  EXPECT_TRUE(platform_.RealmRead(a, kIpa, 1).ok());
  EXPECT_EQ(platform_.RealmWrite(a, kIpa, Bytes(1, 1)).code(), ErrorCode::kFault);
}

class PairTest : public MonitorTest {
 protected:
  static constexpr uint64_t kGpa = 0x180'0000'0000;
  void SetUp() override {
    p1_ = Launch("gateway P1");
    p2_ = Launch("worker P2");
    mem_ = Object(4);
    ASSERT_TRUE(vmm_.AddSlot(p1_, kGpa, SlotAttribute::kPrivateShared, mem_).ok());
    ASSERT_TRUE(vmm_.AddSlot(p2_, kGpa, SlotAttribute::kPrivateShared, mem_).ok());
  }
  PolicyConfig Pair(std::string self) {
    return PolicyBuilder(self)
        .Peer("P1", Rim(p1_), true, false)
        .Peer("P2", Rim(p2_), false, true)
        .Channel("Mem1", 4 * kGranuleSize,
                 {Map("P1", kGpa, Rights::W()), Map("P2", kGpa, Rights::R()),
                  MapAny(kGpa, Rights::RW(), -1)})
        .Trans("CF1", "P2", TransType::kException, {1, 4}, FilterAction::kAllow)
        .Trans("CF2", "P1", TransType::kCall, {0}, FilterAction::kScrub)
        .Build();
  }
  RealmId p1_, p2_;
  std::vector<GranuleId> mem_;
};

TEST_F(PairTest, FirstUploadCommitsButStaysInactive) {
  ASSERT_TRUE(Upload(p1_, Pair("P1")).ok());
  EXPECT_EQ(platform_.realm(p1_)->state, RealmState::kPolicyCommitted);
  for (GranuleId g : mem_) EXPECT_FALSE(platform_.RowActive(g));
  EXPECT_EQ(platform_.RealmWrite(p1_, kGpa, Bytes(4, 1)).code(),
            ErrorCode::kFault);
}

TEST_F(PairTest, MirroredUploadActivates) {
  ASSERT_TRUE(Upload(p1_, Pair("P1")).ok());
  ASSERT_TRUE(Upload(p2_, Pair("P2")).ok());
  for (GranuleId g : mem_) {
    ASSERT_TRUE(platform_.RowActive(g));
    const SgtRow* row = platform_.sgt().Find(g);
    EXPECT_EQ(row->Find(p1_)->granted, Rights::W());
    EXPECT_EQ(row->Find(p2_)->granted, Rights::R());
  }
  auto channels = platform_.Channels();
  ASSERT_EQ(channels.size(), 1u);
  EXPECT_TRUE(channels[0].active);
  EXPECT_EQ(channels[0].peers, (std::set<RealmId>{p1_, p2_}));
  EXPECT_TRUE(platform_.RealmWrite(p1_, kGpa + 0x3000, ToBytes("msg")).ok());
  auto got = platform_.RealmRead(p2_, kGpa + 0x3000, 3);
  ASSERT_TRUE(got.ok());
  EXPECT_EQ(*got, ToBytes("msg"));
  EXPECT_EQ(platform_.RealmWrite(p2_, kGpa, Bytes(1, 1)).code(), ErrorCode::kFault);
  EXPECT_EQ(platform_.RealmRead(p1_, kGpa, 1).code(), ErrorCode::kFault);
  EXPECT_EQ(platform_.realm(p2_)->peer_bindings.at("P1"), p1_);
}

TEST_F(PairTest, ProtectedChannelWithoutMarkedGranules) {
  RealmId lone = Launch("lone");
  PolicyConfig p = PolicyBuilder("L")
                       .Peer("L", std::nullopt)
                       .Channel("c", kGranuleSize, {Map("L", kIpa, Rights::RW())})
                       .Build();
  Status st = Upload(lone, p);
  EXPECT_FALSE(st.ok());
  EXPECT_EQ(platform_.realm(lone)->state, RealmState::kTerminated);
  EXPECT_EQ(platform_.last_report(lone)->failure,
            ValidationFailure::kMissingSharedMarking);
}

TEST_F(PairTest, ScrubExit) {
  ASSERT_TRUE(Upload(p1_, Pair("P1")).ok());
  FilterVerdict v = platform_.RealmExit({p1_, TransType::kCall, 0, {7, 8, 9}});
  EXPECT_EQ(v.action, FilterAction::kScrub);
  ASSERT_TRUE(v.delivered);
  EXPECT_EQ(*v.delivered, (std::vector<uint64_t>{0, 0, 0}));
  ASSERT_FALSE(platform_.host_events().empty());
  EXPECT_EQ(platform_.host_events().back().payload,
            (std::vector<uint64_t>{0, 0, 0}));
}

TEST_F(PairTest, AllowExit) {
  ASSERT_TRUE(Upload(p2_, Pair("P2")).ok());
  FilterVerdict v =
      platform_.RealmExit({p2_, TransType::kException, 4, {11, 12}});
  EXPECT_EQ(v.action, FilterAction::kAllow);
  EXPECT_EQ(*v.delivered, (std::vector<uint64_t>{11, 12}));
}

TEST_F(PairTest, UnlistedExitBlocked) {
  ASSERT_TRUE(Upload(p1_, Pair("P1")).ok());
  size_t before = platform_.host_events().size();
  FilterVerdict v = platform_.RealmExit({p1_, TransType::kCall, 99, {1}});
  EXPECT_EQ(v.action, FilterAction::kBlock);
  EXPECT_FALSE(v.delivered);
  EXPECT_EQ(platform_.host_events().size(), before);
  // Ranges are discrete ids, so CF1 does not cover 2 or 3.
  ASSERT_TRUE(Upload(p2_, Pair("P2")).ok());
  EXPECT_EQ(platform_.RealmExit({p2_, TransType::kException, 2, {}}).action,
            FilterAction::kBlock);
}

// Hub with an ANY mapping and `n` clients uploading in turn.
class AnyTest : public MonitorTest {
 protected:
  std::vector<Status> Run(int64_t count, int clients, Rights any_prot,
                          Rights client_prot) {
    RealmId hub = Launch("hub");
    auto bus = Object(1);
    std::vector<RealmId> cs;
    for (int i = 0; i < clients; ++i) {
      cs.push_back(Launch("client " + std::to_string(i)));
    }
    EXPECT_TRUE(vmm_.AddSlot(hub, kIpa, SlotAttribute::kPrivateShared, bus).ok());
    for (RealmId c : cs) {
      EXPECT_TRUE(vmm_.AddSlot(c, kIpa, SlotAttribute::kPrivateShared, bus).ok());
    }
    EXPECT_TRUE(Upload(hub, PolicyBuilder("Hub")
                                .Peer("Hub", std::nullopt)
                                .Channel("bus", kGranuleSize,
                                         {Map("Hub", kIpa, Rights::R()),
                                          MapAny(kIpa, any_prot, count)})
                                .Build())
                    .ok());
    std::vector<Status> out;
    for (RealmId c : cs) {
      out.push_back(Upload(c, PolicyBuilder("C")
                                  .Peer("C", std::nullopt)
                                  .Peer("Hub", Rim(hub))
                                  .Channel("bus", kGranuleSize,
                                           {Map("C", kIpa, client_prot),
                                            Map("Hub", kIpa, Rights::R()),
                                            MapAny(kIpa, Rights::RWX(), -1)})
                                  .Build()));
      last_client_ = c;
    }
    hub_ = hub;
    return out;
  }
  RealmId hub_, last_client_;
};

TEST_F(AnyTest, UnlimitedAdmitsFive) {
  for (const Status& st : Run(-1, 5, Rights::RW(), Rights::W())) {
    EXPECT_TRUE(st.ok()) << st.ToString();
  }
  EXPECT_EQ(platform_.realm(hub_)->any_members.at("bus").size(), 5u);
}

TEST_F(AnyTest, CountTwoRejectsThird) {
  auto st = Run(2, 3, Rights::W(), Rights::W());
  EXPECT_TRUE(st[0].ok());
  EXPECT_TRUE(st[1].ok());
  EXPECT_FALSE(st[2].ok());
  EXPECT_EQ(platform_.last_report(last_client_)->failure,
            ValidationFailure::kAnyExhausted);
}

TEST_F(AnyTest, RequestBeyondAnyProt) {
  auto st = Run(-1, 1, Rights::RW(), Rights::RWX());
  EXPECT_FALSE(st[0].ok());
  EXPECT_EQ(platform_.last_report(last_client_)->failure,
            ValidationFailure::kRightsExceedAny);
}

TEST_F(AnyTest, DirectConnectAnyCounters) {
  RealmId owner = Launch("owner");
  auto bus = Object(1);
  ASSERT_TRUE(vmm_.AddSlot(owner, kIpa, SlotAttribute::kPrivateShared, bus).ok());
  ASSERT_TRUE(Upload(owner, PolicyBuilder("O")
                                .Peer("O", std::nullopt)
                                .Channel("bus", kGranuleSize,
                                         {Map("O", kIpa, Rights::RW()),
                                          MapAny(kIpa, Rights::RW(), 2)})
                                .Build())
                  .ok());
  EXPECT_TRUE(platform_.ConnectAny(owner, "bus", RealmId{50}, Rights::R()).ok());
  // Re-admitting a member costs nothing.
  EXPECT_TRUE(platform_.ConnectAny(owner, "bus", RealmId{50}, Rights::R()).ok());
  EXPECT_TRUE(platform_.ConnectAny(owner, "bus", RealmId{51}, Rights::RW()).ok());
  EXPECT_EQ(platform_.ConnectAny(owner, "bus", RealmId{52}, Rights::R()).code(),
            ErrorCode::kAnyExhausted);
  EXPECT_EQ(platform_.ConnectAny(owner, "bus", RealmId{53}, Rights::RWX()).code(),
            ErrorCode::kRightsExceedAny);
}

// P1 declares P2 strict or not; P2 also has a channel to P3 that P1's
// policy does not mention.
class StrictTest : public MonitorTest,
                   public ::testing::WithParamInterface<bool> {};

TEST_P(StrictTest, ExtraPeerOfStrictPeer) {
  bool strict = GetParam();
  RealmId p1 = Launch("P1");
  RealmId p2 = Launch("P2");
  RealmId p3 = Launch("P3");
  auto m12 = Object(1);
  auto m23 = Object(1);
  constexpr uint64_t kB = kIpa + 0x100000;
  ASSERT_TRUE(vmm_.AddSlot(p1, kIpa, SlotAttribute::kPrivateShared, m12).ok());
  ASSERT_TRUE(vmm_.AddSlot(p2, kIpa, SlotAttribute::kPrivateShared, m12).ok());
  ASSERT_TRUE(vmm_.AddSlot(p2, kB, SlotAttribute::kPrivateShared, m23).ok());
  ASSERT_TRUE(vmm_.AddSlot(p3, kB, SlotAttribute::kPrivateShared, m23).ok());
  auto mem1 = [&] {
    return std::vector<MappingSpec>{Map("P1", kIpa, Rights::W()),
                                    Map("P2", kIpa, Rights::R())};
  };
  auto mem2 = [&] {
    return std::vector<MappingSpec>{Map("P2", kB, Rights::RW()),
                                    Map("P3", kB, Rights::RW())};
  };
  PolicyConfig a = PolicyBuilder("P1")
                       .Peer("P1", std::nullopt)
                       .Peer("P2", Rim(p2), false, strict)
                       .Channel("Mem1", kGranuleSize, mem1())
                       .Build();
  PolicyConfig b = PolicyBuilder("P2")
                       .Peer("P2", std::nullopt)
                       .Peer("P1", Rim(p1))
                       .Peer("P3", Rim(p3))
                       .Channel("Mem1", kGranuleSize, mem1())
                       .Channel("Mem2", kGranuleSize, mem2())
                       .Build();
  PolicyConfig c = PolicyBuilder("P3")
                       .Peer("P3", std::nullopt)
                       .Peer("P2", Rim(p2))
                       .Channel("Mem2", kGranuleSize, mem2())
                       .Build();
  ASSERT_TRUE(Upload(p1, a).ok());
  ASSERT_TRUE(Upload(p3, c).ok());
  Status st = Upload(p2, b);
  if (strict) {
    EXPECT_FALSE(st.ok());
    EXPECT_EQ(platform_.last_report(p2)->failure,
              ValidationFailure::kStrictViolation);
    EXPECT_FALSE(platform_.RowActive(m12[0]));
  } else {
    ASSERT_TRUE(st.ok()) << st.ToString();
    EXPECT_TRUE(platform_.RowActive(m12[0]));
    EXPECT_TRUE(platform_.RowActive(m23[0]));
    FlowMatrix flows = ComputeFlowOracle(platform_);
    EXPECT_TRUE(flows.Has(p2, p3));
    EXPECT_TRUE(flows.Has(p1, p2));
    EXPECT_FALSE(flows.Has(p2, p1));
    EXPECT_EQ(flows, DeriveFlowMatrix(platform_));
  }
}

INSTANTIATE_TEST_SUITE_P(StrictBit, StrictTest, ::testing::Bool());

TEST_F(MonitorTest, SecondUploadLeavesRealmRunning) {
  RealmId a = Launch("A");
  PolicyConfig p = PolicyBuilder("A").Peer("A", std::nullopt).Build();
  ASSERT_TRUE(Upload(a, p).ok());
  EXPECT_EQ(Upload(a, p).code(), ErrorCode::kSecondUpload);
  EXPECT_EQ(platform_.realm(a)->state, RealmState::kPolicyCommitted);
}

TEST_F(MonitorTest, GarbageBlobTerminates) {
  RealmId a = Launch("A");
  Bytes junk(64, 0x42);
  ASSERT_TRUE(platform_.RealmWrite(a, kPrivateIpaBase, junk).ok());
  EXPECT_FALSE(platform_.RsiUploadPolicy(a, kPrivateIpaBase).ok());
  EXPECT_EQ(platform_.realm(a)->state, RealmState::kTerminated);
}

TEST_F(MonitorTest, BlobOutsidePrivateMemory) {
  RealmId a = Launch("A");
  EXPECT_EQ(platform_.RsiUploadPolicy(a, 0x9'0000'0000).code(),
            ErrorCode::kBadAddress);
  EXPECT_TRUE(platform_.realm(a)->alive());
}

TEST_F(MonitorTest, EventLogIsLineJson) {
  Launch("A");
  std::string lines = platform_.log().ToJsonLines();
  ASSERT_FALSE(lines.empty());
  EXPECT_EQ(lines.back(), '\n');
  size_t start = 0;
  while (start < lines.size()) {
    size_t end = lines.find('\n', start);
    auto v = json::Parse(lines.substr(start, end - start));
    EXPECT_TRUE(v.ok()) << lines.substr(start, end - start);
    start = end + 1;
  }
}

}  // namespace
}  // namespace mica
