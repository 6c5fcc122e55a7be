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


#include "mica/granule_space.h"

#include <gtest/gtest.h>

#include "test_util.h"

namespace mica {
namespace {

using testing::PlatformFixture;
using testing::ToBytes;

TEST(GranuleSpaceTest, DelegateZeroesContent) {
  GranuleSpace space(16);
  GranuleId g{0x1000};
  Bytes junk(100, 0xAB);
  space.Write(g, 10, junk);
  ASSERT_FALSE(space.IsZero(g));
  ASSERT_TRUE(space.Delegate(g).ok());
  EXPECT_EQ(space.tag(g), GranuleTag::kDelegated);
  EXPECT_TRUE(space.IsZero(g));
}

TEST(GranuleSpaceTest, DelegateTwiceFails) {
  GranuleSpace space(16);
  ASSERT_TRUE(space.Delegate(GranuleId{0x2000}).ok());
  EXPECT_EQ(space.Delegate(GranuleId{0x2000}).code(),
            ErrorCode::kAlreadyDelegated);
}

TEST(GranuleSpaceTest, RejectsBadAddresses) {
  GranuleSpace space(4);
  EXPECT_EQ(space.Delegate(GranuleId{0x1001}).code(), ErrorCode::kOutOfRange);
  EXPECT_EQ(space.Delegate(GranuleId{4 * kGranuleSize}).code(),
            ErrorCode::kOutOfRange);
}

TEST(GranuleSpaceTest, DelegateSweepOver64Granules) {
  GranuleSpace space(64);
  for (uint64_t i = 0; i < 64; ++i) {
    Bytes fill(kGranuleSize, static_cast<uint8_t>(i + 1));
    space.Write(GranuleId::FromIndex(i), 0, fill);
  }
  for (uint64_t i = 0; i < 64; ++i) {
    ASSERT_TRUE(space.Delegate(GranuleId::FromIndex(i)).ok());
  }
  for (uint64_t i = 0; i < 64; ++i) {
    GranuleId g = GranuleId::FromIndex(i);
    EXPECT_EQ(space.tag(g), GranuleTag::kDelegated) << i;
    Bytes page = space.ReadPage(g);
    EXPECT_EQ(page, Bytes(kGranuleSize, 0)) << i;
  }
  EXPECT_EQ(space.CountByTag()[static_cast<int>(GranuleTag::kDelegated)], 64u);
}

TEST(GranuleSpaceTest, UndelegateZeroesAndReturnsToNormal) {
  GranuleSpace space(8);
  GranuleId g{0x3000};
  ASSERT_TRUE(space.Delegate(g).ok());
  space.Write(g, 0, Bytes(32, 0x5A));
  ASSERT_TRUE(space.Undelegate(g).ok());
  EXPECT_EQ(space.tag(g), GranuleTag::kNormalUndelegated);
  EXPECT_TRUE(space.IsZero(g));
  EXPECT_EQ(space.Undelegate(g).code(), ErrorCode::kNotDelegated);
}

TEST(GranuleSpaceTest, UndelegateInUseForRealmRoles) {
  GranuleSpace space(8);
  for (GranuleTag t : {GranuleTag::kRealmPrivate, GranuleTag::kProtectedShared,
                       GranuleTag::kPd, GranuleTag::kSgt}) {
    GranuleId g{0x1000};
    space.Release(g);
    ASSERT_TRUE(space.Delegate(g).ok());
    space.Retag(g, t);
    EXPECT_EQ(space.Undelegate(g).code(), ErrorCode::kInUse)
        << GranuleTagName(t);
  }
}

TEST(GranuleSpaceTest, CrossingProtectionBoundaryZeroes) {
  GranuleSpace space(4);
  GranuleId g{0};
  space.Write(g, 0, Bytes(8, 1));
  // Both normal-world tags: content stays.
  space.Retag(g, GranuleTag::kUnprotected);
  EXPECT_FALSE(space.IsZero(g));
  space.Retag(g, GranuleTag::kProtectedShared);
  EXPECT_TRUE(space.IsZero(g));
  space.Write(g, 0, Bytes(8, 1));
  space.Retag(g, GranuleTag::kUnprotected);
  EXPECT_TRUE(space.IsZero(g));
}

TEST(GranuleSpaceTest, CopiesAreIndependent) {
  GranuleSpace a(4);
  a.Write(GranuleId{0}, 0, Bytes(4, 7));
  GranuleSpace b = a;
  b.Write(GranuleId{0}, 0, Bytes(4, 9));
  EXPECT_EQ(a.ReadPage(GranuleId{0})[0], 7);
  EXPECT_EQ(b.ReadPage(GranuleId{0})[0], 9);
}

class ReadAsTest : public PlatformFixture {};

TEST_F(ReadAsTest, HostCannotReadRealmPrivate) {
  RealmId r = Launch("secret image");
  GranuleId g = platform_.realm(r)->PrivatePas().front();
  EXPECT_EQ(platform_.ReadAs(g, Viewer::Host()).code(), ErrorCode::kFault);
  auto own = platform_.ReadAs(g, Viewer::Of(r));
  ASSERT_TRUE(own.ok());
  EXPECT_EQ(Bytes(own->begin(), own->begin() + 12), ToBytes("secret image"));
}

TEST_F(ReadAsTest, HostReadsUnprotected) {
  RealmId r = Launch("net");
  auto nic = Object(1, SlotAttribute::kShared);
  ASSERT_TRUE(vmm_.AddSlot(r, 0x2'0000'0000, SlotAttribute::kShared, nic).ok());
  ASSERT_TRUE(platform_.HostWrite(nic[0], 0, ToBytes("packet")).ok());
  auto seen = platform_.ReadAs(nic[0], Viewer::Host());
  ASSERT_TRUE(seen.ok());
  EXPECT_EQ(Bytes(seen->begin(), seen->begin() + 6), ToBytes("packet"));
  auto realm_view = platform_.ReadAs(nic[0], Viewer::Of(r));
  ASSERT_TRUE(realm_view.ok());
  EXPECT_EQ(*realm_view, *seen);
}

// Every viewer against a protected-shared granule that A maps R and B maps W,
// before and after the channel is active.
TEST_F(ReadAsTest, ViewerRightsMatrixOnSharedGranule) {
  RealmId a = Launch("reader A");
  RealmId b = Launch("writer B");
  RealmId c = Launch("bystander C");
  auto obj = Object(1);
  constexpr uint64_t kIpa = 0x1'0000'0000;
  ASSERT_TRUE(vmm_.AddSlot(a, kIpa, SlotAttribute::kPrivateShared, obj).ok());
  ASSERT_TRUE(vmm_.AddSlot(b, kIpa, SlotAttribute::kPrivateShared, obj).ok());
  auto policy = [&](std::string self) {
    return testing::PolicyBuilder(self)
        .Peer("A", Rim(a))
        .Peer("B", Rim(b))
        .Channel("ab", kGranuleSize,
                 {testing::Map("A", kIpa, Rights::R()),
                  testing::Map("B", kIpa, Rights::W())})
        .Build();
  };
  GranuleId g = obj[0];
  Bytes data = ToBytes("hello");

  // Nobody may touch the page before both sides validate.
  ASSERT_TRUE(Upload(a, policy("A")).ok());
  for (Viewer v : {Viewer::Host(), Viewer::Of(a), Viewer::Of(b), Viewer::Of(c)}) {
    EXPECT_EQ(platform_.ReadAs(g, v).code(), ErrorCode::kFault);
    EXPECT_EQ(platform_.WriteAs(g, v, 0, data).code(), ErrorCode::kFault);
  }

  ASSERT_TRUE(Upload(b, policy("B")).ok());
  struct Case {
    Viewer viewer;
    bool read, write;
  } cases[] = {
      {Viewer::Host(), false, false},
      {Viewer::Of(a), true, false},
      {Viewer::Of(b), false, true},
      {Viewer::Of(c), false, false},
  };
  for (const Case& k : cases) {
    EXPECT_EQ(platform_.WriteAs(g, k.viewer, 0, data).ok(), k.write);
    EXPECT_EQ(platform_.ReadAs(g, k.viewer).ok(), k.read);
  }
  auto got = platform_.ReadAs(g, Viewer::Of(a));
  ASSERT_TRUE(got.ok());
  EXPECT_EQ(Bytes(got->begin(), got->begin() + 5), data);
}

TEST_F(ReadAsTest, UndelegateMappedGranuleIsInUse) {
  RealmId r = Launch("busy", 1);
  GranuleId g = platform_.realm(r)->PrivatePas().front();
  EXPECT_EQ(platform_.UndelegateGranule(g).code(), ErrorCode::kInUse);
}

TEST_F(ReadAsTest, TeardownThenUndelegateLeavesZeroes) {
  RealmId r = Launch("to be destroyed", 3);
  std::vector<GranuleId> pas = platform_.realm(r)->PrivatePas();
  pas.push_back(*platform_.realm(r)->pd);
  ASSERT_TRUE(platform_.RealmWrite(r, kPrivateIpaBase + 0x1000,
                                   Bytes(kGranuleSize, 0xEE)).ok());
  platform_.TerminateRealm(r);
  for (GranuleId g : pas) {
    // Teardown already hands the granules back; undelegating again is a
    // no-op error rather than a leak.
    Status st = platform_.UndelegateGranule(g);
    EXPECT_TRUE(st.ok() || st.code() == ErrorCode::kNotDelegated);
    auto host = platform_.HostRead(g, 0, kGranuleSize);
    ASSERT_TRUE(host.ok());
    EXPECT_EQ(*host, Bytes(kGranuleSize, 0));
  }
}

}  // namespace
}  // namespace mica
