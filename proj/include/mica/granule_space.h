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

// Simulated physical memory: fixed-size granules with a granule protection
// table (one tag per granule) and real byte content.
//
// Page contents are stored copy-on-write so a whole GranuleSpace is a cheap
// value to copy. The flow oracle relies on this to explore write/read pairs
// on scratch copies of the platform.

#ifndef MICA_GRANULE_SPACE_H_
#define MICA_GRANULE_SPACE_H_

#include <array>
#include <memory>
#include <span>
#include <vector>

#include "mica/common.h"

namespace mica {

enum class GranuleTag : uint8_t {
  kNormalUndelegated,
  kDelegated,
  kRealmPrivate,
  kProtectedShared,
  kPd,
  kSgt,
  kUnprotected,
};
inline constexpr int kGranuleTagCount = 7;

std::string_view GranuleTagName(GranuleTag tag);

// True for tags whose content the host may access directly.
inline constexpr bool IsHostAccessible(GranuleTag tag) {
  return tag == GranuleTag::kNormalUndelegated ||
         tag == GranuleTag::kUnprotected;
}

class GranuleSpace {
 public:
  using Page = std::array<uint8_t, kGranuleSize>;

  explicit GranuleSpace(uint64_t granule_count = kDefaultGranuleCount);

  uint64_t granule_count() const { return tags_.size(); }
  uint64_t size_bytes() const { return granule_count() * kGranuleSize; }

  // OutOfRange for unaligned or out-of-range addresses.
  Status Check(GranuleId g) const;

  // NormalUndelegated -> Delegated, zeroing content.
  Status Delegate(GranuleId g);
  // Delegated -> NormalUndelegated, zeroing content. Any realm role tag
  // (private, shared, PD, SGT) means the granule is still referenced and
  // yields InUse; normal-world tags yield NotDelegated.
  Status Undelegate(GranuleId g);

  GranuleTag tag(GranuleId g) const { return tags_[g.index()]; }

  // Monitor-internal retag. Crossing the protected/unprotected boundary in
  // either direction zeroes the granule.
  void Retag(GranuleId g, GranuleTag tag);
  // Zero content and return to NormalUndelegated (realm teardown).
  void Release(GranuleId g);

  // Raw content access; no protection checks. Callers are the monitor and
  // host models, which perform their own checks.
  void Read(GranuleId g, uint64_t offset, std::span<uint8_t> out) const;
  void Write(GranuleId g, uint64_t offset, std::span<const uint8_t> in);
  Bytes ReadPage(GranuleId g) const;
  void Zero(GranuleId g) { pages_[g.index()].reset(); }
  bool IsZero(GranuleId g) const;

  // Number of granules carrying each tag, indexed by GranuleTag.
  std::array<uint64_t, kGranuleTagCount> CountByTag() const;

 private:
  std::vector<GranuleTag> tags_;
  // nullptr means an all-zero page.
  std::vector<std::shared_ptr<const Page>> pages_;
};

}  // namespace mica

#endif  // MICA_GRANULE_SPACE_H_
