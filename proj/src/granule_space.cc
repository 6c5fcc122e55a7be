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

#include <algorithm>
#include <cstring>

namespace mica {

std::string_view GranuleTagName(GranuleTag tag) {
  switch (tag) {
    case GranuleTag::kNormalUndelegated: return "NormalUndelegated";
    case GranuleTag::kDelegated: return "Delegated";
    case GranuleTag::kRealmPrivate: return "RealmPrivate";
    case GranuleTag::kProtectedShared: return "ProtectedShared";
    case GranuleTag::kPd: return "PD";
    case GranuleTag::kSgt: return "SGT";
    case GranuleTag::kUnprotected: return "Unprotected";
  }
  return "?";
}

GranuleSpace::GranuleSpace(uint64_t granule_count)
    : tags_(granule_count, GranuleTag::kNormalUndelegated),
      pages_(granule_count) {}

Status GranuleSpace::Check(GranuleId g) const {
  if (!IsGranuleAligned(g.pa)) {
    return Error(ErrorCode::kOutOfRange, "unaligned pa");
  }
  if (g.index() >= tags_.size()) {
    return Error(ErrorCode::kOutOfRange, "pa beyond physical range");
  }
  return Status::Ok();
}

Status GranuleSpace::Delegate(GranuleId g) {
  MICA_RETURN_IF_ERROR(Check(g));
  if (tag(g) != GranuleTag::kNormalUndelegated) {
    return Error(ErrorCode::kAlreadyDelegated,
                 std::string(GranuleTagName(tag(g))));
  }
  tags_[g.index()] = GranuleTag::kDelegated;
  Zero(g);
  return Status::Ok();
}

Status GranuleSpace::Undelegate(GranuleId g) {
  MICA_RETURN_IF_ERROR(Check(g));
  switch (tag(g)) {
    case GranuleTag::kDelegated:
      Release(g);
      return Status::Ok();
    case GranuleTag::kRealmPrivate:
    case GranuleTag::kProtectedShared:
    case GranuleTag::kPd:
    case GranuleTag::kSgt:
      return Error(ErrorCode::kInUse, std::string(GranuleTagName(tag(g))));
    case GranuleTag::kNormalUndelegated:
    case GranuleTag::kUnprotected:
      break;
  }
  return Error(ErrorCode::kNotDelegated, std::string(GranuleTagName(tag(g))));
}

void GranuleSpace::Retag(GranuleId g, GranuleTag t) {
  if (IsHostAccessible(tag(g)) != IsHostAccessible(t)) Zero(g);
  tags_[g.index()] = t;
}

void GranuleSpace::Release(GranuleId g) {
  Zero(g);
  tags_[g.index()] = GranuleTag::kNormalUndelegated;
}

void GranuleSpace::Read(GranuleId g, uint64_t offset,
                        std::span<uint8_t> out) const {
  const auto& page = pages_[g.index()];
  if (page == nullptr) {
    std::fill(out.begin(), out.end(), 0);
  } else {
    std::memcpy(out.data(), page->data() + offset, out.size());
  }
}

void GranuleSpace::Write(GranuleId g, uint64_t offset,
                         std::span<const uint8_t> in) {
  auto& slot = pages_[g.index()];
  auto fresh = std::make_shared<Page>();
  if (slot != nullptr) {
    *fresh = *slot;
  } else {
    fresh->fill(0);
  }
  std::memcpy(fresh->data() + offset, in.data(), in.size());
  slot = std::move(fresh);
}

Bytes GranuleSpace::ReadPage(GranuleId g) const {
  Bytes out(kGranuleSize);
  Read(g, 0, out);
  return out;
}

bool GranuleSpace::IsZero(GranuleId g) const {
  const auto& page = pages_[g.index()];
  if (page == nullptr) return true;
  return std::all_of(page->begin(), page->end(),
                     [](uint8_t b) { return b == 0; });
}

std::array<uint64_t, kGranuleTagCount> GranuleSpace::CountByTag() const {
  std::array<uint64_t, kGranuleTagCount> counts{};
  for (GranuleTag t : tags_) ++counts[static_cast<int>(t)];
  return counts;
}

}  // namespace mica
