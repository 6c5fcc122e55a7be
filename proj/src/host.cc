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

#include "mica/host.h"

#include <cctype>

namespace mica {

std::string_view SlotAttributeName(SlotAttribute a) {
  switch (a) {
    case SlotAttribute::kPrivate: return "PRIVATE";
    case SlotAttribute::kPrivateShared: return "PRIVATE_SHARED";
    case SlotAttribute::kShared: return "SHARED";
  }
  return "?";
}

bool ParseSlotAttribute(std::string_view text, SlotAttribute* out) {
  std::string up(text);
  for (auto& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (SlotAttribute a : {SlotAttribute::kPrivate, SlotAttribute::kPrivateShared,
                          SlotAttribute::kShared}) {
    if (SlotAttributeName(a) == up) {
      *out = a;
      return true;
    }
  }
  return false;
}

StatusOr<std::vector<GranuleId>> Vmm::AllocateGranules(size_t n) {
  std::vector<GranuleId> out;
  const GranuleSpace& space = platform_->granules();
  for (uint64_t i = 0; i < space.granule_count() && out.size() < n; ++i) {
    GranuleId g = GranuleId::FromIndex(i);
    if (space.tag(g) == GranuleTag::kNormalUndelegated &&
        reserved_.count(g) == 0) {
      out.push_back(g);
    }
  }
  if (out.size() < n) {
    return Error(ErrorCode::kOutOfRange, "host is out of physical memory");
  }
  reserved_.insert(out.begin(), out.end());
  return out;
}

StatusOr<RealmId> Vmm::LaunchRealm(std::span<const uint8_t> image,
                                   size_t private_granules) {
  MICA_ASSIGN_OR_RETURN(auto granules, AllocateGranules(private_granules + 1));
  for (GranuleId g : granules) MICA_RETURN_IF_ERROR(platform_->DelegateGranule(g));
  GranuleId pd = granules.back();
  granules.pop_back();
  MICA_ASSIGN_OR_RETURN(RealmId r, platform_->CreateRealm(image, granules));
  MICA_RETURN_IF_ERROR(platform_->RmiRealmPd(r, pd));
  for (size_t i = 0; i < granules.size(); ++i) {
    slots_.push_back(MemorySlot{
        r, platform_->config().private_ipa_base + i * kGranuleSize,
        SlotAttribute::kPrivate, {granules[i]}});
  }
  return r;
}

StatusOr<std::vector<GranuleId>> Vmm::CreateObject(SlotAttribute attr,
                                                   size_t granules) {
  if (attr == SlotAttribute::kPrivate) {
    return Error(ErrorCode::kInvalidArgument,
                 "private memory is created with the realm");
  }
  MICA_ASSIGN_OR_RETURN(auto out, AllocateGranules(granules));
  if (attr == SlotAttribute::kPrivateShared) {
    for (GranuleId g : out) MICA_RETURN_IF_ERROR(platform_->DelegateGranule(g));
  }
  return out;
}

Status Vmm::AddSlot(RealmId r, uint64_t ipa, SlotAttribute attr,
                    const std::vector<GranuleId>& backing, Rights rights) {
  for (size_t i = 0; i < backing.size(); ++i) {
    uint64_t at = ipa + i * kGranuleSize;
    switch (attr) {
      case SlotAttribute::kPrivate:
        return Error(ErrorCode::kInvalidArgument,
                     "private slots are created with the realm");
      case SlotAttribute::kPrivateShared:
        if (!platform_->sgt().CanAdd(backing[i])) {
          MICA_ASSIGN_OR_RETURN(auto sgt, AllocateGranules(1));
          MICA_RETURN_IF_ERROR(platform_->DelegateGranule(sgt[0]));
          MICA_RETURN_IF_ERROR(platform_->RmiSgt(sgt[0]));
        }
        MICA_RETURN_IF_ERROR(
            platform_->RmiDataCreateUnknownShared(r, backing[i], at));
        break;
      case SlotAttribute::kShared:
        MICA_RETURN_IF_ERROR(
            platform_->RmiMapUnprotected(r, backing[i], at, rights));
        break;
    }
  }
  slots_.push_back(MemorySlot{r, ipa, attr, backing});
  return Status::Ok();
}

Status GuestUploadPolicy(Platform* platform, RealmId r,
                         std::span<const uint8_t> blob) {
  uint64_t base = platform->config().private_ipa_base;
  MICA_RETURN_IF_ERROR(platform->RealmWrite(r, base, blob));
  return platform->RsiUploadPolicy(r, base);
}

}  // namespace mica
