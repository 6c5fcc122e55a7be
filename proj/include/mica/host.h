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

// The untrusted host: a VMM that allocates physical granules, launches
// realms and backs guest address ranges with memory slots. Slot attributes
// mirror the KVM flavors: PRIVATE (realm-owned), PRIVATE_SHARED (protected
// memory shared between realms) and SHARED (normal-world memory).

#ifndef MICA_HOST_H_
#define MICA_HOST_H_

#include <set>
#include <span>
#include <string>
#include <vector>

#include "mica/monitor.h"

namespace mica {

enum class SlotAttribute : uint8_t { kPrivate, kPrivateShared, kShared };
std::string_view SlotAttributeName(SlotAttribute a);
bool ParseSlotAttribute(std::string_view text, SlotAttribute* out);

struct MemorySlot {
  RealmId realm;
  uint64_t ipa = 0;
  SlotAttribute attribute = SlotAttribute::kPrivate;
  std::vector<GranuleId> backing;

  uint64_t size() const { return backing.size() * kGranuleSize; }
};

class Vmm {
 public:
  explicit Vmm(Platform* platform) : platform_(platform) {}

  // Lowest-addressed granules that are neither in use nor reserved.
  StatusOr<std::vector<GranuleId>> AllocateGranules(size_t n);

  // Delegates `private_granules` fresh granules, creates the realm with
  // `image` and gives it a policy descriptor.
  StatusOr<RealmId> LaunchRealm(std::span<const uint8_t> image,
                                size_t private_granules);

  // Backing for a shared object: delegated granules for PRIVATE_SHARED,
  // plain normal-world granules for SHARED.
  StatusOr<std::vector<GranuleId>> CreateObject(SlotAttribute attr,
                                                size_t granules);

  // Maps `backing` into `r` at consecutive IPAs from `ipa`. PRIVATE_SHARED
  // slots use RMI_DATA_CREATE_UNKNOWN_SHARED and donate SGT granules on
  // demand; SHARED slots map unprotected with `rights`.
  Status AddSlot(RealmId r, uint64_t ipa, SlotAttribute attr,
                 const std::vector<GranuleId>& backing,
                 Rights rights = Rights::RW());

  const std::vector<MemorySlot>& slots() const { return slots_; }
  Platform& platform() { return *platform_; }

 private:
  Platform* platform_;
  std::set<GranuleId> reserved_;
  std::vector<MemorySlot> slots_;
};

// The guest side of policy upload: the realm places the blob at the start
// of its private memory and asks the monitor to take it.
Status GuestUploadPolicy(Platform* platform, RealmId r,
                         std::span<const uint8_t> blob);

}  // namespace mica

#endif  // MICA_HOST_H_
