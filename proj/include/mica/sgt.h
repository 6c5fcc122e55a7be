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

// Shared Granule Table: for every protected-shared granule, the realms that
// map it, where, with which granted rights, and whether their policy has
// been validated.
//
// Rows live in 112-byte slots carved out of SGT granules donated by the
// host. A slot holds the pa, a small header and up to four entries; a row
// with more mappers chains into continuation slots.

#ifndef MICA_SGT_H_
#define MICA_SGT_H_

#include <map>
#include <set>
#include <vector>

#include "mica/common.h"
#include "mica/granule_space.h"

namespace mica {

struct SgtEntry {
  RealmId realm;
  uint64_t ipa = 0;
  Rights granted;
  bool validated = false;

  friend bool operator==(const SgtEntry&, const SgtEntry&) = default;
};

struct SgtRow {
  GranuleId pa;
  std::vector<SgtEntry> entries;

  const SgtEntry* Find(RealmId r) const;
  size_t ValidatedCount() const;
};

class SharedGranuleTable {
 public:
  static constexpr size_t kRowBytes = 112;
  static constexpr size_t kEntriesPerSlot = 4;
  static constexpr size_t kSlotsPerGranule = kGranuleSize / kRowBytes;  // 36

  // Donates one SGT granule to the slot pool.
  void AddStorage(GranuleId g);

  size_t capacity_slots() const { return storage_.size() * kSlotsPerGranule; }
  size_t used_slots() const { return capacity_slots() - free_.size(); }
  size_t row_count() const { return rows_.size(); }
  const std::vector<GranuleId>& storage() const { return storage_; }

  // True when appending an entry for `pa` needs no slot beyond capacity.
  bool CanAdd(GranuleId pa) const;
  // SgtFull when the pool is exhausted.
  Status AddEntry(GranuleId pa, const SgtEntry& e);
  // Removes every entry of `r`. Returns the pas whose rows became empty;
  // those rows are dropped.
  std::vector<GranuleId> RemoveRealm(RealmId r);
  void SetGranted(GranuleId pa, RealmId r, Rights granted, bool validated);

  const SgtRow* Find(GranuleId pa) const;
  std::vector<const SgtRow*> Rows() const;

  // Serializes dirty slots into the SGT granules.
  void Flush(GranuleSpace* space);

 private:
  struct RowRecord {
    SgtRow row;
    std::vector<size_t> slots;
  };

  static size_t SlotsNeeded(size_t entries);
  size_t AllocateSlot();
  void MarkDirty(const RowRecord& rec);
  Bytes EncodeSlot(const RowRecord& rec, size_t part) const;

  std::vector<GranuleId> storage_;
  std::vector<size_t> free_;  // kept sorted descending; back() is lowest
  std::map<GranuleId, RowRecord> rows_;
  std::map<size_t, GranuleId> slot_owner_;
  std::set<size_t> dirty_;
};

}  // namespace mica

#endif  // MICA_SGT_H_
