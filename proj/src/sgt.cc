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

#include "mica/sgt.h"

#include <algorithm>

#include "mica/binary_io.h"

namespace mica {

const SgtEntry* SgtRow::Find(RealmId r) const {
  for (const auto& e : entries) {
    if (e.realm == r) return &e;
  }
  return nullptr;
}

size_t SgtRow::ValidatedCount() const {
  return std::count_if(entries.begin(), entries.end(),
                       [](const SgtEntry& e) { return e.validated; });
}

size_t SharedGranuleTable::SlotsNeeded(size_t entries) {
  return std::max<size_t>(1, (entries + kEntriesPerSlot - 1) / kEntriesPerSlot);
}

void SharedGranuleTable::AddStorage(GranuleId g) {
  size_t first = storage_.size() * kSlotsPerGranule;
  storage_.push_back(g);
  for (size_t i = 0; i < kSlotsPerGranule; ++i) free_.push_back(first + i);
  std::sort(free_.begin(), free_.end(), std::greater<>());
}

size_t SharedGranuleTable::AllocateSlot() {
  size_t s = free_.back();
  free_.pop_back();
  return s;
}

bool SharedGranuleTable::CanAdd(GranuleId pa) const {
  auto it = rows_.find(pa);
  size_t have = it == rows_.end() ? 0 : it->second.slots.size();
  size_t entries = it == rows_.end() ? 1 : it->second.row.entries.size() + 1;
  return SlotsNeeded(entries) - have <= free_.size();
}

Status SharedGranuleTable::AddEntry(GranuleId pa, const SgtEntry& e) {
  if (!CanAdd(pa)) return Error(ErrorCode::kSgtFull);
  auto [it, inserted] = rows_.try_emplace(pa);
  RowRecord& rec = it->second;
  if (inserted) rec.row.pa = pa;
  rec.row.entries.push_back(e);
  while (rec.slots.size() < SlotsNeeded(rec.row.entries.size())) {
    size_t s = AllocateSlot();
    rec.slots.push_back(s);
    slot_owner_[s] = pa;
  }
  MarkDirty(rec);
  return Status::Ok();
}

std::vector<GranuleId> SharedGranuleTable::RemoveRealm(RealmId r) {
  std::vector<GranuleId> emptied;
  for (auto it = rows_.begin(); it != rows_.end();) {
    RowRecord& rec = it->second;
    auto& es = rec.row.entries;
    auto end = std::remove_if(es.begin(), es.end(),
                              [r](const SgtEntry& e) { return e.realm == r; });
    if (end == es.end()) {
      ++it;
      continue;
    }
    es.erase(end, es.end());
    size_t keep = es.empty() ? 0 : SlotsNeeded(es.size());
    while (rec.slots.size() > keep) {
      size_t s = rec.slots.back();
      rec.slots.pop_back();
      slot_owner_.erase(s);
      free_.push_back(s);
      dirty_.insert(s);
    }
    MarkDirty(rec);
    if (es.empty()) {
      emptied.push_back(it->first);
      it = rows_.erase(it);
    } else {
      ++it;
    }
  }
  std::sort(free_.begin(), free_.end(), std::greater<>());
  return emptied;
}

void SharedGranuleTable::SetGranted(GranuleId pa, RealmId r, Rights granted,
                                    bool validated) {
  auto it = rows_.find(pa);
  if (it == rows_.end()) return;
  for (auto& e : it->second.row.entries) {
    if (e.realm == r) {
      e.granted = granted;
      e.validated = validated;
    }
  }
  MarkDirty(it->second);
}

const SgtRow* SharedGranuleTable::Find(GranuleId pa) const {
  auto it = rows_.find(pa);
  return it == rows_.end() ? nullptr : &it->second.row;
}

std::vector<const SgtRow*> SharedGranuleTable::Rows() const {
  std::vector<const SgtRow*> out;
  out.reserve(rows_.size());
  for (const auto& [pa, rec] : rows_) out.push_back(&rec.row);
  return out;
}

void SharedGranuleTable::MarkDirty(const RowRecord& rec) {
  dirty_.insert(rec.slots.begin(), rec.slots.end());
}

// Slot layout (little-endian):
//   0  pa            u64
//   8  entry count   u8   (entries in this slot)
//   9  flags         u8   (bit 0: continuation of the previous slot)
//  10  part          u16  (position within the row's slot chain)
//  12  reserved      4 bytes
//  16  entries       4 x { gid u64, ipa u64, rights u8, validated u8, pad 6 }
Bytes SharedGranuleTable::EncodeSlot(const RowRecord& rec, size_t part) const {
  ByteWriter w;
  w.U64(rec.row.pa.pa);
  size_t first = part * kEntriesPerSlot;
  size_t n = std::min(kEntriesPerSlot, rec.row.entries.size() - first);
  w.U8(static_cast<uint8_t>(n));
  w.U8(part > 0 ? 1 : 0);
  w.U16(static_cast<uint16_t>(part));
  w.U32(0);
  for (size_t i = 0; i < kEntriesPerSlot; ++i) {
    if (i < n) {
      const SgtEntry& e = rec.row.entries[first + i];
      w.U64(e.realm.gid);
      w.U64(e.ipa);
      w.U8(e.granted.bits());
      w.U8(e.validated ? 1 : 0);
    } else {
      w.U64(0);
      w.U64(0);
      w.U16(0);
    }
    w.U32(0);
    w.U16(0);
  }
  return std::move(w).Take();
}

void SharedGranuleTable::Flush(GranuleSpace* space) {
  static const Bytes kEmpty(kRowBytes, 0);
  for (size_t s : dirty_) {
    GranuleId g = storage_[s / kSlotsPerGranule];
    uint64_t offset = (s % kSlotsPerGranule) * kRowBytes;
    auto owner = slot_owner_.find(s);
    if (owner == slot_owner_.end()) {
      space->Write(g, offset, kEmpty);
      continue;
    }
    const RowRecord& rec = rows_.at(owner->second);
    size_t part = std::find(rec.slots.begin(), rec.slots.end(), s) -
                  rec.slots.begin();
    space->Write(g, offset, EncodeSlot(rec, part));
  }
  dirty_.clear();
}

}  // namespace mica
