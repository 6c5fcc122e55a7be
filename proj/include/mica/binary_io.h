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

// Little-endian byte writer/reader used by the policy blob, the SGT row
// layout and the attestation token formats.

#ifndef MICA_BINARY_IO_H_
#define MICA_BINARY_IO_H_

#include <algorithm>
#include <cstring>
#include <span>
#include <string>
#include <string_view>

#include "mica/common.h"

namespace mica {

class ByteWriter {
 public:
  void U8(uint8_t v) { out_.push_back(v); }
  void U16(uint16_t v) { Le(v, 2); }
  void U32(uint32_t v) { Le(v, 4); }
  void U64(uint64_t v) { Le(v, 8); }
  void Raw(std::span<const uint8_t> data) {
    out_.insert(out_.end(), data.begin(), data.end());
  }
  // NUL-padded fixed-width field; `s` must fit.
  void FixedString(std::string_view s, size_t width) {
    size_t start = out_.size();
    out_.resize(start + width, 0);
    std::memcpy(out_.data() + start, s.data(), std::min(s.size(), width));
  }
  // u16 length followed by the bytes.
  void ShortString(std::string_view s) {
    U16(static_cast<uint16_t>(s.size()));
    Raw(std::span<const uint8_t>(reinterpret_cast<const uint8_t*>(s.data()),
                                 s.size()));
  }
  // u32 length followed by the bytes.
  void Blob(std::span<const uint8_t> data) {
    U32(static_cast<uint32_t>(data.size()));
    Raw(data);
  }
  void PatchU32(size_t offset, uint32_t v) {
    for (int i = 0; i < 4; ++i) out_[offset + i] = static_cast<uint8_t>(v >> (8 * i));
  }

  size_t size() const { return out_.size(); }
  const Bytes& bytes() const { return out_; }
  Bytes Take() && { return std::move(out_); }

 private:
  void Le(uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }

  Bytes out_;
};

// Every read past the end returns TruncatedBlob.
class ByteReader {
 public:
  explicit ByteReader(std::span<const uint8_t> data) : data_(data) {}

  Status U8(uint8_t* v) { return Le(v, 1); }
  Status U16(uint16_t* v) { return Le(v, 2); }
  Status U32(uint32_t* v) { return Le(v, 4); }
  Status U64(uint64_t* v) { return Le(v, 8); }

  Status Span(size_t n, std::span<const uint8_t>* out) {
    if (data_.size() - pos_ < n) return Truncated();
    *out = data_.subspan(pos_, n);
    pos_ += n;
    return Status::Ok();
  }
  template <size_t N>
  Status Raw(std::array<uint8_t, N>& out) {
    std::span<const uint8_t> s;
    MICA_RETURN_IF_ERROR(Span(N, &s));
    std::memcpy(out.data(), s.data(), N);
    return Status::Ok();
  }
  // Reads a NUL-padded field; bytes after the first NUL must be zero.
  Status FixedString(size_t width, std::string* out) {
    std::span<const uint8_t> s;
    MICA_RETURN_IF_ERROR(Span(width, &s));
    size_t len = 0;
    while (len < width && s[len] != 0) ++len;
    for (size_t i = len; i < width; ++i) {
      if (s[i] != 0) return Error(ErrorCode::kBadBlob, "unpadded string field");
    }
    out->assign(reinterpret_cast<const char*>(s.data()), len);
    return Status::Ok();
  }
  Status ShortString(std::string* out) {
    uint16_t n;
    MICA_RETURN_IF_ERROR(U16(&n));
    std::span<const uint8_t> s;
    MICA_RETURN_IF_ERROR(Span(n, &s));
    out->assign(reinterpret_cast<const char*>(s.data()), n);
    return Status::Ok();
  }
  Status Blob(Bytes* out) {
    uint32_t n;
    MICA_RETURN_IF_ERROR(U32(&n));
    std::span<const uint8_t> s;
    MICA_RETURN_IF_ERROR(Span(n, &s));
    out->assign(s.begin(), s.end());
    return Status::Ok();
  }

  size_t offset() const { return pos_; }
  size_t remaining() const { return data_.size() - pos_; }
  bool done() const { return pos_ == data_.size(); }

 private:
  static Status Truncated() { return Error(ErrorCode::kTruncatedBlob); }

  template <typename T>
  Status Le(T* v, int n) {
    if (data_.size() - pos_ < static_cast<size_t>(n)) return Truncated();
    uint64_t x = 0;
    for (int i = 0; i < n; ++i) x |= static_cast<uint64_t>(data_[pos_ + i]) << (8 * i);
    pos_ += n;
    *v = static_cast<T>(x);
    return Status::Ok();
  }

  std::span<const uint8_t> data_;
  size_t pos_ = 0;
};

}  // namespace mica

#endif  // MICA_BINARY_IO_H_
