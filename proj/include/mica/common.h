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

// Shared vocabulary types for the simulator: addresses, identifiers, access
// rights, digests and the Status/StatusOr error idiom used by every module.

#ifndef MICA_COMMON_H_
#define MICA_COMMON_H_

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace mica {

inline constexpr uint64_t kGranuleSize = 4096;
inline constexpr uint64_t kDefaultGranuleCount = 1024;
inline constexpr uint64_t kPrivateIpaBase = 0x4000'0000;

using Bytes = std::vector<uint8_t>;
using Digest = std::array<uint8_t, 32>;

inline constexpr bool IsGranuleAligned(uint64_t addr) {
  return addr % kGranuleSize == 0;
}

// Simulated physical address of one granule.
struct GranuleId {
  uint64_t pa = 0;

  constexpr uint64_t index() const { return pa / kGranuleSize; }
  static constexpr GranuleId FromIndex(uint64_t i) {
    return GranuleId{i * kGranuleSize};
  }
  friend constexpr auto operator<=>(const GranuleId&,
                                    const GranuleId&) = default;
};

// Globally unique realm identifier. Allocated by the monitor, never reused.
struct RealmId {
  uint64_t gid = 0;

  friend constexpr auto operator<=>(const RealmId&, const RealmId&) = default;
};

// Subset of {R, W, X}.
class Rights {
 public:
  static constexpr uint8_t kRead = 1;
  static constexpr uint8_t kWrite = 2;
  static constexpr uint8_t kExec = 4;

  constexpr Rights() = default;
  constexpr explicit Rights(uint8_t bits) : bits_(bits & 7) {}

  static constexpr Rights None() { return Rights(); }
  static constexpr Rights R() { return Rights(kRead); }
  static constexpr Rights W() { return Rights(kWrite); }
  static constexpr Rights RW() { return Rights(kRead | kWrite); }
  static constexpr Rights RWX() { return Rights(kRead | kWrite | kExec); }

  constexpr uint8_t bits() const { return bits_; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr bool can_read() const { return bits_ & kRead; }
  constexpr bool can_write() const { return bits_ & kWrite; }
  constexpr bool can_exec() const { return bits_ & kExec; }
  constexpr bool SubsetOf(Rights other) const {
    return (bits_ & ~other.bits_) == 0;
  }
  constexpr Rights operator&(Rights o) const { return Rights(bits_ & o.bits_); }
  constexpr Rights operator|(Rights o) const { return Rights(bits_ | o.bits_); }
  friend constexpr bool operator==(Rights, Rights) = default;

  // "RWX" letter order; empty rights print as "-".
  std::string ToString() const;
  // Accepts any subset of "RWX" in that letter order. Returns false on
  // anything else, including the empty string.
  static bool Parse(std::string_view text, Rights* out);

 private:
  uint8_t bits_ = 0;
};

enum class ErrorCode {
  kOk = 0,
  kInvalidArgument,
  kOutOfRange,
  kAlreadyDelegated,
  kNotDelegated,
  kGranuleNotDelegated,
  kInUse,
  kFault,
  kImageTooLarge,
  kNoSuchRealm,
  kRealmTerminated,
  kBadRealmState,
  kLockedDown,
  kPdAlreadySet,
  kNoPd,
  kSgtFull,
  kIpaOccupied,
  kAliasedInRealm,
  kBadBlob,
  kSecondUpload,
  kBadAddress,
  kAnyExhausted,
  kRightsExceedAny,
  kSyntaxError,
  kSchemaError,
  kDuplicatePeer,
  kDuplicateMapping,
  kEmptyRange,
  kPolicyTooLarge,
  kBadMagic,
  kTruncatedBlob,
  kBadVersion,
  kNoStagedToken,
  kBadSignature,
  kNonceMismatch,
  kDigestMismatch,
  kInconsistentActivity,
  kMalformedToken,
  kValidationFailed,
  kScenarioParseError,
  kIoError,
};

std::string_view ErrorCodeName(ErrorCode code);

class [[nodiscard]] Status {
 public:
  Status() = default;
  Status(ErrorCode code, std::string message)
      : code_(code), message_(std::move(message)) {}

  static Status Ok() { return Status(); }

  bool ok() const { return code_ == ErrorCode::kOk; }
  ErrorCode code() const { return code_; }
  const std::string& message() const { return message_; }
  std::string ToString() const;

 private:
  ErrorCode code_ = ErrorCode::kOk;
  std::string message_;
};

inline Status Error(ErrorCode code, std::string message = {}) {
  return Status(code, std::move(message));
}

template <typename T>
class [[nodiscard]] StatusOr {
 public:
  StatusOr(T value) : rep_(std::move(value)) {}  // NOLINT
  StatusOr(Status status) : rep_(std::move(status)) {}  // NOLINT

  bool ok() const { return std::holds_alternative<T>(rep_); }
  Status status() const {
    return ok() ? Status::Ok() : std::get<Status>(rep_);
  }
  ErrorCode code() const {
    return ok() ? ErrorCode::kOk : std::get<Status>(rep_).code();
  }

  const T& value() const& { return std::get<T>(rep_); }
  T& value() & { return std::get<T>(rep_); }
  T&& value() && { return std::get<T>(std::move(rep_)); }
  const T& operator*() const& { return value(); }
  T& operator*() & { return value(); }
  const T* operator->() const { return &std::get<T>(rep_); }
  T* operator->() { return &std::get<T>(rep_); }

 private:
  std::variant<T, Status> rep_;
};

#define MICA_RETURN_IF_ERROR(expr)       \
  do {                                   \
    ::mica::Status _mica_st = (expr);    \
    if (!_mica_st.ok()) return _mica_st; \
  } while (0)

#define MICA_CONCAT_INNER_(a, b) a##b
#define MICA_CONCAT_(a, b) MICA_CONCAT_INNER_(a, b)
#define MICA_ASSIGN_OR_RETURN_IMPL_(tmp, lhs, expr) \
  auto tmp = (expr);                                \
  if (!tmp.ok()) return tmp.status();               \
  lhs = std::move(tmp).value()
#define MICA_ASSIGN_OR_RETURN(lhs, expr) \
  MICA_ASSIGN_OR_RETURN_IMPL_(MICA_CONCAT_(_mica_or_, __LINE__), lhs, expr)

std::string HexEncode(const uint8_t* data, size_t len);
inline std::string HexEncode(const Bytes& b) {
  return HexEncode(b.data(), b.size());
}
inline std::string HexEncode(const Digest& d) {
  return HexEncode(d.data(), d.size());
}
// Accepts an optional "0x" prefix; requires an even number of hex digits.
bool HexDecode(std::string_view hex, Bytes* out);
bool ParseDigestHex(std::string_view hex, Digest* out);

}  // namespace mica

#endif  // MICA_COMMON_H_
