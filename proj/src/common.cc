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

#include "mica/common.h"

#include <algorithm>

namespace mica {

std::string Rights::ToString() const {
  if (empty()) return "-";
  std::string s;
  if (can_read()) s += 'R';
  if (can_write()) s += 'W';
  if (can_exec()) s += 'X';
  return s;
}

bool Rights::Parse(std::string_view text, Rights* out) {
  static constexpr char kLetters[] = {'R', 'W', 'X'};
  if (text.empty()) return false;
  uint8_t bits = 0;
  size_t next = 0;
  for (char c : text) {
    size_t i = next;
    while (i < 3 && kLetters[i] != c) ++i;
    if (i == 3) return false;
    bits |= static_cast<uint8_t>(1u << i);
    next = i + 1;
  }
  *out = Rights(bits);
  return true;
}

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOk: return "Ok";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kOutOfRange: return "OutOfRange";
    case ErrorCode::kAlreadyDelegated: return "AlreadyDelegated";
    case ErrorCode::kNotDelegated: return "NotDelegated";
    case ErrorCode::kGranuleNotDelegated: return "GranuleNotDelegated";
    case ErrorCode::kInUse: return "InUse";
    case ErrorCode::kFault: return "Fault";
    case ErrorCode::kImageTooLarge: return "ImageTooLarge";
    case ErrorCode::kNoSuchRealm: return "NoSuchRealm";
    case ErrorCode::kRealmTerminated: return "RealmTerminated";
    case ErrorCode::kBadRealmState: return "BadRealmState";
    case ErrorCode::kLockedDown: return "LockedDown";
    case ErrorCode::kPdAlreadySet: return "PdAlreadySet";
    case ErrorCode::kNoPd: return "NoPd";
    case ErrorCode::kSgtFull: return "SgtFull";
    case ErrorCode::kIpaOccupied: return "IpaOccupied";
    case ErrorCode::kAliasedInRealm: return "AliasedInRealm";
    case ErrorCode::kBadBlob: return "BadBlob";
    case ErrorCode::kSecondUpload: return "SecondUpload";
    case ErrorCode::kBadAddress: return "BadAddress";
    case ErrorCode::kAnyExhausted: return "AnyExhausted";
    case ErrorCode::kRightsExceedAny: return "RightsExceedAny";
    case ErrorCode::kSyntaxError: return "SyntaxError";
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kDuplicatePeer: return "DuplicatePeer";
    case ErrorCode::kDuplicateMapping: return "DuplicateMapping";
    case ErrorCode::kEmptyRange: return "EmptyRange";
    case ErrorCode::kPolicyTooLarge: return "PolicyTooLarge";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kTruncatedBlob: return "TruncatedBlob";
    case ErrorCode::kBadVersion: return "BadVersion";
    case ErrorCode::kNoStagedToken: return "NoStagedToken";
    case ErrorCode::kBadSignature: return "BadSignature";
    case ErrorCode::kNonceMismatch: return "NonceMismatch";
    case ErrorCode::kDigestMismatch: return "DigestMismatch";
    case ErrorCode::kInconsistentActivity: return "InconsistentActivity";
    case ErrorCode::kMalformedToken: return "MalformedToken";
    case ErrorCode::kValidationFailed: return "ValidationFailed";
    case ErrorCode::kScenarioParseError: return "ScenarioParseError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

std::string Status::ToString() const {
  if (ok()) return "Ok";
  std::string s(ErrorCodeName(code_));
  if (!message_.empty()) {
    s += ": ";
    s += message_;
  }
  return s;
}

std::string HexEncode(const uint8_t* data, size_t len) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (size_t i = 0; i < len; ++i) {
    out += kDigits[data[i] >> 4];
    out += kDigits[data[i] & 0xf];
  }
  return out;
}

namespace {

int HexValue(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

bool HexDecode(std::string_view hex, Bytes* out) {
  if (hex.size() >= 2 && hex[0] == '0' && (hex[1] == 'x' || hex[1] == 'X')) {
    hex.remove_prefix(2);
  }
  if (hex.size() % 2 != 0) return false;
  Bytes bytes;
  bytes.reserve(hex.size() / 2);
  for (size_t i = 0; i < hex.size(); i += 2) {
    int hi = HexValue(hex[i]);
    int lo = HexValue(hex[i + 1]);
    if (hi < 0 || lo < 0) return false;
    bytes.push_back(static_cast<uint8_t>(hi << 4 | lo));
  }
  *out = std::move(bytes);
  return true;
}

bool ParseDigestHex(std::string_view hex, Digest* out) {
  Bytes bytes;
  if (!HexDecode(hex, &bytes) || bytes.size() != out->size()) return false;
  std::copy(bytes.begin(), bytes.end(), out->begin());
  return true;
}

}  // namespace mica
