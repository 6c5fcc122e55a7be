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

#ifndef MICA_DIGEST_H_
#define MICA_DIGEST_H_

#include <span>
#include <string_view>

#include "mica/common.h"

namespace mica {

// The platform digest is SHA-256 everywhere: RIM, REM, policy digests and
// group token digests. Tokens carry this identifier.
inline constexpr std::string_view kDigestAlgorithm = "sha-256";

Digest Sha256(std::span<const uint8_t> data);

// Incremental hashing for digests computed over several fields.
class Sha256Builder {
 public:
  Sha256Builder();
  ~Sha256Builder();
  Sha256Builder(const Sha256Builder&) = delete;
  Sha256Builder& operator=(const Sha256Builder&) = delete;

  Sha256Builder& Update(std::span<const uint8_t> data);
  Sha256Builder& Update(std::string_view text);
  Sha256Builder& UpdateU64(uint64_t v);  // little-endian
  Digest Finish();

 private:
  void* ctx_;
};

// REM extension: H(current || value).
Digest ExtendMeasurement(const Digest& current, const Digest& value);

// HMAC-SHA256, used by the deterministic test signer.
Digest HmacSha256(std::span<const uint8_t> key, std::span<const uint8_t> msg);

}  // namespace mica

#endif  // MICA_DIGEST_H_
