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

// Signing capability used for platform and group tokens.

#ifndef MICA_SIGNER_H_
#define MICA_SIGNER_H_

#include <memory>
#include <span>
#include <string>

#include "mica/common.h"

namespace mica {

class Signer {
 public:
  virtual ~Signer() = default;
  virtual std::string algorithm() const = 0;
  virtual Bytes Sign(std::span<const uint8_t> message) const = 0;
  virtual bool Verify(std::span<const uint8_t> message,
                      std::span<const uint8_t> signature) const = 0;
};

// HMAC-SHA256 under a key derived from a seed. The verification key (the
// trust anchor) is the key itself; this backend is for deterministic
// simulation, not for real deployments.
class KeyedDigestSigner : public Signer {
 public:
  explicit KeyedDigestSigner(Bytes key) : key_(std::move(key)) {}
  static std::shared_ptr<KeyedDigestSigner> FromSeed(std::string_view seed);
  // Parses a hex trust anchor.
  static std::shared_ptr<KeyedDigestSigner> FromAnchor(std::string_view hex);

  std::string algorithm() const override { return "hmac-sha256"; }
  Bytes Sign(std::span<const uint8_t> message) const override;
  bool Verify(std::span<const uint8_t> message,
              std::span<const uint8_t> signature) const override;

  std::string anchor() const { return HexEncode(key_); }
  const Bytes& key() const { return key_; }

 private:
  Bytes key_;
};

}  // namespace mica

#endif  // MICA_SIGNER_H_
