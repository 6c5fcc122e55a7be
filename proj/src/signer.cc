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

#include "mica/signer.h"

#include <openssl/crypto.h>

#include "mica/digest.h"

namespace mica {

std::shared_ptr<KeyedDigestSigner> KeyedDigestSigner::FromSeed(
    std::string_view seed) {
  Digest k = Sha256Builder().Update("mica-signer-key").Update(seed).Finish();
  return std::make_shared<KeyedDigestSigner>(Bytes(k.begin(), k.end()));
}

std::shared_ptr<KeyedDigestSigner> KeyedDigestSigner::FromAnchor(
    std::string_view hex) {
  Bytes key;
  if (!HexDecode(hex, &key) || key.empty()) return nullptr;
  return std::make_shared<KeyedDigestSigner>(std::move(key));
}

Bytes KeyedDigestSigner::Sign(std::span<const uint8_t> message) const {
  Digest mac = HmacSha256(key_, message);
  return Bytes(mac.begin(), mac.end());
}

bool KeyedDigestSigner::Verify(std::span<const uint8_t> message,
                               std::span<const uint8_t> signature) const {
  Digest mac = HmacSha256(key_, message);
  return signature.size() == mac.size() &&
         CRYPTO_memcmp(mac.data(), signature.data(), mac.size()) == 0;
}

}  // namespace mica
