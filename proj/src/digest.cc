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

#include "mica/digest.h"

#include <openssl/evp.h>
#include <openssl/hmac.h>

#include <cstdlib>

namespace mica {
namespace {

EVP_MD_CTX* Ctx(void* p) { return static_cast<EVP_MD_CTX*>(p); }

}  // namespace

Digest Sha256(std::span<const uint8_t> data) {
  Sha256Builder b;
  b.Update(data);
  return b.Finish();
}

Sha256Builder::Sha256Builder() : ctx_(EVP_MD_CTX_new()) {
  if (ctx_ == nullptr || EVP_DigestInit_ex(Ctx(ctx_), EVP_sha256(), nullptr) != 1) {
    std::abort();
  }
}

Sha256Builder::~Sha256Builder() { EVP_MD_CTX_free(Ctx(ctx_)); }

Sha256Builder& Sha256Builder::Update(std::span<const uint8_t> data) {
  if (!data.empty()) EVP_DigestUpdate(Ctx(ctx_), data.data(), data.size());
  return *this;
}

Sha256Builder& Sha256Builder::Update(std::string_view text) {
  return Update(std::span<const uint8_t>(
      reinterpret_cast<const uint8_t*>(text.data()), text.size()));
}

Sha256Builder& Sha256Builder::UpdateU64(uint64_t v) {
  uint8_t le[8];
  for (int i = 0; i < 8; ++i) le[i] = static_cast<uint8_t>(v >> (8 * i));
  return Update(std::span<const uint8_t>(le, 8));
}

Digest Sha256Builder::Finish() {
  Digest out{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(Ctx(ctx_), out.data(), &len);
  return out;
}

Digest ExtendMeasurement(const Digest& current, const Digest& value) {
  Sha256Builder b;
  b.Update(current).Update(value);
  return b.Finish();
}

Digest HmacSha256(std::span<const uint8_t> key, std::span<const uint8_t> msg) {
  Digest out{};
  unsigned int len = 0;
  HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), msg.data(),
       msg.size(), out.data(), &len);
  return out;
}

}  // namespace mica
