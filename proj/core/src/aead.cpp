// Copyright 2026 The SBA Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sba/aead.hpp"

#include <openssl/evp.h>

#include <memory>
#include <stdexcept>

#include "sba/errors.hpp"

namespace sba {

namespace {

constexpr std::size_t kNonceLen = 12;
constexpr std::size_t kTagLen = 16;

using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, decltype(&EVP_CIPHER_CTX_free)>;

CipherCtx new_ctx() {
  CipherCtx ctx(EVP_CIPHER_CTX_new(), EVP_CIPHER_CTX_free);
  if (!ctx) throw std::runtime_error("cipher context allocation failed");
  return ctx;
}

}  // namespace

Aead Aead::from_key_hex(std::string_view key_hex) {
  auto raw = from_hex(key_hex);
  if (!raw || raw->size() != 32) {
    throw Error(ErrorCode::internal,
                "aead key must be 32 bytes (64 hex chars)");
  }
  Aead aead;
  std::copy(raw->begin(), raw->end(), aead.key_.begin());
  return aead;
}

Bytes Aead::encode(std::span<const std::uint8_t> plaintext) const {
  Bytes nonce = random_bytes(kNonceLen);
  Bytes out;
  out.reserve(kNonceLen + plaintext.size() + kTagLen);
  out.insert(out.end(), nonce.begin(), nonce.end());
  out.resize(kNonceLen + plaintext.size() + kTagLen);

  auto ctx = new_ctx();
  int len = 0;
  if (EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key_.data(),
                         nonce.data()) != 1 ||
      (!plaintext.empty() &&
       EVP_EncryptUpdate(ctx.get(), out.data() + kNonceLen, &len,
                         plaintext.data(),
                         static_cast<int>(plaintext.size())) != 1)) {
    throw std::runtime_error("aead encryption failed");
  }
  int final_len = 0;
  if (EVP_EncryptFinal_ex(ctx.get(), out.data() + kNonceLen + len,
                          &final_len) != 1 ||
      EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG,
                          static_cast<int>(kTagLen),
                          out.data() + kNonceLen + plaintext.size()) != 1) {
    throw std::runtime_error("aead encryption failed");
  }
  return out;
}

Bytes Aead::decode(std::span<const std::uint8_t> sealed) const {
  if (sealed.size() < kNonceLen + kTagLen) {
    throw Error(ErrorCode::integrity_violation, "sealed content too short");
  }
  const std::size_t ct_len = sealed.size() - kNonceLen - kTagLen;
  Bytes out(ct_len);

  auto ctx = new_ctx();
  int len = 0;
  if (EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key_.data(),
                         sealed.data()) != 1 ||
      (ct_len > 0 &&
       EVP_DecryptUpdate(ctx.get(), out.data(), &len,
                         sealed.data() + kNonceLen,
                         static_cast<int>(ct_len)) != 1)) {
    throw std::runtime_error("aead decryption failed");
  }
  Bytes tag(sealed.end() - kTagLen, sealed.end());
  if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG,
                          static_cast<int>(kTagLen), tag.data()) != 1) {
    throw std::runtime_error("aead decryption failed");
  }
  int final_len = 0;
  if (EVP_DecryptFinal_ex(ctx.get(), out.data() + len, &final_len) != 1) {
    throw Error(ErrorCode::integrity_violation,
                "sealed content failed authentication");
  }
  return out;
}

}  // namespace sba
