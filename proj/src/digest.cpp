#include "pnp/digest.hpp"

#include <openssl/evp.h>

#include <array>
#include <stdexcept>

namespace pnp {

struct Sha256::Impl {
  EVP_MD_CTX* ctx = nullptr;

  Impl() : ctx(EVP_MD_CTX_new()) {
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
      throw std::runtime_error("SHA-256 initialisation failed");
    }
  }
  ~Impl() { EVP_MD_CTX_free(ctx); }
};

Sha256::Sha256() : impl_(std::make_unique<Impl>()) {}
Sha256::~Sha256() = default;
Sha256::Sha256(Sha256&&) noexcept = default;
Sha256& Sha256::operator=(Sha256&&) noexcept = default;

void Sha256::update(std::string_view bytes) {
  EVP_DigestUpdate(impl_->ctx, bytes.data(), bytes.size());
}

std::string Sha256::hex() const {
  EVP_MD_CTX* copy = EVP_MD_CTX_new();
  EVP_MD_CTX_copy_ex(copy, impl_->ctx);
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(copy, md.data(), &len);
  EVP_MD_CTX_free(copy);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 0xF];
  }
  return out;
}

std::string sha256_hex(std::string_view bytes) {
  Sha256 h;
  h.update(bytes);
  return h.hex();
}

DigestStream::DigestStream(std::ostream* forward) : std::ostream(&buf_) {
  buf_.forward = forward;
}

std::string DigestStream::hex() {
  flush();
  return buf_.hash.hex();
}

DigestStream::Buf::int_type DigestStream::Buf::overflow(int_type ch) {
  if (ch != traits_type::eof()) {
    char c = traits_type::to_char_type(ch);
    xsputn(&c, 1);
  }
  return ch;
}

std::streamsize DigestStream::Buf::xsputn(const char* s, std::streamsize n) {
  pending.append(s, static_cast<std::size_t>(n));
  count += static_cast<std::uint64_t>(n);
  if (pending.size() >= (1u << 16)) flush_pending();
  return n;
}

int DigestStream::Buf::sync() {
  flush_pending();
  if (forward) forward->flush();
  return 0;
}

void DigestStream::Buf::flush_pending() {
  if (pending.empty()) return;
  hash.update(pending);
  if (forward) forward->write(pending.data(), static_cast<std::streamsize>(pending.size()));
  pending.clear();
}

}  // namespace pnp
