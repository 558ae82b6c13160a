#pragma once

#include <cstdint>
#include <memory>
#include <ostream>
#include <streambuf>
#include <string>
#include <string_view>

namespace pnp {

// Incremental SHA-256, hex-encoded on finish.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(Sha256&&) noexcept;
  Sha256& operator=(Sha256&&) noexcept;

  void update(std::string_view bytes);
  // Digest of everything fed so far; the hasher stays usable.
  std::string hex() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::string sha256_hex(std::string_view bytes);

// An output stream that hashes what is written to it and optionally
// forwards the bytes to another stream.
class DigestStream : public std::ostream {
 public:
  explicit DigestStream(std::ostream* forward = nullptr);
  std::string hex();
  std::uint64_t bytes_written() const { return buf_.count; }

 private:
  struct Buf : std::streambuf {
    Sha256 hash;
    std::ostream* forward = nullptr;
    std::uint64_t count = 0;
    std::string pending;
    int_type overflow(int_type ch) override;
    std::streamsize xsputn(const char* s, std::streamsize n) override;
    int sync() override;
    void flush_pending();
  };
  Buf buf_;
};

}  // namespace pnp
