#pragma once

#include <memory>
#include <string>
#include <string_view>

namespace synthweaver {

// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

// Standard base64 with padding. decode throws std::invalid_argument.
std::string base64_encode(std::string_view data);
std::string base64_decode(std::string_view text);

// Incremental SHA-256 for hashing several files as one stream.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(std::string_view data);
  std::string hex_digest();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace synthweaver
