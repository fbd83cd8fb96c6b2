#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>

namespace iot6 {

std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> data);
std::string hex(std::span<const std::uint8_t> data);
std::string sha256_hex(std::span<const std::uint8_t> data);

/// Accumulates a direction-tagged transcript of one handshake and hashes it.
/// Every sent and received byte sequence enters the digest, so two runs with
/// identical wire traffic produce identical digests.
class TranscriptDigest {
 public:
  void sent(std::span<const std::uint8_t> data) { append('>', data); }
  void received(std::span<const std::uint8_t> data) { append('<', data); }
  std::array<std::uint8_t, 32> finish() const;

 private:
  void append(char direction, std::span<const std::uint8_t> data);
  std::string buffer_;
};

}  // namespace iot6
