#include "iot6scan/digest.hpp"

#include <openssl/sha.h>

#include "iot6scan/outcome.hpp"

namespace iot6 {

std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> data) {
  std::array<std::uint8_t, 32> out{};
  SHA256(data.data(), data.size(), out.data());
  return out;
}

std::string hex(std::span<const std::uint8_t> data) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (const auto b : data) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xf]);
  }
  return out;
}

std::string sha256_hex(std::span<const std::uint8_t> data) {
  const auto d = sha256(data);
  return hex(d);
}

void TranscriptDigest::append(char direction, std::span<const std::uint8_t> data) {
  buffer_.push_back(direction);
  const auto n = data.size();
  for (int shift = 24; shift >= 0; shift -= 8)
    buffer_.push_back(static_cast<char>((n >> shift) & 0xff));
  buffer_.append(reinterpret_cast<const char*>(data.data()), data.size());
}

std::array<std::uint8_t, 32> TranscriptDigest::finish() const {
  return sha256(
      std::span(reinterpret_cast<const std::uint8_t*>(buffer_.data()), buffer_.size()));
}

std::string_view to_string(HandshakeStatus s) {
  switch (s) {
    case HandshakeStatus::Success: return "success";
    case HandshakeStatus::ConnectedNoProtocol: return "connected-no-protocol";
    case HandshakeStatus::TlsFailed: return "tls-failed";
    case HandshakeStatus::Timeout: return "timeout";
    case HandshakeStatus::Refused: return "refused";
    case HandshakeStatus::ProtocolError: return "protocol-error";
  }
  return "?";
}

std::string_view to_string(TlsVersion v) {
  switch (v) {
    case TlsVersion::Tls1_0: return "tls1.0";
    case TlsVersion::Tls1_1: return "tls1.1";
    case TlsVersion::Tls1_2: return "tls1.2";
    case TlsVersion::Tls1_3: return "tls1.3";
    case TlsVersion::Dtls1_2: return "dtls1.2";
  }
  return "?";
}

std::string_view to_string(TlsFailReason r) {
  switch (r) {
    case TlsFailReason::None: return "none";
    case TlsFailReason::VersionMismatch: return "version-mismatch";
    case TlsFailReason::PeerRequiredAuth: return "peer-required-auth";
    case TlsFailReason::Alert: return "alert";
    case TlsFailReason::Reset: return "reset";
    case TlsFailReason::Timeout: return "timeout";
    case TlsFailReason::Other: return "other";
  }
  return "?";
}

std::optional<HandshakeStatus> handshake_status_from_string(std::string_view s) {
  for (const auto v :
       {HandshakeStatus::Success, HandshakeStatus::ConnectedNoProtocol,
        HandshakeStatus::TlsFailed, HandshakeStatus::Timeout, HandshakeStatus::Refused,
        HandshakeStatus::ProtocolError})
    if (to_string(v) == s) return v;
  return std::nullopt;
}

std::optional<TlsVersion> tls_version_from_string(std::string_view s) {
  for (const auto v : {TlsVersion::Tls1_0, TlsVersion::Tls1_1, TlsVersion::Tls1_2,
                       TlsVersion::Tls1_3, TlsVersion::Dtls1_2})
    if (to_string(v) == s) return v;
  return std::nullopt;
}

std::optional<TlsFailReason> tls_fail_reason_from_string(std::string_view s) {
  for (const auto v : {TlsFailReason::None, TlsFailReason::VersionMismatch,
                       TlsFailReason::PeerRequiredAuth, TlsFailReason::Alert,
                       TlsFailReason::Reset, TlsFailReason::Timeout, TlsFailReason::Other})
    if (to_string(v) == s) return v;
  return std::nullopt;
}

}  // namespace iot6
