#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace iot6 {

enum class HandshakeStatus {
  Success,
  ConnectedNoProtocol,
  TlsFailed,
  Timeout,
  Refused,
  ProtocolError,
};

enum class TlsVersion { Tls1_0, Tls1_1, Tls1_2, Tls1_3, Dtls1_2 };

enum class TlsFailReason {
  None,
  VersionMismatch,
  PeerRequiredAuth,
  Alert,
  Reset,
  Timeout,
  Other,
};

std::string_view to_string(HandshakeStatus s);
std::string_view to_string(TlsVersion v);
std::string_view to_string(TlsFailReason r);
std::optional<HandshakeStatus> handshake_status_from_string(std::string_view s);
std::optional<TlsVersion> tls_version_from_string(std::string_view s);
std::optional<TlsFailReason> tls_fail_reason_from_string(std::string_view s);

struct TlsInfo {
  TlsVersion max_version{};
  std::vector<std::vector<std::uint8_t>> certificate_chain;  // DER, leaf first
  std::optional<std::string> sni_sent;
};

/// Result of one application-layer handshake attempt against one target.
struct HandshakeOutcome {
  HandshakeStatus status = HandshakeStatus::Timeout;
  std::string detail;  // per-protocol evidence: return code, version, error code
  std::optional<std::string> banner_or_features;
  std::optional<TlsInfo> tls;
  TlsFailReason tls_fail_reason = TlsFailReason::None;
  std::array<std::uint8_t, 32> transcript_digest{};
};

/// What a state machine wants done next: bytes to send, and the final outcome
/// once it has concluded. A machine that has produced an outcome is finished;
/// feeding it further events is a caller bug.
struct MachineStep {
  std::vector<std::uint8_t> send;
  std::optional<HandshakeOutcome> outcome;
};

/// Sans-IO handshake state machine: the scanner owns the socket and feeds
/// events in; machines only transform bytes and never perform I/O. Each
/// instance drives exactly one connection.
class HandshakeMachine {
 public:
  virtual ~HandshakeMachine() = default;

  /// First client flight. May be empty (Telnet waits for the server).
  virtual std::vector<std::uint8_t> open() = 0;
  virtual MachineStep on_bytes(std::span<const std::uint8_t> data) = 0;
  /// Orderly close by the peer.
  virtual MachineStep on_eof() = 0;
  /// Read window expired with no further data.
  virtual MachineStep on_timeout() = 0;

  /// How long the driver should wait for server bytes before on_timeout.
  virtual std::chrono::milliseconds read_window() const {
    return std::chrono::milliseconds(10000);
  }
};

}  // namespace iot6
