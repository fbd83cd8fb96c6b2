#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>

#include "iot6scan/channel.hpp"
#include "iot6scan/outcome.hpp"

namespace iot6 {

struct TlsClientConfig {
  TlsVersion min_version = TlsVersion::Tls1_0;
  TlsVersion max_version = TlsVersion::Tls1_3;
  std::optional<std::string> sni;  // not sent unless configured
  std::chrono::milliseconds connect_timeout{5000};
  std::chrono::milliseconds handshake_timeout{10000};
};

struct TlsFailure {
  TlsFailReason reason = TlsFailReason::Other;
  std::string detail;
  bool cert_requested = false;
};

/// TLS stream over an owned, already-connected TCP fd. Certificate
/// verification never aborts the handshake; chains are captured for later
/// classification.
class TlsChannel : public ByteChannel {
 public:
  using HandshakeResult = std::variant<std::unique_ptr<TlsChannel>, TlsFailure>;

  /// Performs the client handshake; takes ownership of fd either way.
  static HandshakeResult handshake(int fd, const TlsClientConfig& cfg);

  ~TlsChannel() override;
  TlsChannel(const TlsChannel&) = delete;
  TlsChannel& operator=(const TlsChannel&) = delete;

  bool write_all(std::span<const std::uint8_t> data) override;
  ReadResult read_some(std::span<std::uint8_t> buf,
                       std::chrono::milliseconds timeout) override;

  const TlsInfo& info() const;
  bool cert_requested() const;
  /// True when the peer broke the session with an alert or close before any
  /// application byte arrived.
  bool failed_before_app_data() const;

 private:
  struct Impl;
  explicit TlsChannel(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

/// DTLS 1.2 stream over an owned, connected UDP fd.
class DtlsChannel : public ByteChannel {
 public:
  using HandshakeResult = std::variant<std::unique_ptr<DtlsChannel>, TlsFailure>;

  static HandshakeResult handshake(int fd, const TlsClientConfig& cfg);

  ~DtlsChannel() override;
  DtlsChannel(const DtlsChannel&) = delete;
  DtlsChannel& operator=(const DtlsChannel&) = delete;

  bool write_all(std::span<const std::uint8_t> data) override;
  ReadResult read_some(std::span<std::uint8_t> buf,
                       std::chrono::milliseconds timeout) override;

  const TlsInfo& info() const;

 private:
  struct Impl;
  explicit DtlsChannel(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

struct TlsProbeOutcome {
  std::optional<TlsInfo> info;  // set on success
  TlsFailReason reason = TlsFailReason::None;
  std::string detail;
};

/// One handshake offering versions up to cfg.max_version; returns the
/// negotiated version and the presented chain.
TlsProbeOutcome tls_capability_probe(const Ipv6Address& addr, std::uint16_t port,
                                     const TlsClientConfig& cfg);

/// Highest-version detection: offer up to 1.3 in one handshake; when the
/// server aborts instead of negotiating down, retry once per lower version
/// (1.2, then 1.0) on fresh connections.
TlsProbeOutcome detect_max_tls_version(const Ipv6Address& addr, std::uint16_t port,
                                       const TlsClientConfig& cfg = {});

}  // namespace iot6
