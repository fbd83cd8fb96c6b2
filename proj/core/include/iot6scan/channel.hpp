#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <variant>

#include "iot6scan/ip.hpp"

namespace iot6 {

enum class ReadStatus { Data, Eof, Timeout, Reset, Error };

struct ReadResult {
  ReadStatus status = ReadStatus::Error;
  std::size_t n = 0;
};

/// Blocking-with-deadline byte stream used by the machine driver. TCP, TLS,
/// UDP-datagram and DTLS transports all sit behind this.
class ByteChannel {
 public:
  virtual ~ByteChannel() = default;
  virtual bool write_all(std::span<const std::uint8_t> data) = 0;
  virtual ReadResult read_some(std::span<std::uint8_t> buf,
                               std::chrono::milliseconds timeout) = 0;
};

enum class ConnectStatus { Ok, Refused, Timeout, Unreachable, Error };

struct ConnectResult {
  ConnectStatus status = ConnectStatus::Error;
  int fd = -1;
  std::chrono::microseconds rtt{0};
  std::string error;
};

/// Non-blocking TCP connect with deadline; the returned fd stays
/// non-blocking.
ConnectResult tcp_connect(const Ipv6Address& addr, std::uint16_t port,
                          std::chrono::milliseconds timeout);

/// Connected UDP socket (so ICMPv6 port-unreachable surfaces as
/// ECONNREFUSED); non-blocking.
ConnectResult udp_connect(const Ipv6Address& addr, std::uint16_t port);

/// Plain TCP stream over an owned fd.
class TcpChannel : public ByteChannel {
 public:
  explicit TcpChannel(int fd);
  ~TcpChannel() override;
  TcpChannel(const TcpChannel&) = delete;
  TcpChannel& operator=(const TcpChannel&) = delete;

  bool write_all(std::span<const std::uint8_t> data) override;
  ReadResult read_some(std::span<std::uint8_t> buf,
                       std::chrono::milliseconds timeout) override;
  int fd() const { return fd_; }

 private:
  int fd_;
};

/// Datagram exchange over a connected UDP fd; each read returns one
/// datagram.
class UdpChannel : public ByteChannel {
 public:
  explicit UdpChannel(int fd);
  ~UdpChannel() override;
  UdpChannel(const UdpChannel&) = delete;
  UdpChannel& operator=(const UdpChannel&) = delete;

  bool write_all(std::span<const std::uint8_t> data) override;
  ReadResult read_some(std::span<std::uint8_t> buf,
                       std::chrono::milliseconds timeout) override;
  int fd() const { return fd_; }

 private:
  int fd_;
};

}  // namespace iot6
