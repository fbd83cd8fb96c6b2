#include "iot6scan/channel.hpp"

#include <errno.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <poll.h>
#include <string.h>
#include <sys/socket.h>
#include <unistd.h>

namespace iot6 {

namespace {

sockaddr_in6 make_sockaddr(const Ipv6Address& addr, std::uint16_t port) {
  sockaddr_in6 sa{};
  sa.sin6_family = AF_INET6;
  sa.sin6_port = htons(port);
  memcpy(sa.sin6_addr.s6_addr, addr.bytes.data(), 16);
  return sa;
}

bool set_nonblocking(int fd) {
  const int flags = fcntl(fd, F_GETFL, 0);
  return flags >= 0 && fcntl(fd, F_SETFL, flags | O_NONBLOCK) == 0;
}

}  // namespace

ConnectResult tcp_connect(const Ipv6Address& addr, std::uint16_t port,
                          std::chrono::milliseconds timeout) {
  ConnectResult r;
  const int fd = socket(AF_INET6, SOCK_STREAM, 0);
  if (fd < 0) {
    r.error = strerror(errno);
    return r;
  }
  if (!set_nonblocking(fd)) {
    r.error = strerror(errno);
    close(fd);
    return r;
  }
  const auto sa = make_sockaddr(addr, port);
  const auto start = std::chrono::steady_clock::now();
  int rc = connect(fd, reinterpret_cast<const sockaddr*>(&sa), sizeof(sa));
  if (rc != 0 && errno != EINPROGRESS) {
    r.status = errno == ECONNREFUSED ? ConnectStatus::Refused
               : (errno == ENETUNREACH || errno == EHOSTUNREACH)
                   ? ConnectStatus::Unreachable
                   : ConnectStatus::Error;
    r.error = strerror(errno);
    close(fd);
    return r;
  }
  if (rc != 0) {
    pollfd pfd{fd, POLLOUT, 0};
    rc = poll(&pfd, 1, static_cast<int>(timeout.count()));
    if (rc == 0) {
      r.status = ConnectStatus::Timeout;
      close(fd);
      return r;
    }
    if (rc < 0) {
      r.error = strerror(errno);
      close(fd);
      return r;
    }
    int err = 0;
    socklen_t len = sizeof(err);
    getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len);
    if (err != 0) {
      r.status = err == ECONNREFUSED ? ConnectStatus::Refused
                 : (err == ENETUNREACH || err == EHOSTUNREACH)
                     ? ConnectStatus::Unreachable
                 : err == ETIMEDOUT ? ConnectStatus::Timeout
                                    : ConnectStatus::Error;
      r.error = strerror(err);
      close(fd);
      return r;
    }
  }
  r.rtt = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::steady_clock::now() - start);
  r.status = ConnectStatus::Ok;
  r.fd = fd;
  return r;
}

ConnectResult udp_connect(const Ipv6Address& addr, std::uint16_t port) {
  ConnectResult r;
  const int fd = socket(AF_INET6, SOCK_DGRAM, 0);
  if (fd < 0) {
    r.error = strerror(errno);
    return r;
  }
  if (!set_nonblocking(fd)) {
    r.error = strerror(errno);
    close(fd);
    return r;
  }
  const auto sa = make_sockaddr(addr, port);
  if (connect(fd, reinterpret_cast<const sockaddr*>(&sa), sizeof(sa)) != 0) {
    r.status = (errno == ENETUNREACH || errno == EHOSTUNREACH)
                   ? ConnectStatus::Unreachable
                   : ConnectStatus::Error;
    r.error = strerror(errno);
    close(fd);
    return r;
  }
  r.status = ConnectStatus::Ok;
  r.fd = fd;
  return r;
}

TcpChannel::TcpChannel(int fd) : fd_(fd) {}
TcpChannel::~TcpChannel() {
  if (fd_ >= 0) close(fd_);
}

bool TcpChannel::write_all(std::span<const std::uint8_t> data) {
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = send(fd_, data.data() + off, data.size() - off, MSG_NOSIGNAL);
    if (n > 0) {
      off += static_cast<std::size_t>(n);
      continue;
    }
    if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK)) {
      pollfd pfd{fd_, POLLOUT, 0};
      if (poll(&pfd, 1, 5000) <= 0) return false;
      continue;
    }
    return false;
  }
  return true;
}

ReadResult TcpChannel::read_some(std::span<std::uint8_t> buf,
                                 std::chrono::milliseconds timeout) {
  pollfd pfd{fd_, POLLIN, 0};
  const int rc = poll(&pfd, 1, static_cast<int>(timeout.count()));
  if (rc == 0) return {ReadStatus::Timeout, 0};
  if (rc < 0) return {ReadStatus::Error, 0};
  const ssize_t n = recv(fd_, buf.data(), buf.size(), 0);
  if (n > 0) return {ReadStatus::Data, static_cast<std::size_t>(n)};
  if (n == 0) return {ReadStatus::Eof, 0};
  if (errno == ECONNRESET) return {ReadStatus::Reset, 0};
  return {ReadStatus::Error, 0};
}

UdpChannel::UdpChannel(int fd) : fd_(fd) {}
UdpChannel::~UdpChannel() {
  if (fd_ >= 0) close(fd_);
}

bool UdpChannel::write_all(std::span<const std::uint8_t> data) {
  return send(fd_, data.data(), data.size(), MSG_NOSIGNAL) ==
         static_cast<ssize_t>(data.size());
}

ReadResult UdpChannel::read_some(std::span<std::uint8_t> buf,
                                 std::chrono::milliseconds timeout) {
  pollfd pfd{fd_, POLLIN, 0};
  const int rc = poll(&pfd, 1, static_cast<int>(timeout.count()));
  if (rc == 0) return {ReadStatus::Timeout, 0};
  if (rc < 0) return {ReadStatus::Error, 0};
  const ssize_t n = recv(fd_, buf.data(), buf.size(), 0);
  if (n >= 0) return {ReadStatus::Data, static_cast<std::size_t>(n)};
  // ICMPv6 port unreachable surfaces here on a connected socket
  if (errno == ECONNREFUSED) return {ReadStatus::Reset, 0};
  return {ReadStatus::Error, 0};
}

}  // namespace iot6
