#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace iot6 {

inline constexpr std::array<std::uint8_t, 2> kDtls12Version = {254, 253};

/// One DTLS 1.2 record carrying a ClientHello, suitable as a single-datagram
/// scan probe. The first flight uses record sequence 0 and message_seq 0; a
/// cookie retry (after HelloVerifyRequest) bumps both to 1.
std::vector<std::uint8_t> dtls_client_hello(const std::array<std::uint8_t, 32>& random,
                                            std::span<const std::uint8_t> cookie = {});

/// Fixed cipher-suite offer carried by the probe, widely supported ECDHE and
/// RSA suites.
std::span<const std::uint16_t> dtls_probe_cipher_suites();

struct DtlsServerFlight {
  bool any_record = false;        // at least one well-formed DTLS record
  bool hello_verify = false;      // HelloVerifyRequest seen
  std::vector<std::uint8_t> cookie;
  bool server_hello = false;
  bool alert = false;
  std::string error;
};

/// Shallow parse of a server datagram: enough to recognize a reply, extract
/// the HVR cookie, and spot ServerHello/Alert records. Total on any input.
DtlsServerFlight dtls_parse_server_flight(std::span<const std::uint8_t> data);

}  // namespace iot6
