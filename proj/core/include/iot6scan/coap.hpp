#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "iot6scan/outcome.hpp"

namespace iot6 {

enum class CoapType : std::uint8_t {
  Confirmable = 0,
  NonConfirmable = 1,
  Ack = 2,
  Reset = 3,
};

inline constexpr std::uint8_t kCoapCodeEmpty = 0x00;
inline constexpr std::uint8_t kCoapCodeGet = 0x01;
inline constexpr std::uint8_t kCoapCodeContent = 0x45;  // 2.05
inline constexpr std::uint16_t kCoapOptionUriPath = 11;

struct CoapOption {
  std::uint16_t number = 0;
  std::vector<std::uint8_t> value;
  bool operator==(const CoapOption&) const = default;
};

struct CoapMessage {
  CoapType type = CoapType::Confirmable;
  std::uint8_t code = 0;
  std::uint16_t message_id = 0;
  std::vector<std::uint8_t> token;
  std::vector<CoapOption> options;  // must be sorted by number for encoding
  std::vector<std::uint8_t> payload;

  bool is_response() const { return (code >> 5) >= 2; }
  /// "2.05" style rendering of the code field.
  std::string code_text() const;
  bool operator==(const CoapMessage&) const = default;
};

/// Serializes a message. Throws std::invalid_argument when the message
/// violates the wire format (token over 8 bytes, unsorted options).
std::vector<std::uint8_t> coap_encode(const CoapMessage& m);

struct CoapDecodeResult {
  std::optional<CoapMessage> message;
  std::string error;
  explicit operator bool() const { return message.has_value(); }
};

/// Total decoder: any byte string yields either a message or an error.
CoapDecodeResult coap_decode(std::span<const std::uint8_t> data);

/// The scan probe: a Confirmable GET for /.well-known/core.
std::vector<std::uint8_t> coap_encode_probe(std::uint16_t message_id,
                                            std::span<const std::uint8_t> token = {});

/// Datagram-level machine for the application stage: sends the discovery
/// probe, classifies the first well-formed reply.
class CoapRequestMachine : public HandshakeMachine {
 public:
  explicit CoapRequestMachine(std::uint16_t message_id = 1,
                              std::vector<std::uint8_t> token = {});
  std::vector<std::uint8_t> open() override;
  MachineStep on_bytes(std::span<const std::uint8_t> data) override;
  MachineStep on_eof() override;
  MachineStep on_timeout() override;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

}  // namespace iot6
