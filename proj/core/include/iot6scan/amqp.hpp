#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "iot6scan/outcome.hpp"

namespace iot6 {

inline constexpr std::array<std::uint8_t, 8> kAmqp091Header = {'A', 'M', 'Q', 'P',
                                                               0, 0, 9, 1};

/// "0-9-1" / "1.0" when the 8 bytes are a protocol header, null otherwise.
std::optional<std::string> amqp_parse_protocol_header(std::span<const std::uint8_t> data);

struct AmqpFrame {
  std::uint8_t type = 0;
  std::uint16_t channel = 0;
  std::vector<std::uint8_t> payload;
};

enum class AmqpDecodeStatus { Ok, NeedMore, Malformed };

struct AmqpFrameDecode {
  AmqpDecodeStatus status = AmqpDecodeStatus::Malformed;
  AmqpFrame frame;
  std::size_t consumed = 0;
  std::string error;
};

/// Decodes one 0-9-1 frame including the 0xCE end octet.
AmqpFrameDecode amqp_decode_frame(std::span<const std::uint8_t> data);

/// True iff the frame is a Connection.Start method (class 10, method 10) on
/// channel 0.
bool amqp_is_connection_start(const AmqpFrame& f);

/// Minimal server-side Connection.Start frame (version 0-9, PLAIN, en_US).
std::vector<std::uint8_t> amqp_encode_connection_start();

/// Sends the 0-9-1 protocol header; Success on a parsed Connection.Start or
/// on a server-advertised alternative protocol header.
class AmqpHandshakeMachine : public HandshakeMachine {
 public:
  AmqpHandshakeMachine();
  std::vector<std::uint8_t> open() override;
  MachineStep on_bytes(std::span<const std::uint8_t> data) override;
  MachineStep on_eof() override;
  MachineStep on_timeout() override;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

}  // namespace iot6
