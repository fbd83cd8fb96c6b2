#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "iot6scan/outcome.hpp"

namespace iot6 {

inline constexpr std::uint8_t kMqttPacketConnect = 1;
inline constexpr std::uint8_t kMqttPacketConnack = 2;

/// MQTT 3.1.1 CONNECT with clean session and the given keepalive.
std::vector<std::uint8_t> mqtt_encode_connect(std::string_view client_id,
                                              std::uint16_t keepalive_s = 60);

struct MqttFixedHeader {
  std::uint8_t type = 0;
  std::uint8_t flags = 0;
  std::uint32_t remaining_length = 0;
  std::size_t header_size = 0;  // bytes consumed by the fixed header itself
};

enum class MqttDecodeStatus { Ok, NeedMore, Malformed };

struct MqttHeaderDecode {
  MqttDecodeStatus status = MqttDecodeStatus::Malformed;
  MqttFixedHeader header;
  std::string error;
};

/// Decodes the fixed header including the variable-length remaining-length
/// field. Total: malformed varints report Malformed, short input NeedMore.
MqttHeaderDecode mqtt_decode_fixed_header(std::span<const std::uint8_t> data);

struct MqttConnack {
  bool session_present = false;
  std::uint8_t return_code = 0;
};

/// Parses a CONNACK packet body (2 bytes). Null on malformed input.
std::optional<MqttConnack> mqtt_parse_connack(const MqttFixedHeader& h,
                                              std::span<const std::uint8_t> body);

struct MqttConnect {
  std::string client_id;
  std::uint16_t keepalive_s = 0;
  bool clean_session = false;
};

/// Server-side parse of a CONNECT packet body, enough for a responder to
/// validate the protocol name and level. Null on malformed input.
std::optional<MqttConnect> mqtt_parse_connect(const MqttFixedHeader& h,
                                              std::span<const std::uint8_t> body);

std::vector<std::uint8_t> mqtt_encode_connack(bool session_present,
                                              std::uint8_t return_code);

/// CONNECT/CONNACK exchange: Success iff a well-formed CONNACK arrives, with
/// any return code — a refusal still proves the peer speaks MQTT.
class MqttConnectMachine : public HandshakeMachine {
 public:
  explicit MqttConnectMachine(std::string client_id = "iot6scan");
  std::vector<std::uint8_t> open() override;
  MachineStep on_bytes(std::span<const std::uint8_t> data) override;
  MachineStep on_eof() override;
  MachineStep on_timeout() override;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

}  // namespace iot6
