#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "iot6scan/outcome.hpp"

namespace iot6 {

inline constexpr std::uint32_t kOpcuaBadTcpEndpointUrlInvalid = 0x80830000;
inline constexpr std::uint32_t kOpcuaBadTcpMessageTypeInvalid = 0x807E0000;

/// OPC UA TCP Hello. All integers little-endian on the wire.
struct OpcuaHello {
  std::uint32_t protocol_version = 0;
  std::uint32_t receive_buffer_size = 65536;
  std::uint32_t send_buffer_size = 65536;
  std::uint32_t max_message_size = 0;  // 0 = no limit
  std::uint32_t max_chunk_count = 0;
  std::string endpoint_url;
};

struct OpcuaAck {
  std::uint32_t protocol_version = 0;
  std::uint32_t receive_buffer_size = 65536;
  std::uint32_t send_buffer_size = 65536;
  std::uint32_t max_message_size = 0;
  std::uint32_t max_chunk_count = 0;
};

struct OpcuaError {
  std::uint32_t code = 0;
  std::string reason;
};

std::vector<std::uint8_t> opcua_encode_hello(const OpcuaHello& h);
std::vector<std::uint8_t> opcua_encode_ack(const OpcuaAck& a);
std::vector<std::uint8_t> opcua_encode_error(const OpcuaError& e);

enum class OpcuaMessageType { Hello, Ack, Error, Other };

struct OpcuaDecodeResult {
  bool complete = false;      // full message present
  bool malformed = false;     // cannot ever become valid
  OpcuaMessageType type = OpcuaMessageType::Other;
  std::optional<OpcuaHello> hello;
  std::optional<OpcuaAck> ack;
  std::optional<OpcuaError> error;
  std::size_t consumed = 0;
  std::string detail;
};

/// Decodes one "XXXF" + length framed message; total on arbitrary input.
OpcuaDecodeResult opcua_decode(std::span<const std::uint8_t> data);

/// HEL/ACK exchange. ERR replies are recorded as ProtocolError with the
/// status code.
class OpcuaHelloMachine : public HandshakeMachine {
 public:
  /// endpoint_url must look like opc.tcp://host:port.
  explicit OpcuaHelloMachine(std::string endpoint_url);
  std::vector<std::uint8_t> open() override;
  MachineStep on_bytes(std::span<const std::uint8_t> data) override;
  MachineStep on_eof() override;
  MachineStep on_timeout() override;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

}  // namespace iot6
