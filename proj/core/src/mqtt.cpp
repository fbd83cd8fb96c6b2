#include "iot6scan/mqtt.hpp"

#include <stdexcept>

#include "iot6scan/digest.hpp"

namespace iot6 {

namespace {

void append_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
}

void append_string(std::vector<std::uint8_t>& out, std::string_view s) {
  append_u16(out, static_cast<std::uint16_t>(s.size()));
  out.insert(out.end(), s.begin(), s.end());
}

void append_remaining_length(std::vector<std::uint8_t>& out, std::uint32_t n) {
  do {
    std::uint8_t digit = n % 128;
    n /= 128;
    if (n > 0) digit |= 0x80;
    out.push_back(digit);
  } while (n > 0);
}

}  // namespace

std::vector<std::uint8_t> mqtt_encode_connect(std::string_view client_id,
                                              std::uint16_t keepalive_s) {
  if (client_id.size() > 65535)
    throw std::invalid_argument("mqtt: client id too long");
  std::vector<std::uint8_t> body;
  append_string(body, "MQTT");
  body.push_back(0x04);  // protocol level 4 = 3.1.1
  body.push_back(0x02);  // clean session, no will, no auth
  append_u16(body, keepalive_s);
  append_string(body, client_id);

  std::vector<std::uint8_t> out;
  out.push_back(kMqttPacketConnect << 4);
  append_remaining_length(out, static_cast<std::uint32_t>(body.size()));
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

MqttHeaderDecode mqtt_decode_fixed_header(std::span<const std::uint8_t> data) {
  if (data.empty()) return {MqttDecodeStatus::NeedMore, {}, {}};
  MqttFixedHeader h;
  h.type = data[0] >> 4;
  h.flags = data[0] & 0x0f;
  if (h.type == 0) return {MqttDecodeStatus::Malformed, {}, "reserved packet type 0"};
  std::uint32_t value = 0;
  std::uint32_t multiplier = 1;
  std::size_t pos = 1;
  for (;;) {
    if (pos >= data.size()) return {MqttDecodeStatus::NeedMore, {}, {}};
    const std::uint8_t digit = data[pos++];
    value += (digit & 0x7f) * multiplier;
    if ((digit & 0x80) == 0) break;
    multiplier *= 128;
    if (pos - 1 >= 4) return {MqttDecodeStatus::Malformed, {}, "remaining length over 4 bytes"};
  }
  h.remaining_length = value;
  h.header_size = pos;
  return {MqttDecodeStatus::Ok, h, {}};
}

std::optional<MqttConnack> mqtt_parse_connack(const MqttFixedHeader& h,
                                              std::span<const std::uint8_t> body) {
  if (h.type != kMqttPacketConnack || h.flags != 0) return std::nullopt;
  if (h.remaining_length != 2 || body.size() < 2) return std::nullopt;
  if (body[0] & 0xfe) return std::nullopt;  // only session-present may be set
  return MqttConnack{(body[0] & 1) != 0, body[1]};
}

std::optional<MqttConnect> mqtt_parse_connect(const MqttFixedHeader& h,
                                              std::span<const std::uint8_t> body) {
  if (h.type != kMqttPacketConnect) return std::nullopt;
  if (body.size() < 10) return std::nullopt;
  if (body[0] != 0 || body[1] != 4) return std::nullopt;
  if (body[2] != 'M' || body[3] != 'Q' || body[4] != 'T' || body[5] != 'T')
    return std::nullopt;
  if (body[6] != 0x04) return std::nullopt;  // protocol level 3.1.1 only
  MqttConnect c;
  c.clean_session = (body[7] & 0x02) != 0;
  c.keepalive_s = static_cast<std::uint16_t>((body[8] << 8) | body[9]);
  if (body.size() < 12) return std::nullopt;
  const std::size_t id_len = (body[10] << 8) | body[11];
  if (body.size() < 12 + id_len) return std::nullopt;
  c.client_id.assign(body.begin() + 12, body.begin() + 12 + id_len);
  return c;
}

std::vector<std::uint8_t> mqtt_encode_connack(bool session_present,
                                              std::uint8_t return_code) {
  return {kMqttPacketConnack << 4, 0x02,
          static_cast<std::uint8_t>(session_present ? 1 : 0), return_code};
}

struct MqttConnectMachine::Impl {
  std::string client_id;
  std::vector<std::uint8_t> buffer;
  TranscriptDigest digest;
  bool saw_bytes = false;

  HandshakeOutcome outcome(HandshakeStatus status, std::string detail) {
    HandshakeOutcome o;
    o.status = status;
    o.detail = std::move(detail);
    o.transcript_digest = digest.finish();
    return o;
  }
};

MqttConnectMachine::MqttConnectMachine(std::string client_id)
    : impl_(std::make_shared<Impl>()) {
  impl_->client_id = std::move(client_id);
}

std::vector<std::uint8_t> MqttConnectMachine::open() {
  auto connect = mqtt_encode_connect(impl_->client_id);
  impl_->digest.sent(connect);
  return connect;
}

MachineStep MqttConnectMachine::on_bytes(std::span<const std::uint8_t> data) {
  impl_->digest.received(data);
  impl_->saw_bytes = true;
  impl_->buffer.insert(impl_->buffer.end(), data.begin(), data.end());
  const auto header = mqtt_decode_fixed_header(impl_->buffer);
  if (header.status == MqttDecodeStatus::NeedMore) return {};
  if (header.status == MqttDecodeStatus::Malformed)
    return {{}, impl_->outcome(HandshakeStatus::ProtocolError, header.error)};
  const auto& h = header.header;
  if (impl_->buffer.size() < h.header_size + h.remaining_length) return {};
  const std::span<const std::uint8_t> body(impl_->buffer.data() + h.header_size,
                                           h.remaining_length);
  const auto connack = mqtt_parse_connack(h, body);
  if (!connack)
    return {{}, impl_->outcome(HandshakeStatus::ProtocolError,
                               "first packet not a well-formed CONNACK")};
  return {{}, impl_->outcome(HandshakeStatus::Success,
                             "connack return code " + std::to_string(connack->return_code))};
}

MachineStep MqttConnectMachine::on_eof() {
  if (!impl_->saw_bytes)
    return {{}, impl_->outcome(HandshakeStatus::ConnectedNoProtocol, "closed without bytes")};
  return {{}, impl_->outcome(HandshakeStatus::ProtocolError, "closed mid-packet")};
}

MachineStep MqttConnectMachine::on_timeout() {
  if (!impl_->saw_bytes)
    return {{}, impl_->outcome(HandshakeStatus::Timeout, "no reply")};
  return {{}, impl_->outcome(HandshakeStatus::Timeout, "reply incomplete")};
}

}  // namespace iot6
