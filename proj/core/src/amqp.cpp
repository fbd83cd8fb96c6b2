#include "iot6scan/amqp.hpp"

#include "iot6scan/digest.hpp"

namespace iot6 {

std::optional<std::string> amqp_parse_protocol_header(std::span<const std::uint8_t> data) {
  if (data.size() < 8) return std::nullopt;
  if (data[0] != 'A' || data[1] != 'M' || data[2] != 'Q' || data[3] != 'P')
    return std::nullopt;
  if (data[4] == 0 && data[5] == 0 && data[6] == 9 && data[7] == 1) return "0-9-1";
  if (data[4] == 0 && data[5] == 0 && data[6] == 9 && data[7] == 0) return "0-9";
  if (data[4] == 0 && data[5] == 0 && data[6] == 8 && data[7] == 0) return "0-8";
  if (data[4] <= 3 && data[5] >= 1) {
    // 1.0 family header: protocol id 0 (plain), 2 (TLS), 3 (SASL), then
    // major.minor.revision
    return std::to_string(data[5]) + "." + std::to_string(data[6]);
  }
  return std::nullopt;
}

AmqpFrameDecode amqp_decode_frame(std::span<const std::uint8_t> data) {
  if (data.size() < 7) return {AmqpDecodeStatus::NeedMore, {}, 0, {}};
  AmqpFrame f;
  f.type = data[0];
  if (f.type < 1 || f.type > 8)
    return {AmqpDecodeStatus::Malformed, {}, 0, "unknown frame type"};
  f.channel = static_cast<std::uint16_t>((data[1] << 8) | data[2]);
  const std::uint32_t size = (static_cast<std::uint32_t>(data[3]) << 24) |
                             (static_cast<std::uint32_t>(data[4]) << 16) |
                             (static_cast<std::uint32_t>(data[5]) << 8) | data[6];
  if (size > 16 * 1024 * 1024)
    return {AmqpDecodeStatus::Malformed, {}, 0, "frame size implausible"};
  const std::size_t total = 7 + static_cast<std::size_t>(size) + 1;
  if (data.size() < total) return {AmqpDecodeStatus::NeedMore, {}, 0, {}};
  if (data[total - 1] != 0xce)
    return {AmqpDecodeStatus::Malformed, {}, 0, "missing frame-end octet"};
  f.payload.assign(data.begin() + 7, data.begin() + 7 + size);
  return {AmqpDecodeStatus::Ok, f, total, {}};
}

bool amqp_is_connection_start(const AmqpFrame& f) {
  if (f.type != 1 || f.channel != 0 || f.payload.size() < 4) return false;
  const std::uint16_t class_id = static_cast<std::uint16_t>((f.payload[0] << 8) | f.payload[1]);
  const std::uint16_t method_id = static_cast<std::uint16_t>((f.payload[2] << 8) | f.payload[3]);
  return class_id == 10 && method_id == 10;
}

std::vector<std::uint8_t> amqp_encode_connection_start() {
  std::vector<std::uint8_t> payload = {0, 10, 0, 10};  // class 10, method 10
  payload.push_back(0);                                // version-major
  payload.push_back(9);                                // version-minor
  for (int i = 0; i < 4; ++i) payload.push_back(0);    // empty server-properties table
  const std::string mechanisms = "PLAIN";
  payload.push_back(0);
  payload.push_back(0);
  payload.push_back(0);
  payload.push_back(static_cast<std::uint8_t>(mechanisms.size()));
  payload.insert(payload.end(), mechanisms.begin(), mechanisms.end());
  const std::string locales = "en_US";
  payload.push_back(0);
  payload.push_back(0);
  payload.push_back(0);
  payload.push_back(static_cast<std::uint8_t>(locales.size()));
  payload.insert(payload.end(), locales.begin(), locales.end());

  std::vector<std::uint8_t> out = {1, 0, 0};  // method frame, channel 0
  const std::uint32_t size = static_cast<std::uint32_t>(payload.size());
  out.push_back(static_cast<std::uint8_t>(size >> 24));
  out.push_back(static_cast<std::uint8_t>(size >> 16));
  out.push_back(static_cast<std::uint8_t>(size >> 8));
  out.push_back(static_cast<std::uint8_t>(size));
  out.insert(out.end(), payload.begin(), payload.end());
  out.push_back(0xce);
  return out;
}

struct AmqpHandshakeMachine::Impl {
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

AmqpHandshakeMachine::AmqpHandshakeMachine() : impl_(std::make_shared<Impl>()) {}

std::vector<std::uint8_t> AmqpHandshakeMachine::open() {
  std::vector<std::uint8_t> header(kAmqp091Header.begin(), kAmqp091Header.end());
  impl_->digest.sent(header);
  return header;
}

MachineStep AmqpHandshakeMachine::on_bytes(std::span<const std::uint8_t> data) {
  impl_->digest.received(data);
  impl_->saw_bytes = true;
  impl_->buffer.insert(impl_->buffer.end(), data.begin(), data.end());

  // A server that rejects our version answers with its own protocol header.
  if (impl_->buffer.size() >= 8 && impl_->buffer[0] == 'A') {
    const auto version = amqp_parse_protocol_header(impl_->buffer);
    if (version)
      return {{}, impl_->outcome(HandshakeStatus::Success,
                                 "server advertised " + *version)};
    return {{}, impl_->outcome(HandshakeStatus::ProtocolError,
                               "unrecognized protocol header")};
  }

  const auto frame = amqp_decode_frame(impl_->buffer);
  if (frame.status == AmqpDecodeStatus::NeedMore) return {};
  if (frame.status == AmqpDecodeStatus::Malformed)
    return {{}, impl_->outcome(HandshakeStatus::ProtocolError, frame.error)};
  if (amqp_is_connection_start(frame.frame))
    return {{}, impl_->outcome(HandshakeStatus::Success, "connection.start, version 0-9-1")};
  return {{}, impl_->outcome(HandshakeStatus::ProtocolError,
                             "first frame not connection.start")};
}

MachineStep AmqpHandshakeMachine::on_eof() {
  if (!impl_->saw_bytes)
    return {{}, impl_->outcome(HandshakeStatus::ConnectedNoProtocol, "closed without bytes")};
  return {{}, impl_->outcome(HandshakeStatus::ProtocolError, "closed mid-frame")};
}

MachineStep AmqpHandshakeMachine::on_timeout() {
  if (!impl_->saw_bytes)
    return {{}, impl_->outcome(HandshakeStatus::Timeout, "no reply")};
  return {{}, impl_->outcome(HandshakeStatus::Timeout, "reply incomplete")};
}

}  // namespace iot6
