#include "iot6scan/coap.hpp"

#include <stdexcept>

#include "iot6scan/digest.hpp"

namespace iot6 {

std::string CoapMessage::code_text() const {
  return std::to_string(code >> 5) + "." +
         (code % 32 < 10 ? "0" : "") + std::to_string(code & 0x1f);
}

namespace {

void append_option_field(std::vector<std::uint8_t>& out, unsigned value,
                         std::uint8_t& nibble) {
  // RFC 7252 option delta/length encoding: 0-12 inline, 13 -> one extended
  // byte, 14 -> two extended bytes. 15 is reserved for the payload marker.
  if (value <= 12) {
    nibble = static_cast<std::uint8_t>(value);
  } else if (value <= 268) {
    nibble = 13;
    out.push_back(static_cast<std::uint8_t>(value - 13));
  } else {
    nibble = 14;
    const unsigned ext = value - 269;
    out.push_back(static_cast<std::uint8_t>(ext >> 8));
    out.push_back(static_cast<std::uint8_t>(ext & 0xff));
  }
}

}  // namespace

std::vector<std::uint8_t> coap_encode(const CoapMessage& m) {
  if (m.token.size() > 8)
    throw std::invalid_argument("coap: token longer than 8 bytes");
  std::vector<std::uint8_t> out;
  out.push_back(static_cast<std::uint8_t>(
      (1u << 6) | (static_cast<unsigned>(m.type) << 4) | m.token.size()));
  out.push_back(m.code);
  out.push_back(static_cast<std::uint8_t>(m.message_id >> 8));
  out.push_back(static_cast<std::uint8_t>(m.message_id & 0xff));
  out.insert(out.end(), m.token.begin(), m.token.end());

  std::uint16_t previous = 0;
  for (const auto& opt : m.options) {
    if (opt.number < previous)
      throw std::invalid_argument("coap: options must be sorted by number");
    if (opt.value.size() > 65535 + 269)
      throw std::invalid_argument("coap: option value too long");
    const unsigned delta = opt.number - previous;
    std::vector<std::uint8_t> delta_ext, len_ext;
    std::uint8_t delta_nibble = 0, len_nibble = 0;
    append_option_field(delta_ext, delta, delta_nibble);
    append_option_field(len_ext, static_cast<unsigned>(opt.value.size()), len_nibble);
    out.push_back(static_cast<std::uint8_t>((delta_nibble << 4) | len_nibble));
    out.insert(out.end(), delta_ext.begin(), delta_ext.end());
    out.insert(out.end(), len_ext.begin(), len_ext.end());
    out.insert(out.end(), opt.value.begin(), opt.value.end());
    previous = opt.number;
  }

  if (!m.payload.empty()) {
    out.push_back(0xff);
    out.insert(out.end(), m.payload.begin(), m.payload.end());
  }
  return out;
}

CoapDecodeResult coap_decode(std::span<const std::uint8_t> data) {
  if (data.empty()) return {std::nullopt, "empty datagram"};
  if (data.size() < 4) return {std::nullopt, "truncated header"};
  const std::uint8_t first = data[0];
  const unsigned version = first >> 6;
  if (version != 1) return {std::nullopt, "unsupported version"};
  const unsigned tkl = first & 0x0f;
  if (tkl > 8) return {std::nullopt, "token length over 8"};

  CoapMessage m;
  m.type = static_cast<CoapType>((first >> 4) & 0x3);
  m.code = data[1];
  m.message_id = static_cast<std::uint16_t>((data[2] << 8) | data[3]);
  if (data.size() < 4 + tkl) return {std::nullopt, "truncated token"};
  m.token.assign(data.begin() + 4, data.begin() + 4 + tkl);

  std::size_t pos = 4 + tkl;
  std::uint16_t number = 0;
  while (pos < data.size()) {
    const std::uint8_t byte = data[pos++];
    if (byte == 0xff) {
      if (pos == data.size()) return {std::nullopt, "payload marker without payload"};
      m.payload.assign(data.begin() + pos, data.end());
      return {m, {}};
    }
    unsigned delta = byte >> 4;
    unsigned length = byte & 0x0f;
    if (delta == 15 || length == 15) return {std::nullopt, "reserved option nibble"};
    auto read_extended = [&](unsigned& v) -> bool {
      if (v == 13) {
        if (pos >= data.size()) return false;
        v = 13 + data[pos++];
      } else if (v == 14) {
        if (pos + 1 >= data.size()) return false;
        v = 269 + ((data[pos] << 8) | data[pos + 1]);
        pos += 2;
      }
      return true;
    };
    if (!read_extended(delta) || !read_extended(length))
      return {std::nullopt, "truncated option header"};
    if (number + delta > 0xffff) return {std::nullopt, "option number overflow"};
    number = static_cast<std::uint16_t>(number + delta);
    if (pos + length > data.size()) return {std::nullopt, "truncated option value"};
    m.options.push_back(
        {number, std::vector<std::uint8_t>(data.begin() + pos, data.begin() + pos + length)});
    pos += length;
  }
  return {m, {}};
}

std::vector<std::uint8_t> coap_encode_probe(std::uint16_t message_id,
                                            std::span<const std::uint8_t> token) {
  CoapMessage m;
  m.type = CoapType::Confirmable;
  m.code = kCoapCodeGet;
  m.message_id = message_id;
  m.token.assign(token.begin(), token.end());
  m.options.push_back({kCoapOptionUriPath, {'.', 'w', 'e', 'l', 'l', '-', 'k', 'n', 'o', 'w', 'n'}});
  m.options.push_back({kCoapOptionUriPath, {'c', 'o', 'r', 'e'}});
  return coap_encode(m);
}

struct CoapRequestMachine::Impl {
  std::uint16_t message_id;
  std::vector<std::uint8_t> token;
  TranscriptDigest digest;
  bool done = false;

  HandshakeOutcome outcome(HandshakeStatus status, std::string detail) {
    HandshakeOutcome o;
    o.status = status;
    o.detail = std::move(detail);
    o.transcript_digest = digest.finish();
    done = true;
    return o;
  }
};

CoapRequestMachine::CoapRequestMachine(std::uint16_t message_id,
                                       std::vector<std::uint8_t> token)
    : impl_(std::make_shared<Impl>()) {
  impl_->message_id = message_id;
  impl_->token = std::move(token);
}

std::vector<std::uint8_t> CoapRequestMachine::open() {
  auto probe = coap_encode_probe(impl_->message_id, impl_->token);
  impl_->digest.sent(probe);
  return probe;
}

MachineStep CoapRequestMachine::on_bytes(std::span<const std::uint8_t> data) {
  impl_->digest.received(data);
  auto decoded = coap_decode(data);
  if (!decoded)
    return {{}, impl_->outcome(HandshakeStatus::ProtocolError, decoded.error)};
  const CoapMessage& m = *decoded.message;
  if (m.type == CoapType::Reset)
    return {{}, impl_->outcome(HandshakeStatus::Success, "rst")};
  if (m.message_id != impl_->message_id && m.token != impl_->token)
    return {{}, impl_->outcome(HandshakeStatus::ProtocolError, "unmatched reply id")};
  HandshakeOutcome o = impl_->outcome(
      m.is_response() ? HandshakeStatus::Success : HandshakeStatus::ProtocolError,
      m.code_text());
  if (!m.payload.empty())
    o.banner_or_features = std::string(m.payload.begin(), m.payload.end());
  return {{}, o};
}

MachineStep CoapRequestMachine::on_eof() {
  return {{}, impl_->outcome(HandshakeStatus::ConnectedNoProtocol, "closed")};
}

MachineStep CoapRequestMachine::on_timeout() {
  return {{}, impl_->outcome(HandshakeStatus::Timeout, "no reply")};
}

}  // namespace iot6
