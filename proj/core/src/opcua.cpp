#include "iot6scan/opcua.hpp"

#include <cstdio>
#include <stdexcept>

#include "iot6scan/digest.hpp"

namespace iot6 {

namespace {

void append_u32le(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 24));
}

std::uint32_t read_u32le(std::span<const std::uint8_t> d, std::size_t pos) {
  return static_cast<std::uint32_t>(d[pos]) |
         (static_cast<std::uint32_t>(d[pos + 1]) << 8) |
         (static_cast<std::uint32_t>(d[pos + 2]) << 16) |
         (static_cast<std::uint32_t>(d[pos + 3]) << 24);
}

void append_string(std::vector<std::uint8_t>& out, const std::string& s) {
  append_u32le(out, static_cast<std::uint32_t>(s.size()));
  out.insert(out.end(), s.begin(), s.end());
}

std::vector<std::uint8_t> frame(const char type[3], std::span<const std::uint8_t> body) {
  std::vector<std::uint8_t> out = {static_cast<std::uint8_t>(type[0]),
                                   static_cast<std::uint8_t>(type[1]),
                                   static_cast<std::uint8_t>(type[2]), 'F'};
  append_u32le(out, static_cast<std::uint32_t>(8 + body.size()));
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

}  // namespace

std::vector<std::uint8_t> opcua_encode_hello(const OpcuaHello& h) {
  std::vector<std::uint8_t> body;
  append_u32le(body, h.protocol_version);
  append_u32le(body, h.receive_buffer_size);
  append_u32le(body, h.send_buffer_size);
  append_u32le(body, h.max_message_size);
  append_u32le(body, h.max_chunk_count);
  append_string(body, h.endpoint_url);
  return frame("HEL", body);
}

std::vector<std::uint8_t> opcua_encode_ack(const OpcuaAck& a) {
  std::vector<std::uint8_t> body;
  append_u32le(body, a.protocol_version);
  append_u32le(body, a.receive_buffer_size);
  append_u32le(body, a.send_buffer_size);
  append_u32le(body, a.max_message_size);
  append_u32le(body, a.max_chunk_count);
  return frame("ACK", body);
}

std::vector<std::uint8_t> opcua_encode_error(const OpcuaError& e) {
  std::vector<std::uint8_t> body;
  append_u32le(body, e.code);
  append_string(body, e.reason);
  return frame("ERR", body);
}

OpcuaDecodeResult opcua_decode(std::span<const std::uint8_t> data) {
  OpcuaDecodeResult r;
  if (data.size() < 8) return r;  // incomplete
  const char t0 = static_cast<char>(data[0]);
  const char t1 = static_cast<char>(data[1]);
  const char t2 = static_cast<char>(data[2]);
  if (data[3] != 'F' && data[3] != 'C' && data[3] != 'A') {
    r.malformed = true;
    r.detail = "bad chunk type";
    return r;
  }
  const std::uint32_t size = read_u32le(data, 4);
  if (size < 8 || size > 1u << 24) {
    r.malformed = true;
    r.detail = "implausible message size";
    return r;
  }
  if (data.size() < size) return r;  // incomplete
  r.complete = true;
  r.consumed = size;
  const std::span<const std::uint8_t> body = data.subspan(8, size - 8);

  if (t0 == 'H' && t1 == 'E' && t2 == 'L') {
    r.type = OpcuaMessageType::Hello;
    if (body.size() < 24) {
      r.malformed = true;
      r.detail = "hello body truncated";
      return r;
    }
    OpcuaHello h;
    h.protocol_version = read_u32le(body, 0);
    h.receive_buffer_size = read_u32le(body, 4);
    h.send_buffer_size = read_u32le(body, 8);
    h.max_message_size = read_u32le(body, 12);
    h.max_chunk_count = read_u32le(body, 16);
    const std::uint32_t len = read_u32le(body, 20);
    if (len != 0xffffffffu) {
      if (body.size() < 24 + len) {
        r.malformed = true;
        r.detail = "endpoint url truncated";
        return r;
      }
      h.endpoint_url.assign(body.begin() + 24, body.begin() + 24 + len);
    }
    r.hello = h;
    return r;
  }
  if (t0 == 'A' && t1 == 'C' && t2 == 'K') {
    r.type = OpcuaMessageType::Ack;
    if (body.size() < 20) {
      r.malformed = true;
      r.detail = "ack body truncated";
      return r;
    }
    OpcuaAck a;
    a.protocol_version = read_u32le(body, 0);
    a.receive_buffer_size = read_u32le(body, 4);
    a.send_buffer_size = read_u32le(body, 8);
    a.max_message_size = read_u32le(body, 12);
    a.max_chunk_count = read_u32le(body, 16);
    r.ack = a;
    return r;
  }
  if (t0 == 'E' && t1 == 'R' && t2 == 'R') {
    r.type = OpcuaMessageType::Error;
    if (body.size() < 8) {
      r.malformed = true;
      r.detail = "error body truncated";
      return r;
    }
    OpcuaError e;
    e.code = read_u32le(body, 0);
    const std::uint32_t len = read_u32le(body, 4);
    if (len != 0xffffffffu && body.size() >= 8 + len)
      e.reason.assign(body.begin() + 8, body.begin() + 8 + len);
    r.error = e;
    return r;
  }
  r.type = OpcuaMessageType::Other;
  r.detail = std::string{t0, t1, t2};
  return r;
}

struct OpcuaHelloMachine::Impl {
  std::string endpoint_url;
  std::vector<std::uint8_t> buffer;
  TranscriptDigest digest;

  HandshakeOutcome outcome(HandshakeStatus status, std::string detail) {
    HandshakeOutcome o;
    o.status = status;
    o.detail = std::move(detail);
    o.transcript_digest = digest.finish();
    return o;
  }
};

OpcuaHelloMachine::OpcuaHelloMachine(std::string endpoint_url)
    : impl_(std::make_shared<Impl>()) {
  if (endpoint_url.rfind("opc.tcp://", 0) != 0)
    throw std::invalid_argument("opcua: endpoint url must start with opc.tcp://");
  impl_->endpoint_url = std::move(endpoint_url);
}

std::vector<std::uint8_t> OpcuaHelloMachine::open() {
  OpcuaHello h;
  h.endpoint_url = impl_->endpoint_url;
  auto hello = opcua_encode_hello(h);
  impl_->digest.sent(hello);
  return hello;
}

MachineStep OpcuaHelloMachine::on_bytes(std::span<const std::uint8_t> data) {
  impl_->digest.received(data);
  impl_->buffer.insert(impl_->buffer.end(), data.begin(), data.end());
  const auto decoded = opcua_decode(impl_->buffer);
  if (!decoded.complete && !decoded.malformed) {
    // A reply shorter than a valid header that can never grow into one is
    // still pending; framing errors surface once 8 bytes are in.
    return {};
  }
  if (decoded.malformed)
    return {{}, impl_->outcome(HandshakeStatus::ProtocolError, decoded.detail)};
  switch (decoded.type) {
    case OpcuaMessageType::Ack:
      return {{}, impl_->outcome(HandshakeStatus::Success,
                                 "ack, protocol version " +
                                     std::to_string(decoded.ack->protocol_version))};
    case OpcuaMessageType::Error: {
      char code_hex[16];
      std::snprintf(code_hex, sizeof(code_hex), "0x%08x", decoded.error->code);
      return {{}, impl_->outcome(HandshakeStatus::ProtocolError,
                                 std::string("err ") + code_hex +
                                     (decoded.error->reason.empty()
                                          ? ""
                                          : " " + decoded.error->reason))};
    }
    default:
      return {{}, impl_->outcome(HandshakeStatus::ProtocolError,
                                 "unexpected message type")};
  }
}

MachineStep OpcuaHelloMachine::on_eof() {
  if (impl_->buffer.empty())
    return {{}, impl_->outcome(HandshakeStatus::ConnectedNoProtocol, "closed without bytes")};
  return {{}, impl_->outcome(HandshakeStatus::ProtocolError, "closed mid-message")};
}

MachineStep OpcuaHelloMachine::on_timeout() {
  if (impl_->buffer.empty())
    return {{}, impl_->outcome(HandshakeStatus::Timeout, "no reply")};
  return {{}, impl_->outcome(HandshakeStatus::Timeout, "reply incomplete")};
}

}  // namespace iot6
