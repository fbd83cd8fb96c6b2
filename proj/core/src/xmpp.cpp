#include "iot6scan/xmpp.hpp"

#include "iot6scan/digest.hpp"

namespace iot6 {

std::string xmpp_stream_header(const std::optional<std::string>& to_domain) {
  std::string out = "<?xml version='1.0'?><stream:stream";
  if (to_domain) out += " to='" + *to_domain + "'";
  out +=
      " xmlns='jabber:client'"
      " xmlns:stream='http://etherx.jabber.org/streams'"
      " version='1.0'>";
  return out;
}

std::string xmpp_stream_response(const std::string& features_xml) {
  std::string out =
      "<?xml version='1.0'?>"
      "<stream:stream xmlns='jabber:client'"
      " xmlns:stream='http://etherx.jabber.org/streams'"
      " id='iot6scan-farm' version='1.0'>";
  out += "<stream:features>" + features_xml + "</stream:features>";
  return out;
}

struct XmppStreamMachine::Impl {
  std::optional<std::string> to_domain;
  std::string buffer;
  TranscriptDigest digest;
  bool stream_opened = false;

  HandshakeOutcome outcome(HandshakeStatus status, std::string detail) {
    HandshakeOutcome o;
    o.status = status;
    o.detail = std::move(detail);
    o.transcript_digest = digest.finish();
    return o;
  }

  std::optional<std::string> features_text() const {
    const auto open = buffer.find("<stream:features");
    if (open == std::string::npos) return std::nullopt;
    const auto close = buffer.find("</stream:features>", open);
    if (close != std::string::npos)
      return buffer.substr(open, close + 18 - open);
    // self-closing features element
    const auto end = buffer.find('>', open);
    if (end != std::string::npos && end >= 1 && buffer[end - 1] == '/')
      return buffer.substr(open, end + 1 - open);
    return std::nullopt;
  }
};

XmppStreamMachine::XmppStreamMachine(std::optional<std::string> to_domain)
    : impl_(std::make_shared<Impl>()) {
  impl_->to_domain = std::move(to_domain);
}

std::vector<std::uint8_t> XmppStreamMachine::open() {
  const std::string header = xmpp_stream_header(impl_->to_domain);
  std::vector<std::uint8_t> out(header.begin(), header.end());
  impl_->digest.sent(out);
  return out;
}

MachineStep XmppStreamMachine::on_bytes(std::span<const std::uint8_t> data) {
  impl_->digest.received(data);
  impl_->buffer.append(data.begin(), data.end());
  const std::string& buf = impl_->buffer;

  if (const auto err = buf.find("<stream:error"); err != std::string::npos)
    return {{}, impl_->outcome(HandshakeStatus::ProtocolError,
                               "stream error: " + buf.substr(err))};

  if (const auto open = buf.find("<stream:stream"); open != std::string::npos) {
    if (buf.find('>', open) != std::string::npos) impl_->stream_opened = true;
  } else {
    // A reply that visibly is not XML never becomes a stream.
    const auto first = buf.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && buf[first] != '<')
      return {{}, impl_->outcome(HandshakeStatus::ProtocolError, "non-XML reply")};
  }

  if (impl_->stream_opened) {
    if (const auto features = impl_->features_text()) {
      HandshakeOutcome o = impl_->outcome(HandshakeStatus::Success, "stream + features");
      o.banner_or_features = *features;
      return {{}, o};
    }
  }
  return {};
}

MachineStep XmppStreamMachine::on_eof() {
  if (impl_->stream_opened)
    return {{}, impl_->outcome(HandshakeStatus::Success, "stream opened")};
  if (impl_->buffer.empty())
    return {{}, impl_->outcome(HandshakeStatus::ConnectedNoProtocol, "closed without bytes")};
  return {{}, impl_->outcome(HandshakeStatus::ProtocolError, "closed before stream open")};
}

MachineStep XmppStreamMachine::on_timeout() {
  if (impl_->stream_opened)
    return {{}, impl_->outcome(HandshakeStatus::Success, "stream opened")};
  if (impl_->buffer.empty())
    return {{}, impl_->outcome(HandshakeStatus::Timeout, "no reply")};
  return {{}, impl_->outcome(HandshakeStatus::Timeout, "reply incomplete")};
}

}  // namespace iot6
