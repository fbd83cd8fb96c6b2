#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "iot6scan/outcome.hpp"

namespace iot6 {

/// Client stream header (jabber:client namespace, version 1.0). The `to`
/// attribute is emitted only when a domain is configured; scans of raw IPs
/// have none.
std::string xmpp_stream_header(const std::optional<std::string>& to_domain);

/// Server-side stream open plus a features stanza, for responders.
std::string xmpp_stream_response(const std::string& features_xml);

/// Sends a stream header; Success iff the reply opens a <stream:stream>,
/// capturing <stream:features> text when present.
class XmppStreamMachine : public HandshakeMachine {
 public:
  explicit XmppStreamMachine(std::optional<std::string> to_domain = std::nullopt);
  std::vector<std::uint8_t> open() override;
  MachineStep on_bytes(std::span<const std::uint8_t> data) override;
  MachineStep on_eof() override;
  MachineStep on_timeout() override;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

}  // namespace iot6
