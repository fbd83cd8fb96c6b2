#include "iot6scan/protocol_port.hpp"

#include <charconv>

namespace iot6 {

std::string_view protocol_name(Protocol p) {
  switch (p) {
    case Protocol::CoAP: return "coap";
    case Protocol::MQTT: return "mqtt";
    case Protocol::XMPP: return "xmpp";
    case Protocol::AMQP: return "amqp";
    case Protocol::OPCUA: return "opcua";
    case Protocol::Telnet: return "telnet";
  }
  return "?";
}

std::string ProtocolPort::name() const {
  std::string n{protocol_name(protocol)};
  if (secured) n += 's';
  for (const auto& c : canonical_protocol_ports())
    if (c == *this) return n;
  return n + ":" + std::to_string(port);
}

const std::vector<ProtocolPort>& canonical_protocol_ports() {
  static const std::vector<ProtocolPort> table = {
      {Protocol::CoAP, 5683, false, Transport::UDP},
      {Protocol::CoAP, 5684, true, Transport::UDP},
      {Protocol::MQTT, 1883, false, Transport::TCP},
      {Protocol::MQTT, 8883, true, Transport::TCP},
      {Protocol::XMPP, 5222, false, Transport::TCP},
      {Protocol::XMPP, 5223, true, Transport::TCP},
      {Protocol::AMQP, 5672, false, Transport::TCP},
      {Protocol::AMQP, 5671, true, Transport::TCP},
      {Protocol::OPCUA, 4840, false, Transport::TCP},
      {Protocol::OPCUA, 4843, true, Transport::TCP},
      {Protocol::Telnet, 23, false, Transport::TCP},
  };
  return table;
}

std::optional<ProtocolPort> protocol_port_by_name(std::string_view name) {
  for (const auto& pp : canonical_protocol_ports()) {
    std::string n{protocol_name(pp.protocol)};
    if (pp.secured) n += 's';
    if (n == name) return pp;
  }
  return std::nullopt;
}

std::optional<std::vector<ProtocolPort>> parse_port_selection(std::string_view spec) {
  std::vector<ProtocolPort> out;
  if (spec == "all") return canonical_protocol_ports();
  while (!spec.empty()) {
    const auto comma = spec.find(',');
    std::string_view item = spec.substr(0, comma);
    spec = comma == std::string_view::npos ? std::string_view{} : spec.substr(comma + 1);
    if (item.empty()) continue;
    std::string_view base = item;
    std::optional<std::uint16_t> override_port;
    if (const auto colon = item.find(':'); colon != std::string_view::npos) {
      base = item.substr(0, colon);
      const auto port_text = item.substr(colon + 1);
      unsigned port = 0;
      const auto [ptr, ec] =
          std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
      if (ec != std::errc{} || ptr != port_text.data() + port_text.size() ||
          port == 0 || port > 65535)
        return std::nullopt;
      override_port = static_cast<std::uint16_t>(port);
    }
    auto pp = protocol_port_by_name(base);
    if (!pp) return std::nullopt;
    if (override_port) pp->port = *override_port;
    out.push_back(*pp);
  }
  if (out.empty()) return std::nullopt;
  return out;
}

}  // namespace iot6
