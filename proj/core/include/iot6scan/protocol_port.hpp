#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace iot6 {

enum class Protocol { CoAP, MQTT, XMPP, AMQP, OPCUA, Telnet };
enum class Transport { TCP, UDP };

std::string_view protocol_name(Protocol p);

/// One scan target class: a protocol on a port, secured or not, over TCP or
/// UDP. The canonical set is the eleven standard combinations; anything else
/// has to come from explicit configuration.
struct ProtocolPort {
  Protocol protocol{};
  std::uint16_t port = 0;
  bool secured = false;
  Transport transport = Transport::TCP;

  /// "mqtt", "mqtts", "coap", ... non-standard ports render as "mqtt:1884".
  std::string name() const;

  auto operator<=>(const ProtocolPort&) const = default;
};

/// The eleven standard protocol-port combinations:
/// CoAP 5683/5684 UDP, MQTT 1883/8883, XMPP 5222/5223, AMQP 5672/5671,
/// OPC UA 4840/4843, Telnet 23 (no secured variant).
const std::vector<ProtocolPort>& canonical_protocol_ports();

/// Looks up a canonical entry by its short name ("coap", "coaps", "mqtt",
/// "mqtts", "xmpp", "xmpps", "amqp", "amqps", "opcua", "opcuas", "telnet").
std::optional<ProtocolPort> protocol_port_by_name(std::string_view name);

/// Parses a ports selection: comma-separated names, each optionally with an
/// explicit non-standard port override ("mqtt:1884"). "all" selects the
/// canonical set.
std::optional<std::vector<ProtocolPort>> parse_port_selection(std::string_view spec);

}  // namespace iot6
