#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "iot6scan/outcome.hpp"

namespace iot6 {

inline constexpr std::uint8_t kTelnetIac = 255;
inline constexpr std::uint8_t kTelnetSe = 240;
inline constexpr std::uint8_t kTelnetSb = 250;

enum class TelnetVerb : std::uint8_t { Will = 251, Wont = 252, Do = 253, Dont = 254 };

/// Parsed view of a Telnet stream: application data runs, option
/// negotiations, and subnegotiation blocks.
struct TelnetData {
  std::vector<std::uint8_t> bytes;  // non-empty
  bool operator==(const TelnetData&) const = default;
};
struct TelnetNegotiation {
  TelnetVerb verb{};
  std::uint8_t option = 0;
  bool operator==(const TelnetNegotiation&) const = default;
};
struct TelnetSubnegotiation {
  std::uint8_t option = 0;
  std::vector<std::uint8_t> bytes;
  bool operator==(const TelnetSubnegotiation&) const = default;
};
using TelnetEvent = std::variant<TelnetData, TelnetNegotiation, TelnetSubnegotiation>;

/// Serializes events; 0xFF data bytes are escaped as IAC IAC. Adjacent data
/// events must be pre-merged and non-empty (the decoder's normal form).
std::vector<std::uint8_t> telnet_encode(const std::vector<TelnetEvent>& events);

struct TelnetDecodeResult {
  std::vector<TelnetEvent> events;
  std::vector<std::uint8_t> trailing;  // incomplete IAC sequence at end of input
};

/// Total decoder; never fails. Unknown IAC commands decode as empty
/// subnegotiation-free commands folded into trailing handling.
TelnetDecodeResult telnet_decode(std::span<const std::uint8_t> data);

/// Refuse-all negotiation: DO -> WONT, WILL -> DONT.
std::vector<std::uint8_t> telnet_refusal(const TelnetNegotiation& n);

/// Collects a banner for one read window, refusing every option. Success iff
/// at least one application byte or negotiation arrived.
class TelnetBannerMachine : public HandshakeMachine {
 public:
  explicit TelnetBannerMachine(std::size_t max_banner = 512,
                               std::chrono::milliseconds window = std::chrono::milliseconds(5000));
  std::vector<std::uint8_t> open() override;
  MachineStep on_bytes(std::span<const std::uint8_t> data) override;
  MachineStep on_eof() override;
  MachineStep on_timeout() override;
  std::chrono::milliseconds read_window() const override;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

}  // namespace iot6
