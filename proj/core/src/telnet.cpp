#include "iot6scan/telnet.hpp"

#include <stdexcept>

#include "iot6scan/digest.hpp"

namespace iot6 {

std::vector<std::uint8_t> telnet_encode(const std::vector<TelnetEvent>& events) {
  std::vector<std::uint8_t> out;
  const TelnetData* previous_data = nullptr;
  for (const auto& ev : events) {
    if (const auto* d = std::get_if<TelnetData>(&ev)) {
      if (d->bytes.empty())
        throw std::invalid_argument("telnet: empty data event");
      if (previous_data)
        throw std::invalid_argument("telnet: adjacent data events must be merged");
      previous_data = d;
      for (const auto b : d->bytes) {
        out.push_back(b);
        if (b == kTelnetIac) out.push_back(kTelnetIac);
      }
      continue;
    }
    previous_data = nullptr;
    if (const auto* n = std::get_if<TelnetNegotiation>(&ev)) {
      out.push_back(kTelnetIac);
      out.push_back(static_cast<std::uint8_t>(n->verb));
      out.push_back(n->option);
    } else if (const auto* s = std::get_if<TelnetSubnegotiation>(&ev)) {
      out.push_back(kTelnetIac);
      out.push_back(kTelnetSb);
      out.push_back(s->option);
      for (const auto b : s->bytes) {
        out.push_back(b);
        if (b == kTelnetIac) out.push_back(kTelnetIac);
      }
      out.push_back(kTelnetIac);
      out.push_back(kTelnetSe);
    }
  }
  return out;
}

TelnetDecodeResult telnet_decode(std::span<const std::uint8_t> data) {
  TelnetDecodeResult r;
  std::vector<std::uint8_t> run;
  auto flush_run = [&] {
    if (!run.empty()) {
      r.events.push_back(TelnetData{std::move(run)});
      run.clear();
    }
  };

  std::size_t i = 0;
  while (i < data.size()) {
    const std::uint8_t b = data[i];
    if (b != kTelnetIac) {
      run.push_back(b);
      ++i;
      continue;
    }
    if (i + 1 >= data.size()) {
      flush_run();
      r.trailing.assign(data.begin() + i, data.end());
      return r;
    }
    const std::uint8_t cmd = data[i + 1];
    if (cmd == kTelnetIac) {
      run.push_back(kTelnetIac);
      i += 2;
      continue;
    }
    if (cmd >= static_cast<std::uint8_t>(TelnetVerb::Will) &&
        cmd <= static_cast<std::uint8_t>(TelnetVerb::Dont)) {
      if (i + 2 >= data.size()) {
        flush_run();
        r.trailing.assign(data.begin() + i, data.end());
        return r;
      }
      flush_run();
      r.events.push_back(TelnetNegotiation{static_cast<TelnetVerb>(cmd), data[i + 2]});
      i += 3;
      continue;
    }
    if (cmd == kTelnetSb) {
      // scan for IAC SE, unescaping IAC IAC inside
      std::vector<std::uint8_t> inner;
      std::size_t j = i + 2;
      if (j >= data.size()) {
        flush_run();
        r.trailing.assign(data.begin() + i, data.end());
        return r;
      }
      const std::uint8_t option = data[j++];
      bool terminated = false;
      while (j < data.size()) {
        if (data[j] == kTelnetIac) {
          if (j + 1 >= data.size()) break;
          if (data[j + 1] == kTelnetIac) {
            inner.push_back(kTelnetIac);
            j += 2;
            continue;
          }
          if (data[j + 1] == kTelnetSe) {
            terminated = true;
            j += 2;
            break;
          }
          // stray command inside subnegotiation: tolerate, skip it
          j += 2;
          continue;
        }
        inner.push_back(data[j++]);
      }
      if (!terminated) {
        flush_run();
        r.trailing.assign(data.begin() + i, data.end());
        return r;
      }
      flush_run();
      r.events.push_back(TelnetSubnegotiation{option, std::move(inner)});
      i = j;
      continue;
    }
    // other single-byte command (NOP, GA, ...): no event
    i += 2;
  }
  flush_run();
  return r;
}

std::vector<std::uint8_t> telnet_refusal(const TelnetNegotiation& n) {
  const std::uint8_t reply =
      n.verb == TelnetVerb::Do || n.verb == TelnetVerb::Dont
          ? static_cast<std::uint8_t>(TelnetVerb::Wont)
          : static_cast<std::uint8_t>(TelnetVerb::Dont);
  return {kTelnetIac, reply, n.option};
}

struct TelnetBannerMachine::Impl {
  std::size_t max_banner;
  std::chrono::milliseconds window;
  std::vector<std::uint8_t> pending;  // unconsumed partial IAC sequence
  std::string banner;
  bool negotiation_seen = false;
  TranscriptDigest digest;

  bool observed() const { return negotiation_seen || !banner.empty(); }

  HandshakeOutcome conclude() {
    HandshakeOutcome o;
    o.status = observed() ? HandshakeStatus::Success : HandshakeStatus::ConnectedNoProtocol;
    o.detail = observed() ? "banner collected" : "no server bytes";
    if (!banner.empty()) o.banner_or_features = banner;
    o.transcript_digest = digest.finish();
    return o;
  }
};

TelnetBannerMachine::TelnetBannerMachine(std::size_t max_banner,
                                         std::chrono::milliseconds window)
    : impl_(std::make_shared<Impl>()) {
  impl_->max_banner = max_banner;
  impl_->window = window;
}

std::vector<std::uint8_t> TelnetBannerMachine::open() { return {}; }

MachineStep TelnetBannerMachine::on_bytes(std::span<const std::uint8_t> data) {
  impl_->digest.received(data);
  std::vector<std::uint8_t> input = std::move(impl_->pending);
  input.insert(input.end(), data.begin(), data.end());
  auto decoded = telnet_decode(input);
  impl_->pending = std::move(decoded.trailing);

  std::vector<std::uint8_t> reply;
  for (const auto& ev : decoded.events) {
    if (const auto* d = std::get_if<TelnetData>(&ev)) {
      for (const auto b : d->bytes)
        if (impl_->banner.size() < impl_->max_banner)
          impl_->banner.push_back(static_cast<char>(b));
    } else if (const auto* n = std::get_if<TelnetNegotiation>(&ev)) {
      impl_->negotiation_seen = true;
      const auto refusal = telnet_refusal(*n);
      reply.insert(reply.end(), refusal.begin(), refusal.end());
    } else {
      impl_->negotiation_seen = true;
    }
  }
  if (!reply.empty()) impl_->digest.sent(reply);
  if (impl_->banner.size() >= impl_->max_banner)
    return {std::move(reply), impl_->conclude()};
  return {std::move(reply), std::nullopt};
}

MachineStep TelnetBannerMachine::on_eof() { return {{}, impl_->conclude()}; }

MachineStep TelnetBannerMachine::on_timeout() { return {{}, impl_->conclude()}; }

std::chrono::milliseconds TelnetBannerMachine::read_window() const {
  return impl_->window;
}

}  // namespace iot6
