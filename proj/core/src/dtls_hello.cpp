#include "iot6scan/dtls_hello.hpp"

#include <stdexcept>

namespace iot6 {

namespace {

constexpr std::uint16_t kCipherSuites[] = {
    0xc02b,  // ECDHE-ECDSA-AES128-GCM-SHA256
    0xc02f,  // ECDHE-RSA-AES128-GCM-SHA256
    0xc02c,  // ECDHE-ECDSA-AES256-GCM-SHA384
    0xc030,  // ECDHE-RSA-AES256-GCM-SHA384
    0xc009,  // ECDHE-ECDSA-AES128-SHA
    0xc013,  // ECDHE-RSA-AES128-SHA
    0x009c,  // AES128-GCM-SHA256
    0x002f,  // AES128-SHA
    0x0035,  // AES256-SHA
};

void push_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
}

void push_u24(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
}

void push_extension(std::vector<std::uint8_t>& out, std::uint16_t type,
                    std::span<const std::uint8_t> body) {
  push_u16(out, type);
  push_u16(out, static_cast<std::uint16_t>(body.size()));
  out.insert(out.end(), body.begin(), body.end());
}

}  // namespace

std::span<const std::uint16_t> dtls_probe_cipher_suites() {
  return {kCipherSuites, std::size(kCipherSuites)};
}

std::vector<std::uint8_t> dtls_client_hello(const std::array<std::uint8_t, 32>& random,
                                            std::span<const std::uint8_t> cookie) {
  if (cookie.size() > 255) throw std::invalid_argument("dtls: cookie over 255 bytes");

  std::vector<std::uint8_t> body;
  body.push_back(kDtls12Version[0]);
  body.push_back(kDtls12Version[1]);
  body.insert(body.end(), random.begin(), random.end());
  body.push_back(0);  // empty session id
  body.push_back(static_cast<std::uint8_t>(cookie.size()));
  body.insert(body.end(), cookie.begin(), cookie.end());
  push_u16(body, static_cast<std::uint16_t>(std::size(kCipherSuites) * 2));
  for (const auto suite : kCipherSuites) push_u16(body, suite);
  body.push_back(1);  // one compression method
  body.push_back(0);  // null

  std::vector<std::uint8_t> extensions;
  {
    std::vector<std::uint8_t> groups;
    push_u16(groups, 6);
    push_u16(groups, 29);  // x25519
    push_u16(groups, 23);  // secp256r1
    push_u16(groups, 24);  // secp384r1
    push_extension(extensions, 0x000a, groups);
  }
  {
    const std::uint8_t formats[] = {1, 0};  // uncompressed only
    push_extension(extensions, 0x000b, formats);
  }
  {
    std::vector<std::uint8_t> algs;
    push_u16(algs, 12);
    for (const std::uint16_t a : {0x0403, 0x0804, 0x0401, 0x0503, 0x0501, 0x0201})
      push_u16(algs, static_cast<std::uint16_t>(a));
    push_extension(extensions, 0x000d, algs);
  }
  {
    const std::uint8_t empty_reneg[] = {0};
    push_extension(extensions, 0xff01, empty_reneg);
    push_extension(extensions, 0x0017, {});  // extended master secret
  }
  push_u16(body, static_cast<std::uint16_t>(extensions.size()));
  body.insert(body.end(), extensions.begin(), extensions.end());

  // Cookie retry is the second flight: message_seq and record sequence 1.
  const std::uint16_t message_seq = cookie.empty() ? 0 : 1;
  std::vector<std::uint8_t> handshake;
  handshake.push_back(1);  // client_hello
  push_u24(handshake, static_cast<std::uint32_t>(body.size()));
  push_u16(handshake, message_seq);
  push_u24(handshake, 0);  // fragment offset
  push_u24(handshake, static_cast<std::uint32_t>(body.size()));
  handshake.insert(handshake.end(), body.begin(), body.end());

  std::vector<std::uint8_t> record;
  record.push_back(22);  // handshake
  record.push_back(kDtls12Version[0]);
  record.push_back(kDtls12Version[1]);
  push_u16(record, 0);  // epoch
  push_u16(record, 0);
  push_u16(record, 0);
  push_u16(record, message_seq);  // 48-bit sequence, low word tracks the flight
  push_u16(record, static_cast<std::uint16_t>(handshake.size()));
  record.insert(record.end(), handshake.begin(), handshake.end());
  return record;
}

DtlsServerFlight dtls_parse_server_flight(std::span<const std::uint8_t> data) {
  DtlsServerFlight out;
  std::size_t pos = 0;
  while (pos + 13 <= data.size()) {
    const std::uint8_t content_type = data[pos];
    const std::uint8_t ver_major = data[pos + 1];
    const std::uint16_t length =
        static_cast<std::uint16_t>((data[pos + 11] << 8) | data[pos + 12]);
    if (ver_major != 254) {
      out.error = "not a DTLS record";
      return out;
    }
    if (pos + 13 + length > data.size()) {
      out.error = "truncated record";
      return out;
    }
    const std::span<const std::uint8_t> fragment = data.subspan(pos + 13, length);
    out.any_record = true;
    if (content_type == 21) out.alert = true;
    if (content_type == 22 && fragment.size() >= 12) {
      const std::uint8_t msg_type = fragment[0];
      if (msg_type == 3 && fragment.size() >= 15) {
        // HelloVerifyRequest: version(2) cookie_len(1) cookie
        const std::uint8_t cookie_len = fragment[14];
        if (fragment.size() >= 15u + cookie_len) {
          out.hello_verify = true;
          out.cookie.assign(fragment.begin() + 15, fragment.begin() + 15 + cookie_len);
        }
      }
      if (msg_type == 2) out.server_hello = true;
    }
    pos += 13 + length;
  }
  if (!out.any_record && out.error.empty()) out.error = "no complete record";
  return out;
}

}  // namespace iot6
