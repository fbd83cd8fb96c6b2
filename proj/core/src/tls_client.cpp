#include "iot6scan/tls_client.hpp"

#include <openssl/err.h>
#include <openssl/ssl.h>
#include <poll.h>
#include <string.h>
#include <unistd.h>

#include <cstring>

namespace iot6 {

namespace {

int version_to_openssl(TlsVersion v) {
  switch (v) {
    case TlsVersion::Tls1_0: return TLS1_VERSION;
    case TlsVersion::Tls1_1: return TLS1_1_VERSION;
    case TlsVersion::Tls1_2: return TLS1_2_VERSION;
    case TlsVersion::Tls1_3: return TLS1_3_VERSION;
    case TlsVersion::Dtls1_2: return DTLS1_2_VERSION;
  }
  return TLS1_2_VERSION;
}

std::optional<TlsVersion> version_from_openssl(int v) {
  switch (v) {
    case TLS1_VERSION: return TlsVersion::Tls1_0;
    case TLS1_1_VERSION: return TlsVersion::Tls1_1;
    case TLS1_2_VERSION: return TlsVersion::Tls1_2;
    case TLS1_3_VERSION: return TlsVersion::Tls1_3;
    case DTLS1_2_VERSION: return TlsVersion::Dtls1_2;
  }
  return std::nullopt;
}

struct SslState {
  bool cert_requested = false;
};

int ssl_state_index() {
  static const int index = SSL_get_ex_new_index(0, nullptr, nullptr, nullptr, nullptr);
  return index;
}

// Invoked when the server asks for a client certificate; we present none and
// only record the request.
int client_cert_cb(SSL* ssl, X509** x509, EVP_PKEY** pkey) {
  *x509 = nullptr;
  *pkey = nullptr;
  if (auto* state = static_cast<SslState*>(SSL_get_ex_data(ssl, ssl_state_index())))
    state->cert_requested = true;
  return 0;
}

std::string openssl_error_text() {
  const unsigned long e = ERR_peek_last_error();
  if (e == 0) return "unknown TLS error";
  char buf[256];
  ERR_error_string_n(e, buf, sizeof(buf));
  return buf;
}

TlsFailure classify_ssl_failure(int ssl_error, int saved_errno, bool cert_requested,
                                bool timed_out) {
  TlsFailure f;
  f.cert_requested = cert_requested;
  if (timed_out) {
    f.reason = TlsFailReason::Timeout;
    f.detail = "handshake timed out";
    return f;
  }
  if (ssl_error == SSL_ERROR_SSL) {
    const unsigned long e = ERR_peek_last_error();
    const int reason = ERR_GET_REASON(e);
    const char* text = ERR_reason_error_string(e);
    f.detail = text ? text : openssl_error_text();
    if (reason == SSL_R_UNSUPPORTED_PROTOCOL || reason == SSL_R_WRONG_VERSION_NUMBER ||
        reason == SSL_R_TLSV1_ALERT_PROTOCOL_VERSION ||
        reason == SSL_R_VERSION_TOO_LOW || reason == SSL_R_VERSION_TOO_HIGH) {
      f.reason = TlsFailReason::VersionMismatch;
      return f;
    }
    if (reason == SSL_R_UNEXPECTED_EOF_WHILE_READING) {
      f.reason = cert_requested ? TlsFailReason::PeerRequiredAuth : TlsFailReason::Reset;
      return f;
    }
    if (text && strstr(text, "alert")) {
      f.reason = cert_requested ? TlsFailReason::PeerRequiredAuth : TlsFailReason::Alert;
      return f;
    }
    f.reason = TlsFailReason::Other;
    return f;
  }
  if (ssl_error == SSL_ERROR_SYSCALL) {
    f.detail = saved_errno != 0 ? strerror(saved_errno) : "connection closed";
    f.reason = cert_requested ? TlsFailReason::PeerRequiredAuth : TlsFailReason::Reset;
    return f;
  }
  if (ssl_error == SSL_ERROR_ZERO_RETURN) {
    f.detail = "closed during handshake";
    f.reason = cert_requested ? TlsFailReason::PeerRequiredAuth : TlsFailReason::Reset;
    return f;
  }
  f.reason = TlsFailReason::Other;
  f.detail = openssl_error_text();
  return f;
}

struct CtxDeleter {
  void operator()(SSL_CTX* c) const { SSL_CTX_free(c); }
};
struct SslDeleter {
  void operator()(SSL* s) const { SSL_free(s); }
};
using CtxPtr = std::unique_ptr<SSL_CTX, CtxDeleter>;
using SslPtr = std::unique_ptr<SSL, SslDeleter>;

CtxPtr make_client_ctx(bool datagram, const TlsClientConfig& cfg, std::string& error) {
  CtxPtr ctx(SSL_CTX_new(datagram ? DTLS_client_method() : TLS_client_method()));
  if (!ctx) {
    error = openssl_error_text();
    return nullptr;
  }
  SSL_CTX_set_security_level(ctx.get(), 0);  // legacy versions stay reachable
  SSL_CTX_set_cipher_list(ctx.get(), "ALL:@SECLEVEL=0");
  SSL_CTX_set_verify(ctx.get(), SSL_VERIFY_NONE, nullptr);
  SSL_CTX_set_client_cert_cb(ctx.get(), client_cert_cb);
  const int min_v = datagram ? DTLS1_2_VERSION : version_to_openssl(cfg.min_version);
  const int max_v = datagram ? DTLS1_2_VERSION : version_to_openssl(cfg.max_version);
  if (!SSL_CTX_set_min_proto_version(ctx.get(), min_v) ||
      !SSL_CTX_set_max_proto_version(ctx.get(), max_v)) {
    error = openssl_error_text();
    return nullptr;
  }
  return ctx;
}

TlsInfo collect_info(SSL* ssl, const TlsClientConfig& cfg) {
  TlsInfo info;
  if (const auto v = version_from_openssl(SSL_version(ssl))) info.max_version = *v;
  info.sni_sent = cfg.sni;
  if (STACK_OF(X509)* chain = SSL_get_peer_cert_chain(ssl)) {
    for (int i = 0; i < sk_X509_num(chain); ++i) {
      X509* cert = sk_X509_value(chain, i);
      unsigned char* der = nullptr;
      const int len = i2d_X509(cert, &der);
      if (len > 0) {
        info.certificate_chain.emplace_back(der, der + len);
        OPENSSL_free(der);
      }
    }
  }
  return info;
}

using Clock = std::chrono::steady_clock;

/// Runs one SSL_connect to completion against a deadline. For DTLS the
/// retransmission timer is honored while waiting.
std::optional<TlsFailure> run_handshake(SSL* ssl, int fd, bool datagram,
                                        std::chrono::milliseconds timeout,
                                        const SslState& state) {
  const auto deadline = Clock::now() + timeout;
  for (;;) {
    ERR_clear_error();
    errno = 0;
    const int rc = SSL_connect(ssl);
    if (rc == 1) return std::nullopt;
    const int saved_errno = errno;
    const int err = SSL_get_error(ssl, rc);
    if (err != SSL_ERROR_WANT_READ && err != SSL_ERROR_WANT_WRITE)
      return classify_ssl_failure(err, saved_errno, state.cert_requested, false);

    const auto now = Clock::now();
    if (now >= deadline)
      return classify_ssl_failure(0, 0, state.cert_requested, true);
    auto wait = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now);
    if (datagram) {
      timeval tv{};
      if (DTLSv1_get_timeout(ssl, &tv)) {
        const auto dtls_wait = std::chrono::milliseconds(
            tv.tv_sec * 1000 + tv.tv_usec / 1000);
        if (dtls_wait < wait) wait = std::max(dtls_wait, std::chrono::milliseconds(1));
      }
    }
    pollfd pfd{fd, static_cast<short>(err == SSL_ERROR_WANT_READ ? POLLIN : POLLOUT), 0};
    const int prc = poll(&pfd, 1, static_cast<int>(wait.count()));
    if (prc < 0) return classify_ssl_failure(SSL_ERROR_SYSCALL, errno, state.cert_requested, false);
    if (prc == 0 && datagram) DTLSv1_handle_timeout(ssl);
  }
}

}  // namespace

struct TlsChannel::Impl {
  CtxPtr ctx;
  SslPtr ssl;
  int fd = -1;
  SslState state;
  TlsInfo info;
  bool saw_app_data = false;
  bool broken_before_app_data = false;

  ~Impl() {
    if (fd >= 0) close(fd);
  }
};

TlsChannel::TlsChannel(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
TlsChannel::~TlsChannel() = default;

TlsChannel::HandshakeResult TlsChannel::handshake(int fd, const TlsClientConfig& cfg) {
  auto impl = std::make_unique<Impl>();
  impl->fd = fd;
  std::string ctx_error;
  impl->ctx = make_client_ctx(false, cfg, ctx_error);
  if (!impl->ctx) return TlsFailure{TlsFailReason::Other, ctx_error, false};
  impl->ssl.reset(SSL_new(impl->ctx.get()));
  if (!impl->ssl) return TlsFailure{TlsFailReason::Other, openssl_error_text(), false};
  SSL_set_ex_data(impl->ssl.get(), ssl_state_index(), &impl->state);
  if (cfg.sni) SSL_set_tlsext_host_name(impl->ssl.get(), cfg.sni->c_str());
  SSL_set_fd(impl->ssl.get(), fd);

  if (auto failure = run_handshake(impl->ssl.get(), fd, false, cfg.handshake_timeout,
                                   impl->state)) {
    failure->cert_requested = impl->state.cert_requested;
    return *failure;
  }
  impl->info = collect_info(impl->ssl.get(), cfg);
  return std::unique_ptr<TlsChannel>(new TlsChannel(std::move(impl)));
}

bool TlsChannel::write_all(std::span<const std::uint8_t> data) {
  std::size_t off = 0;
  while (off < data.size()) {
    ERR_clear_error();
    const int rc = SSL_write(impl_->ssl.get(), data.data() + off,
                             static_cast<int>(data.size() - off));
    if (rc > 0) {
      off += static_cast<std::size_t>(rc);
      continue;
    }
    const int err = SSL_get_error(impl_->ssl.get(), rc);
    if (err == SSL_ERROR_WANT_READ || err == SSL_ERROR_WANT_WRITE) {
      pollfd pfd{impl_->fd,
                 static_cast<short>(err == SSL_ERROR_WANT_READ ? POLLIN : POLLOUT), 0};
      if (poll(&pfd, 1, 5000) <= 0) return false;
      continue;
    }
    if (!impl_->saw_app_data) impl_->broken_before_app_data = true;
    return false;
  }
  return true;
}

ReadResult TlsChannel::read_some(std::span<std::uint8_t> buf,
                                 std::chrono::milliseconds timeout) {
  const auto deadline = Clock::now() + timeout;
  for (;;) {
    ERR_clear_error();
    errno = 0;
    const int rc =
        SSL_read(impl_->ssl.get(), buf.data(), static_cast<int>(buf.size()));
    if (rc > 0) {
      impl_->saw_app_data = true;
      return {ReadStatus::Data, static_cast<std::size_t>(rc)};
    }
    const int err = SSL_get_error(impl_->ssl.get(), rc);
    if (err == SSL_ERROR_ZERO_RETURN) {
      if (!impl_->saw_app_data) impl_->broken_before_app_data = true;
      return {ReadStatus::Eof, 0};
    }
    if (err == SSL_ERROR_WANT_READ || err == SSL_ERROR_WANT_WRITE) {
      const auto now = Clock::now();
      if (now >= deadline) return {ReadStatus::Timeout, 0};
      const auto wait =
          std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now);
      pollfd pfd{impl_->fd,
                 static_cast<short>(err == SSL_ERROR_WANT_READ ? POLLIN : POLLOUT), 0};
      const int prc = poll(&pfd, 1, static_cast<int>(wait.count()));
      if (prc < 0) return {ReadStatus::Error, 0};
      continue;
    }
    if (!impl_->saw_app_data) impl_->broken_before_app_data = true;
    if (err == SSL_ERROR_SYSCALL && errno == ECONNRESET) return {ReadStatus::Reset, 0};
    if (err == SSL_ERROR_SYSCALL && errno == 0) return {ReadStatus::Eof, 0};
    return {ReadStatus::Error, 0};
  }
}

const TlsInfo& TlsChannel::info() const { return impl_->info; }
bool TlsChannel::cert_requested() const { return impl_->state.cert_requested; }
bool TlsChannel::failed_before_app_data() const { return impl_->broken_before_app_data; }

struct DtlsChannel::Impl {
  CtxPtr ctx;
  SslPtr ssl;
  int fd = -1;
  SslState state;
  TlsInfo info;

  ~Impl() {
    if (fd >= 0) close(fd);
  }
};

DtlsChannel::DtlsChannel(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
DtlsChannel::~DtlsChannel() = default;

DtlsChannel::HandshakeResult DtlsChannel::handshake(int fd, const TlsClientConfig& cfg) {
  auto impl = std::make_unique<Impl>();
  impl->fd = fd;
  std::string ctx_error;
  impl->ctx = make_client_ctx(true, cfg, ctx_error);
  if (!impl->ctx) return TlsFailure{TlsFailReason::Other, ctx_error, false};
  impl->ssl.reset(SSL_new(impl->ctx.get()));
  if (!impl->ssl) return TlsFailure{TlsFailReason::Other, openssl_error_text(), false};
  SSL_set_ex_data(impl->ssl.get(), ssl_state_index(), &impl->state);
  SSL_set_fd(impl->ssl.get(), fd);

  if (auto failure = run_handshake(impl->ssl.get(), fd, true, cfg.handshake_timeout,
                                   impl->state)) {
    failure->cert_requested = impl->state.cert_requested;
    return *failure;
  }
  impl->info = collect_info(impl->ssl.get(), cfg);
  impl->info.max_version = TlsVersion::Dtls1_2;
  return std::unique_ptr<DtlsChannel>(new DtlsChannel(std::move(impl)));
}

bool DtlsChannel::write_all(std::span<const std::uint8_t> data) {
  ERR_clear_error();
  return SSL_write(impl_->ssl.get(), data.data(), static_cast<int>(data.size())) ==
         static_cast<int>(data.size());
}

ReadResult DtlsChannel::read_some(std::span<std::uint8_t> buf,
                                  std::chrono::milliseconds timeout) {
  const auto deadline = Clock::now() + timeout;
  for (;;) {
    ERR_clear_error();
    errno = 0;
    const int rc = SSL_read(impl_->ssl.get(), buf.data(), static_cast<int>(buf.size()));
    if (rc > 0) return {ReadStatus::Data, static_cast<std::size_t>(rc)};
    const int err = SSL_get_error(impl_->ssl.get(), rc);
    if (err == SSL_ERROR_ZERO_RETURN) return {ReadStatus::Eof, 0};
    if (err == SSL_ERROR_WANT_READ || err == SSL_ERROR_WANT_WRITE) {
      const auto now = Clock::now();
      if (now >= deadline) return {ReadStatus::Timeout, 0};
      const auto wait =
          std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now);
      pollfd pfd{impl_->fd,
                 static_cast<short>(err == SSL_ERROR_WANT_READ ? POLLIN : POLLOUT), 0};
      if (poll(&pfd, 1, static_cast<int>(wait.count())) < 0)
        return {ReadStatus::Error, 0};
      continue;
    }
    if (err == SSL_ERROR_SYSCALL && errno == ECONNREFUSED)
      return {ReadStatus::Reset, 0};
    return {ReadStatus::Error, 0};
  }
}

const TlsInfo& DtlsChannel::info() const { return impl_->info; }

TlsProbeOutcome tls_capability_probe(const Ipv6Address& addr, std::uint16_t port,
                                     const TlsClientConfig& cfg) {
  TlsProbeOutcome out;
  const auto conn = tcp_connect(addr, port, cfg.connect_timeout);
  if (conn.status != ConnectStatus::Ok) {
    out.reason = conn.status == ConnectStatus::Timeout ? TlsFailReason::Timeout
                                                       : TlsFailReason::Reset;
    out.detail = "connect: " + (conn.error.empty() ? std::string("timeout") : conn.error);
    return out;
  }
  auto result = TlsChannel::handshake(conn.fd, cfg);
  if (auto* failure = std::get_if<TlsFailure>(&result)) {
    out.reason = failure->reason;
    out.detail = failure->detail;
    return out;
  }
  auto& channel = *std::get<std::unique_ptr<TlsChannel>>(result);
  // A TLS 1.3 server that insists on client certificates only fails after our
  // Finished; give it one short read to object before declaring success.
  if (channel.cert_requested() && channel.info().max_version == TlsVersion::Tls1_3) {
    std::uint8_t tmp[256];
    const auto rr = channel.read_some(tmp, std::chrono::milliseconds(300));
    if (rr.status == ReadStatus::Eof || rr.status == ReadStatus::Reset ||
        rr.status == ReadStatus::Error) {
      out.reason = TlsFailReason::PeerRequiredAuth;
      out.detail = "session closed after certificate request";
      return out;
    }
  }
  out.info = channel.info();
  return out;
}

TlsProbeOutcome detect_max_tls_version(const Ipv6Address& addr, std::uint16_t port,
                                       const TlsClientConfig& cfg) {
  TlsClientConfig attempt = cfg;
  attempt.min_version = TlsVersion::Tls1_0;
  attempt.max_version = TlsVersion::Tls1_3;
  TlsProbeOutcome out = tls_capability_probe(addr, port, attempt);
  if (out.info) return out;
  if (out.reason == TlsFailReason::Timeout || out.reason == TlsFailReason::PeerRequiredAuth)
    return out;
  for (const auto lower : {TlsVersion::Tls1_2, TlsVersion::Tls1_0}) {
    attempt.max_version = lower;
    TlsProbeOutcome retry = tls_capability_probe(addr, port, attempt);
    if (retry.info) return retry;
    out = retry;
    if (out.reason == TlsFailReason::Timeout ||
        out.reason == TlsFailReason::PeerRequiredAuth)
      return out;
  }
  return out;
}

}  // namespace iot6
