#include "iot6scan/ip.hpp"

#include <arpa/inet.h>

#include <algorithm>
#include <charconv>

namespace iot6 {

std::optional<Ipv6Address> Ipv6Address::parse(std::string_view text) {
  if (text.empty() || text.size() >= INET6_ADDRSTRLEN) return std::nullopt;
  char buf[INET6_ADDRSTRLEN];
  std::copy(text.begin(), text.end(), buf);
  buf[text.size()] = '\0';
  Ipv6Address out;
  if (inet_pton(AF_INET6, buf, out.bytes.data()) != 1) return std::nullopt;
  return out;
}

std::string Ipv6Address::to_string() const {
  char buf[INET6_ADDRSTRLEN];
  if (!inet_ntop(AF_INET6, bytes.data(), buf, sizeof(buf))) return "<invalid>";
  return buf;
}

void Ipv6Address::set_bit(unsigned i, bool v) {
  const std::uint8_t mask = static_cast<std::uint8_t>(1u << (7 - i % 8));
  if (v)
    bytes[i / 8] |= mask;
  else
    bytes[i / 8] &= static_cast<std::uint8_t>(~mask);
}

Prefix::Prefix(const Ipv6Address& a, std::uint8_t len) : address(a), length(len) {
  // zero host bits so equal prefixes compare equal
  for (unsigned i = length; i < 128; ++i) address.set_bit(i, false);
}

std::optional<Prefix> Prefix::parse(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) {
    auto a = Ipv6Address::parse(text);
    if (!a) return std::nullopt;
    return Prefix(*a, 128);
  }
  auto a = Ipv6Address::parse(text.substr(0, slash));
  if (!a) return std::nullopt;
  const auto len_text = text.substr(slash + 1);
  unsigned len = 0;
  const auto [ptr, ec] =
      std::from_chars(len_text.data(), len_text.data() + len_text.size(), len);
  if (ec != std::errc{} || ptr != len_text.data() + len_text.size() || len > 128)
    return std::nullopt;
  return Prefix(*a, static_cast<std::uint8_t>(len));
}

std::string Prefix::to_string() const {
  return address.to_string() + "/" + std::to_string(length);
}

bool Prefix::contains(const Ipv6Address& a) const {
  unsigned full = length / 8;
  for (unsigned i = 0; i < full; ++i)
    if (address.bytes[i] != a.bytes[i]) return false;
  const unsigned rem = length % 8;
  if (rem == 0) return true;
  const std::uint8_t mask = static_cast<std::uint8_t>(0xff << (8 - rem));
  return (address.bytes[full] & mask) == (a.bytes[full] & mask);
}

bool Prefix::contains(const Prefix& other) const {
  return other.length >= length && contains(other.address);
}

Prefix Prefix::truncated(std::uint8_t len) const {
  return Prefix(address, std::min(len, length));
}

Prefix Prefix::child4(unsigned index) const {
  Prefix out = *this;
  for (unsigned i = 0; i < 4; ++i)
    out.address.set_bit(length + i, (index >> (3 - i)) & 1);
  out.length = static_cast<std::uint8_t>(length + 4);
  return out;
}

struct PrefixTrie::Node {
  bool terminal = false;
  std::unique_ptr<Node> zero, one;

  std::unique_ptr<Node> clone() const {
    auto n = std::make_unique<Node>();
    n->terminal = terminal;
    if (zero) n->zero = zero->clone();
    if (one) n->one = one->clone();
    return n;
  }
};

PrefixTrie::PrefixTrie() : root_(std::make_unique<Node>()) {}
PrefixTrie::PrefixTrie(PrefixTrie&&) noexcept = default;
PrefixTrie& PrefixTrie::operator=(PrefixTrie&&) noexcept = default;
PrefixTrie::~PrefixTrie() = default;

PrefixTrie::PrefixTrie(const PrefixTrie& other)
    : root_(other.root_->clone()), count_(other.count_) {}

PrefixTrie& PrefixTrie::operator=(const PrefixTrie& other) {
  if (this != &other) {
    root_ = other.root_->clone();
    count_ = other.count_;
  }
  return *this;
}

void PrefixTrie::insert(const Prefix& p) {
  Node* n = root_.get();
  for (unsigned i = 0; i < p.length; ++i) {
    if (n->terminal) return;  // already covered by a shorter prefix
    auto& child = p.address.bit(i) ? n->one : n->zero;
    if (!child) child = std::make_unique<Node>();
    n = child.get();
  }
  if (n->terminal) return;
  // drop covered descendants, keeping the cover minimal
  std::size_t removed = 0;
  {
    std::vector<const Node*> stack;
    if (n->zero) stack.push_back(n->zero.get());
    if (n->one) stack.push_back(n->one.get());
    while (!stack.empty()) {
      const Node* cur = stack.back();
      stack.pop_back();
      if (cur->terminal) ++removed;
      if (cur->zero) stack.push_back(cur->zero.get());
      if (cur->one) stack.push_back(cur->one.get());
    }
  }
  n->zero.reset();
  n->one.reset();
  n->terminal = true;
  count_ += 1;
  count_ -= removed;
}

bool PrefixTrie::covers(const Ipv6Address& a) const {
  const Node* n = root_.get();
  for (unsigned i = 0; i <= 128; ++i) {
    if (n->terminal) return true;
    if (i == 128) break;
    n = (a.bit(i) ? n->one : n->zero).get();
    if (!n) return false;
  }
  return false;
}

bool PrefixTrie::covers(const Prefix& p) const {
  const Node* n = root_.get();
  for (unsigned i = 0; i <= p.length; ++i) {
    if (n->terminal) return true;
    if (i == p.length) break;
    n = (p.address.bit(i) ? n->one : n->zero).get();
    if (!n) return false;
  }
  return false;
}

std::vector<Prefix> PrefixTrie::prefixes() const {
  std::vector<Prefix> out;
  struct Frame {
    const Node* node;
    Ipv6Address addr;
    std::uint8_t depth;
  };
  std::vector<Frame> stack{{root_.get(), {}, 0}};
  while (!stack.empty()) {
    Frame f = stack.back();
    stack.pop_back();
    if (f.node->terminal) {
      out.emplace_back(f.addr, f.depth);
      continue;
    }
    if (f.node->one) {
      Ipv6Address a = f.addr;
      a.set_bit(f.depth, true);
      stack.push_back({f.node->one.get(), a, static_cast<std::uint8_t>(f.depth + 1)});
    }
    if (f.node->zero)
      stack.push_back({f.node->zero.get(), f.addr, static_cast<std::uint8_t>(f.depth + 1)});
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace iot6
