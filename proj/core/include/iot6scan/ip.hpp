#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace iot6 {

/// A 128-bit IPv6 address held as raw network-order bytes. The byte form is
/// the canonical internal representation; textual rendering always goes
/// through the RFC 5952 compressed lowercase form.
struct Ipv6Address {
  std::array<std::uint8_t, 16> bytes{};

  static std::optional<Ipv6Address> parse(std::string_view text);
  std::string to_string() const;

  /// Bit `i` counted from the most significant bit (0..127).
  bool bit(unsigned i) const { return (bytes[i / 8] >> (7 - i % 8)) & 1; }
  void set_bit(unsigned i, bool v);

  auto operator<=>(const Ipv6Address&) const = default;
};

/// An IPv6 prefix. The address part is normalized: all bits past `length`
/// are zero.
struct Prefix {
  Ipv6Address address{};
  std::uint8_t length = 0;

  Prefix() = default;
  Prefix(const Ipv6Address& a, std::uint8_t len);

  /// Parses "2001:db8::/32". A bare address is accepted as a /128.
  static std::optional<Prefix> parse(std::string_view text);
  std::string to_string() const;

  bool contains(const Ipv6Address& a) const;
  bool contains(const Prefix& other) const;

  /// The enclosing prefix of length `len` (len <= length).
  Prefix truncated(std::uint8_t len) const;
  /// Sub-prefix obtained by appending the 4-bit nibble `index` (0..15).
  Prefix child4(unsigned index) const;

  auto operator<=>(const Prefix&) const = default;
};

/// Binary trie over prefixes with set semantics. Insertion keeps the trie a
/// minimal cover: inserting a prefix covered by an existing one is a no-op,
/// and inserting a prefix that covers existing entries replaces them.
class PrefixTrie {
 public:
  PrefixTrie();
  PrefixTrie(PrefixTrie&&) noexcept;
  PrefixTrie& operator=(PrefixTrie&&) noexcept;
  PrefixTrie(const PrefixTrie&);
  PrefixTrie& operator=(const PrefixTrie&);
  ~PrefixTrie();

  void insert(const Prefix& p);
  bool covers(const Ipv6Address& a) const;
  bool covers(const Prefix& p) const;

  /// All stored prefixes in address order.
  std::vector<Prefix> prefixes() const;
  std::size_t size() const { return count_; }
  bool empty() const { return count_ == 0; }

 private:
  struct Node;
  std::unique_ptr<Node> root_;
  std::size_t count_ = 0;
};

/// Longest-prefix-match table mapping prefixes to values (routing snapshots,
/// geo fixtures).
template <typename V>
class PrefixMap {
 public:
  void insert(const Prefix& p, V value) {
    Node* n = &root_;
    for (unsigned i = 0; i < p.length; ++i) {
      auto& child = p.address.bit(i) ? n->one : n->zero;
      if (!child) child = std::make_unique<Node>();
      n = child.get();
    }
    if (!n->value) ++count_;
    n->value = std::move(value);
  }

  const V* lookup(const Ipv6Address& a) const {
    const Node* n = &root_;
    const V* best = n->value ? &*n->value : nullptr;
    for (unsigned i = 0; i < 128 && n; ++i) {
      n = (a.bit(i) ? n->one : n->zero).get();
      if (n && n->value) best = &*n->value;
    }
    return best;
  }

  std::size_t size() const { return count_; }
  bool empty() const { return count_ == 0; }

 private:
  struct Node {
    std::optional<V> value;
    std::unique_ptr<Node> zero, one;
  };
  Node root_;
  std::size_t count_ = 0;
};

}  // namespace iot6
