#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "iot6scan/ip.hpp"

namespace iot6 {

/// Deduplicated, order-preserving list of scan candidate addresses.
struct Hitlist {
  std::vector<Ipv6Address> entries;
  std::string source_label;
};

struct HitlistLoadStats {
  std::size_t kept = 0;
  std::size_t duplicates = 0;
  std::size_t skipped = 0;  // malformed lines, each reported via warn
};

/// Reads a hitlist file: one address per line, '#' starts a comment, blank
/// lines ignored. Malformed lines are skipped with a warning; an unreadable
/// file throws.
Hitlist load_hitlist(const std::filesystem::path& path, HitlistLoadStats* stats = nullptr,
                     const std::function<void(const std::string&)>& warn = {});

struct BlocklistEntry {
  Prefix prefix;
  std::string reason;
};

/// Prefixes that must never be probed. Empty is valid.
class Blocklist {
 public:
  Blocklist() = default;
  explicit Blocklist(std::vector<BlocklistEntry> entries);

  /// One "prefix/length" per line, optional trailing text is kept as the
  /// entry's reason, '#' starts a comment. Throws on unreadable file or
  /// malformed prefix.
  static Blocklist load(const std::filesystem::path& path);

  bool covers(const Ipv6Address& a) const { return trie_.covers(a); }
  bool empty() const { return entries_.empty(); }
  const std::vector<BlocklistEntry>& entries() const { return entries_; }

 private:
  std::vector<BlocklistEntry> entries_;
  PrefixTrie trie_;
};

/// Minimal cover of prefixes behind which one machine answers for every
/// address. Construction enforces the no-containment invariant.
class AliasedPrefixSet {
 public:
  AliasedPrefixSet() = default;
  static AliasedPrefixSet from_prefixes(const std::vector<Prefix>& prefixes);
  /// One "prefix/length" per line, '#' comments. Throws on unreadable file or
  /// malformed prefix.
  static AliasedPrefixSet load(const std::filesystem::path& path);

  bool covers(const Ipv6Address& a) const { return trie_.covers(a); }
  std::vector<Prefix> prefixes() const { return trie_.prefixes(); }
  std::size_t size() const { return trie_.size(); }
  bool empty() const { return trie_.empty(); }

 private:
  PrefixTrie trie_;
};

/// Probe seam for alias detection. Implementations answer whether a single
/// address responded; timeouts count as "no", never as an error.
class Prober {
 public:
  virtual ~Prober() = default;
  virtual bool probe(const Ipv6Address& target) = 0;
};

struct AliasDetectionParams {
  /// Prefix lengths tested per candidate, coarse to fine. Each level L probes
  /// the 16 child sub-prefixes at L+4, so every level must be <= 124.
  std::vector<std::uint8_t> levels = {64, 68, 72, 76, 80, 84, 88, 92,
                                      96, 100, 104, 108, 112, 116, 120, 124};
  unsigned probes_per_level = 3;
  std::uint64_t seed = 1;
  unsigned max_in_flight = 64;
};

/// Multi-level aliased prefix detection: a prefix is aliased at level L iff
/// every pseudorandom probe in each of its 16 child sub-prefixes at L+4
/// responds. Candidates are tested at every configured level that truncates
/// them; the result is the minimal cover of all aliased prefixes.
AliasedPrefixSet detect_aliased_prefixes(const std::vector<Prefix>& candidates,
                                         Prober& prober,
                                         const AliasDetectionParams& params = {});

/// Deterministic probe address for (prefix, probe_index, seed): host bits are
/// drawn from a seeded generator so detection is reproducible.
Ipv6Address alias_probe_address(const Prefix& prefix, unsigned probe_index,
                                std::uint64_t seed);

struct FilterStats {
  std::size_t kept = 0;
  std::size_t removed_aliased = 0;
  std::size_t removed_blocklisted = 0;
};

/// Drops every hitlist address covered by an aliased prefix or by the
/// blocklist; preserves order. Blocklist wins the removal attribution when
/// both cover an address.
Hitlist filter_targets(const Hitlist& h, const AliasedPrefixSet& aliased,
                       const Blocklist& bl, FilterStats* stats = nullptr);

}  // namespace iot6
