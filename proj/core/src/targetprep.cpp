#include "iot6scan/targetprep.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace iot6 {

namespace {

std::string trimmed(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string{s.substr(b, e - b + 1)};
}

bool is_comment_or_blank(const std::string& line) {
  return line.empty() || line[0] == '#';
}

}  // namespace

Hitlist load_hitlist(const std::filesystem::path& path, HitlistLoadStats* stats,
                     const std::function<void(const std::string&)>& warn) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read hitlist: " + path.string());

  Hitlist out;
  out.source_label = path.filename().string();
  HitlistLoadStats local;
  std::set<Ipv6Address> seen;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = trimmed(raw);
    if (is_comment_or_blank(line)) continue;
    const auto addr = Ipv6Address::parse(line);
    if (!addr) {
      ++local.skipped;
      const std::string msg =
          path.filename().string() + ":" + std::to_string(lineno) +
          ": skipping malformed address '" + line + "'";
      if (warn)
        warn(msg);
      else
        std::cerr << "warning: " << msg << "\n";
      continue;
    }
    if (!seen.insert(*addr).second) {
      ++local.duplicates;
      continue;
    }
    out.entries.push_back(*addr);
    ++local.kept;
  }
  if (stats) *stats = local;
  return out;
}

Blocklist::Blocklist(std::vector<BlocklistEntry> entries) : entries_(std::move(entries)) {
  for (const auto& e : entries_) trie_.insert(e.prefix);
}

Blocklist Blocklist::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read blocklist: " + path.string());
  std::vector<BlocklistEntry> entries;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = trimmed(raw);
    if (is_comment_or_blank(line)) continue;
    std::istringstream fields(line);
    std::string token;
    fields >> token;
    const auto prefix = Prefix::parse(token);
    if (!prefix)
      throw std::runtime_error("blocklist " + path.string() + ":" +
                               std::to_string(lineno) + ": malformed prefix '" +
                               token + "'");
    std::string reason;
    std::getline(fields, reason);
    entries.push_back({*prefix, trimmed(reason)});
  }
  return Blocklist(std::move(entries));
}

AliasedPrefixSet AliasedPrefixSet::from_prefixes(const std::vector<Prefix>& prefixes) {
  AliasedPrefixSet out;
  for (const auto& p : prefixes) {
    if (p.length == 0)
      throw std::invalid_argument("aliased prefix length must be 1-128");
    out.trie_.insert(p);
  }
  return out;
}

AliasedPrefixSet AliasedPrefixSet::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read aliased-prefix file: " + path.string());
  std::vector<Prefix> prefixes;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = trimmed(raw);
    if (is_comment_or_blank(line)) continue;
    std::istringstream fields(line);
    std::string token;
    fields >> token;
    const auto prefix = Prefix::parse(token);
    if (!prefix)
      throw std::runtime_error("aliased-prefix file " + path.string() + ":" +
                               std::to_string(lineno) + ": malformed prefix '" +
                               token + "'");
    prefixes.push_back(*prefix);
  }
  return from_prefixes(prefixes);
}

Ipv6Address alias_probe_address(const Prefix& prefix, unsigned probe_index,
                                std::uint64_t seed) {
  // Mix the prefix bytes, length and probe index into the seed so each probe
  // address is independent but reproducible.
  std::uint64_t h = seed ^ 0x9e3779b97f4a7c15ULL;
  for (const auto b : prefix.address.bytes) h = (h ^ b) * 0x100000001b3ULL;
  h = (h ^ prefix.length) * 0x100000001b3ULL;
  h = (h ^ probe_index) * 0x100000001b3ULL;
  std::mt19937_64 rng(h);

  Ipv6Address addr = prefix.address;
  std::uint64_t bits = 0;
  unsigned have = 0;
  for (unsigned i = prefix.length; i < 128; ++i) {
    if (have == 0) {
      bits = rng();
      have = 64;
    }
    addr.set_bit(i, bits & 1);
    bits >>= 1;
    --have;
  }
  return addr;
}

namespace {

/// Probes all addresses with a bounded in-flight window; true iff every probe
/// responded. Short-circuits once any probe fails.
bool all_respond(const std::vector<Ipv6Address>& addrs, Prober& prober,
                 unsigned max_in_flight) {
  if (addrs.empty()) return true;
  const unsigned workers =
      std::max(1u, std::min<unsigned>(max_in_flight, addrs.size()));
  if (workers == 1) {
    for (const auto& a : addrs)
      if (!prober.probe(a)) return false;
    return true;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (!failed.load(std::memory_order_relaxed)) {
        const std::size_t i = next.fetch_add(1);
        if (i >= addrs.size()) return;
        if (!prober.probe(addrs[i])) failed.store(true, std::memory_order_relaxed);
      }
    });
  }
  for (auto& t : pool) t.join();
  return !failed.load();
}

}  // namespace

AliasedPrefixSet detect_aliased_prefixes(const std::vector<Prefix>& candidates,
                                         Prober& prober,
                                         const AliasDetectionParams& params) {
  if (params.probes_per_level < 1)
    throw std::invalid_argument("probes_per_level must be >= 1");
  for (std::size_t i = 0; i < params.levels.size(); ++i) {
    if (params.levels[i] > 124)
      throw std::invalid_argument("alias detection level must be <= 124");
    if (i > 0 && params.levels[i] <= params.levels[i - 1])
      throw std::invalid_argument("alias detection levels must be strictly increasing");
  }

  // Each candidate is examined at every configured level that truncates it,
  // coarse first so detection at a short prefix spares all finer tests below.
  std::set<Prefix> tests;
  for (const auto& c : candidates)
    for (const auto level : params.levels)
      if (level <= c.length) tests.insert(c.truncated(level));

  std::vector<Prefix> ordered(tests.begin(), tests.end());
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const Prefix& a, const Prefix& b) { return a.length < b.length; });

  PrefixTrie aliased;
  for (const auto& p : ordered) {
    if (aliased.covers(p)) continue;
    std::vector<Ipv6Address> probes;
    probes.reserve(16u * params.probes_per_level);
    for (unsigned child = 0; child < 16; ++child) {
      const Prefix sub = p.child4(child);
      for (unsigned j = 0; j < params.probes_per_level; ++j)
        probes.push_back(alias_probe_address(sub, j, params.seed));
    }
    if (all_respond(probes, prober, params.max_in_flight)) aliased.insert(p);
  }

  return AliasedPrefixSet::from_prefixes(aliased.prefixes());
}

Hitlist filter_targets(const Hitlist& h, const AliasedPrefixSet& aliased,
                       const Blocklist& bl, FilterStats* stats) {
  Hitlist out;
  out.source_label = h.source_label;
  FilterStats local;
  for (const auto& a : h.entries) {
    if (bl.covers(a)) {
      ++local.removed_blocklisted;
      continue;
    }
    if (aliased.covers(a)) {
      ++local.removed_aliased;
      continue;
    }
    out.entries.push_back(a);
    ++local.kept;
  }
  if (stats) *stats = local;
  return out;
}

}  // namespace iot6
