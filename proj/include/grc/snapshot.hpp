#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "grc/common.hpp"
#include "grc/dictionary.hpp"

namespace grc {

// Dictionary state fingerprint taken at a segment boundary, after pruning.
// Compressor and decompressor must produce identical sequences of these.
struct BoundarySnapshot {
  std::uint64_t segment = 0;    // 1-based boundary index
  std::uint64_t rules_digest = 0;   // order-free digest of live (z, x, y)
  std::uint64_t counter_digest = 0; // order-free digest of live (z, counter)
  std::uint64_t live_rules = 0;
  std::uint64_t created_total = 0;  // codes handed out since the last reset
  std::uint64_t chars_done = 0;     // bytes consumed resp. recovered so far

  bool operator==(const BoundarySnapshot&) const = default;
};

inline BoundarySnapshot take_snapshot(const PhraseDictionary& dict, std::uint64_t segment,
                                      std::uint64_t chars_done) {
  BoundarySnapshot snap;
  snap.segment = segment;
  snap.live_rules = dict.live_count();
  snap.created_total = dict.created_count();
  snap.chars_done = chars_done;
  std::vector<std::uint64_t> rule_keys, counter_keys;
  rule_keys.reserve(dict.live_count());
  counter_keys.reserve(dict.live_count());
  dict.for_each([&](Code z, Code x, Code y, std::uint64_t counter) {
    rule_keys.push_back(mix64(mix64(z) ^ digram_hash(x, y)));
    counter_keys.push_back(mix64(mix64(z + 1) ^ mix64(counter)));
  });
  // Sort before folding so iteration order cannot leak into the digest.
  std::sort(rule_keys.begin(), rule_keys.end());
  std::sort(counter_keys.begin(), counter_keys.end());
  std::uint64_t rd = 0x5eedba5eba11ull, cd = 0xc0ffee0dadull;
  for (std::uint64_t key : rule_keys) rd = mix64(rd ^ key);
  for (std::uint64_t key : counter_keys) cd = mix64(cd ^ key);
  snap.rules_digest = rd;
  snap.counter_digest = cd;
  return snap;
}

}  // namespace grc
