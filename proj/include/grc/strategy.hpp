#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "grc/common.hpp"
#include "grc/dictionary.hpp"

namespace grc {

enum class Mode : std::uint8_t { plain = 0, freq = 1, lossy = 2, block = 3 };

inline const char* mode_name(Mode m) {
  switch (m) {
    case Mode::plain: return "plain";
    case Mode::freq: return "freq";
    case Mode::lossy: return "lossy";
    case Mode::block: return "block";
  }
  return "?";
}

struct StrategyConfig {
  Mode mode = Mode::plain;
  std::uint64_t k = 0;        // freq: max live rules
  std::uint32_t eps_ppm = 0;  // freq: vacancy, percent * 10^4
  std::uint64_t ell = 0;      // lossy/block: interval length in bytes

  void validate() const {
    switch (mode) {
      case Mode::plain:
        break;
      case Mode::freq:
        if (k < 2) throw std::invalid_argument("freq needs k >= 2");
        if (eps_ppm == 0 || eps_ppm >= 100 * 10000)
          throw std::invalid_argument("freq needs 0 < eps < 100");
        break;
      case Mode::lossy:
      case Mode::block:
        if (ell < 1) throw std::invalid_argument("interval length must be >= 1");
        break;
    }
  }
};

// Dictionary-size control. Deterministic: the decompressor re-runs prune()
// on its mirrored dictionary and must make identical decisions.
class StrategyState {
 public:
  explicit StrategyState(StrategyConfig cfg) : cfg_(cfg) { cfg_.validate(); }

  const StrategyConfig& config() const { return cfg_; }
  std::uint64_t delta() const { return delta_; }
  std::uint64_t chars_consumed() const { return chars_; }

  std::uint64_t counter_init() const {
    return cfg_.mode == Mode::lossy ? delta_ + 1 : 1;
  }

  void note_byte() { ++chars_; }
  void note_recovered(std::uint64_t n) { chars_ += n; }

  // Consulted after every fully processed input byte.
  bool should_flush(std::uint64_t live_rules) const {
    switch (cfg_.mode) {
      case Mode::plain: return false;
      case Mode::freq: return live_rules >= cfg_.k;
      case Mode::lossy:
      case Mode::block: return chars_ % cfg_.ell == 0;
    }
    return false;
  }

  void on_hit(PhraseDictionary& dict, Code z) const { dict.bump(z); }

  // Runs at a segment boundary (queues drained). Every mode self-guards, so
  // both pipeline ends can call it unconditionally after each segment.
  std::unordered_set<Code> prune(PhraseDictionary& dict) {
    switch (cfg_.mode) {
      case Mode::plain: return {};
      case Mode::freq: return prune_freq_(dict);
      case Mode::lossy: return prune_lossy_(dict);
      case Mode::block: return prune_block_(dict);
    }
    return {};
  }

 private:
  // Evict the lowest counters until at most ceil(k*(1-eps/100)) rules are
  // live, computed in one shot: d = r-th smallest counter plays the role of
  // r decrement passes. Children of survivors are kept at a floor of 1.
  std::unordered_set<Code> prune_freq_(PhraseDictionary& dict) {
    std::uint64_t live = dict.live_count();
    if (live < cfg_.k) return {};
    using u128 = unsigned __int128;
    u128 num = u128(cfg_.k) * (1000000 - cfg_.eps_ppm);
    std::uint64_t target = static_cast<std::uint64_t>((num + 999999) / 1000000);
    if (live <= target) return {};
    std::uint64_t r = live - target;

    std::vector<std::uint64_t> counters;
    counters.reserve(live);
    dict.for_each([&](Code, Code, Code, std::uint64_t c) { counters.push_back(c); });
    std::nth_element(counters.begin(), counters.begin() + (r - 1), counters.end());
    std::uint64_t d = counters[r - 1];

    std::unordered_set<Code> marked;
    std::vector<Code> keep_roots;
    dict.for_each([&](Code z, Code x, Code y, std::uint64_t c) {
      if (c <= d) {
        marked.insert(z);
      } else {
        if (!is_terminal(x, dict.sigma())) keep_roots.push_back(x);
        if (!is_terminal(y, dict.sigma())) keep_roots.push_back(y);
      }
    });
    std::unordered_set<Code> protected_ = dict.live_closure(keep_roots);

    std::unordered_set<Code> removed;
    for (Code z : marked)
      if (!protected_.count(z)) removed.insert(z);

    std::vector<std::pair<Code, std::uint64_t>> adjust;
    dict.for_each([&](Code z, Code, Code, std::uint64_t c) {
      if (removed.count(z)) return;
      adjust.emplace_back(z, c <= d ? 1 : c - d);
    });
    for (auto& [z, c] : adjust) dict.set_counter(z, c);
    dict.remove_rules(removed);
    return removed;
  }

  // A rule admitted in interval b has counter >= b+1, so it survives the
  // boundary into interval b+1 and falls out one interval later unless it
  // was hit again or shields a survivor's child.
  std::unordered_set<Code> prune_lossy_(PhraseDictionary& dict) {
    ++delta_;
    std::unordered_set<Code> marked;
    std::vector<Code> keep_roots;
    dict.for_each([&](Code z, Code, Code, std::uint64_t c) {
      if (c < delta_)
        marked.insert(z);
      else
        keep_roots.push_back(z);
    });
    std::unordered_set<Code> protected_ = dict.live_closure(keep_roots);
    std::unordered_set<Code> removed;
    for (Code z : marked)
      if (!protected_.count(z)) removed.insert(z);
    dict.remove_rules(removed);
    return removed;
  }

  std::unordered_set<Code> prune_block_(PhraseDictionary& dict) {
    std::unordered_set<Code> removed;
    dict.for_each([&](Code z, Code, Code, std::uint64_t) { removed.insert(z); });
    dict.reset();
    return removed;
  }

  StrategyConfig cfg_;
  std::uint64_t delta_ = 0;
  std::uint64_t chars_ = 0;
};

}  // namespace grc
