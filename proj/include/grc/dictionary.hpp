#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "grc/common.hpp"

namespace grc {

// Live grammar rules z -> (x, y) with frequency counters, plus a chained
// digram -> code index so "does this rule exist" is one probe. Codes grow
// densely from sigma in creation order and are never reused until reset().
class PhraseDictionary {
 public:
  struct Rule {
    Code x, y;
    std::uint64_t counter;
    Code chain;  // next code in the same reverse bucket
  };

  explicit PhraseDictionary(std::uint32_t sigma = kSigma, double alpha = 1.0)
      : sigma_(sigma), alpha_(alpha) {
    if (!(alpha_ > 0.0 && alpha_ <= 1.0)) throw InternalError("load factor out of range");
    buckets_.assign(kInitialBuckets, kNoCode);
  }

  struct LookupResult {
    Code code;
    bool created;
  };

  // Returns the existing rule for (x, y) and bumps its counter, or creates
  // one with the given initial counter.
  LookupResult lookup_or_create(Code x, Code y, std::uint64_t init_counter) {
    std::size_t b = bucket_of_(x, y);
    for (Code z = buckets_[b]; z != kNoCode;) {
      Rule& r = rules_.find(z)->second;
      if (r.x == x && r.y == y) {
        if (r.counter != std::numeric_limits<std::uint64_t>::max()) ++r.counter;
        return {z, false};
      }
      z = r.chain;
    }
    maybe_grow_();
    b = bucket_of_(x, y);  // growing rehashes
    Code z = sigma_ + created_count_++;
    rules_.emplace(z, Rule{x, y, init_counter, buckets_[b]});
    buckets_[b] = z;
    return {z, true};
  }

  bool exists(Code x, Code y) const {
    std::size_t b = bucket_of_(x, y);
    for (Code z = buckets_[b]; z != kNoCode;) {
      const Rule& r = rules_.find(z)->second;
      if (r.x == x && r.y == y) return true;
      z = r.chain;
    }
    return false;
  }

  bool is_live(Code z) const { return rules_.count(z) != 0; }

  const Rule* find(Code z) const {
    auto it = rules_.find(z);
    return it == rules_.end() ? nullptr : &it->second;
  }

  void bump(Code z) {
    auto it = rules_.find(z);
    if (it == rules_.end()) throw InternalError("bump on dead code");
    if (it->second.counter != std::numeric_limits<std::uint64_t>::max()) ++it->second.counter;
  }

  // Undo one provisional hit increment (the occurrence never reached the
  // output, so the mirrored side will not see it).
  void cancel_hit(Code z) {
    auto it = rules_.find(z);
    if (it == rules_.end() || it->second.counter < 2)
      throw InternalError("cancel without matching hit");
    --it->second.counter;
  }

  void set_counter(Code z, std::uint64_t c) {
    auto it = rules_.find(z);
    if (it == rules_.end()) throw InternalError("set_counter on dead code");
    it->second.counter = c;
  }

  // Removes victims from rules and the reverse index. Refusing to orphan a
  // survivor's child is an invariant, not an input error.
  void remove_rules(const std::unordered_set<Code>& victims) {
    if (victims.empty()) return;
    for (Code z : victims)
      if (!rules_.count(z)) throw InternalError("removing code that is not live");
    for (const auto& [z, r] : rules_) {
      if (victims.count(z)) continue;
      if (!is_terminal(r.x, sigma_) && victims.count(r.x))
        throw InternalError("prune would orphan a live rule child");
      if (!is_terminal(r.y, sigma_) && victims.count(r.y))
        throw InternalError("prune would orphan a live rule child");
    }
    for (Code z : victims) {
      const Rule& r = rules_.find(z)->second;
      unlink_(z, r.x, r.y);
      rules_.erase(z);
    }
  }

  // All live nonterminals reachable from roots, roots included.
  std::unordered_set<Code> live_closure(std::span<const Code> roots) const {
    std::unordered_set<Code> seen;
    std::vector<Code> work;
    for (Code c : roots) {
      if (is_terminal(c, sigma_) || !rules_.count(c)) continue;
      if (seen.insert(c).second) work.push_back(c);
    }
    while (!work.empty()) {
      Code z = work.back();
      work.pop_back();
      const Rule& r = rules_.find(z)->second;
      for (Code child : {r.x, r.y}) {
        if (is_terminal(child, sigma_) || !rules_.count(child)) continue;
        if (seen.insert(child).second) work.push_back(child);
      }
    }
    return seen;
  }

  // Full wipe: rules gone and code numbering restarts at sigma, which also
  // restarts the label-width schedule on both ends of the pipe.
  void reset() {
    rules_.clear();
    buckets_.assign(kInitialBuckets, kNoCode);
    created_count_ = 0;
  }

  template <class F>
  void for_each(F&& f) const {
    for (const auto& [z, r] : rules_) f(z, r.x, r.y, r.counter);
  }

  std::uint64_t live_count() const { return rules_.size(); }
  std::uint64_t created_count() const { return created_count_; }
  std::uint32_t sigma() const { return sigma_; }
  std::size_t bucket_count() const { return buckets_.size(); }

 private:
  static constexpr Code kNoCode = std::numeric_limits<Code>::max();
  static constexpr std::size_t kInitialBuckets = 1 << 10;

  std::size_t bucket_of_(Code x, Code y) const {
    return digram_hash(x, y) & (buckets_.size() - 1);
  }

  void maybe_grow_() {
    if (static_cast<double>(rules_.size() + 1) <= alpha_ * static_cast<double>(buckets_.size()))
      return;
    std::size_t n = buckets_.size();
    while (static_cast<double>(rules_.size() + 1) > alpha_ * static_cast<double>(n)) n *= 2;
    buckets_.assign(n, kNoCode);
    for (auto& [z, r] : rules_) {
      std::size_t b = bucket_of_(r.x, r.y);
      r.chain = buckets_[b];
      buckets_[b] = z;
    }
  }

  void unlink_(Code z, Code x, Code y) {
    std::size_t b = bucket_of_(x, y);
    Code cur = buckets_[b];
    if (cur == z) {
      buckets_[b] = rules_.find(z)->second.chain;
      return;
    }
    while (cur != kNoCode) {
      Rule& r = rules_.find(cur)->second;
      if (r.chain == z) {
        r.chain = rules_.find(z)->second.chain;
        return;
      }
      cur = r.chain;
    }
    throw InternalError("reverse index out of sync");
  }

  std::uint32_t sigma_;
  double alpha_;
  std::unordered_map<Code, Rule> rules_;
  std::vector<Code> buckets_;
  std::uint64_t created_count_ = 0;
};

}  // namespace grc
