#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "grc/bitio.hpp"
#include "grc/common.hpp"

namespace grc {

// Edge label for the landmark test: -1 on equal symbols, otherwise twice the
// lowest differing bit position plus that bit of the right symbol.
inline std::int64_t edge_label(Code x, Code y) {
  if (x == y) return -1;
  int j = std::countr_zero(x ^ y);
  return 2 * static_cast<std::int64_t>(j) + ((y >> j) & 1);
}

// Does position 2 of the 4-symbol window carry a landmark? Left-strict,
// right-non-strict local maximum of the edge labels, so runs of equal
// symbols never produce one and repeated substrings decide identically.
inline bool landmark(Code w1, Code w2, Code w3, Code w4) {
  std::int64_t mid = edge_label(w2, w3);
  return mid > edge_label(w1, w2) && mid >= edge_label(w3, w4);
}

// One queued symbol occurrence. `shape` is the post-order structure of its
// subtree (0 leaf, 1 first occurrence): a single leaf for terminals and
// repeats, the whole packed subtree for a first occurrence, which `fresh`
// marks. Leaf labels ride along unsized in `labels` (varints, left to
// right): a later pairing can create a rule that lands in the stream before
// a leaf buffered earlier, so label widths only settle at segment close.
// The tallies cover exactly what `shape` holds, for segment framing.
struct Slot {
  Code code = 0;
  bool fresh = false;
  std::uint64_t leaves = 0;
  std::uint64_t internals = 0;
  BitBuffer shape;
  std::string labels;
};

// Online bottom-up parse over per-level queues of capacity five.
//
// Sink contract: Slot update(Slot a, Slot b) builds or finds the rule for
// the adjacent pair (a, b) and returns the resulting occurrence. Calls are
// issued in the exact order their nodes appear in the output stream.
template <class Sink>
class Parser {
 public:
  explicit Parser(Sink& sink) : sink_(sink) {}

  void feed(Slot terminal) { process_(1, std::move(terminal)); }

  bool has_pending() const {
    for (const Level& lvl : levels_)
      if (!lvl.pending.empty()) return true;
    return false;
  }

  std::size_t level_count() const { return levels_.size(); }

  // Close the segment. Pure-leaf leftovers pair left-to-right per level and
  // promote upward, planned first and executed in post-order of the plan.
  // Leftovers up to and including the rightmost first occurrence instead
  // wrap the rest right-nested, newest first: a first occurrence already
  // holds its rule bits in place, so a rule paired to its left would enter
  // the stream ahead of rules numbered before it and desync the mirror.
  Slot drain() {
    std::vector<Slot> slots;  // leftovers in text order: higher levels first
    std::vector<std::size_t> depth;
    for (std::size_t li = levels_.size(); li-- > 0;) {
      for (Slot& s : levels_[li].pending) {
        slots.push_back(std::move(s));
        depth.push_back(li);
      }
    }
    levels_.clear();
    if (slots.empty()) throw InternalError("empty segment");

    std::size_t spine = 0;  // slots [0, spine) hang on the right spine
    for (std::size_t i = 0; i < slots.size(); ++i)
      if (slots[i].fresh) spine = i + 1;

    Slot acc;
    if (spine < slots.size()) {
      std::vector<PlanNode> arena;
      std::vector<int> carried;
      std::size_t top = 0;
      for (std::size_t i = spine; i < slots.size(); ++i) top = std::max(top, depth[i] + 1);
      for (std::size_t li = 0; li < top; ++li) {
        std::vector<int> items;
        for (std::size_t i = spine; i < slots.size(); ++i) {
          if (depth[i] != li) continue;
          arena.push_back(PlanNode{std::move(slots[i]), -1, -1});
          items.push_back(static_cast<int>(arena.size() - 1));
        }
        items.insert(items.end(), carried.begin(), carried.end());
        carried = pair_up_(arena, items);
      }
      while (carried.size() > 1) carried = pair_up_(arena, carried);
      acc = exec_(arena, carried[0]);
    } else {
      acc = std::move(slots[--spine]);
    }
    while (spine > 0) {
      --spine;
      acc = sink_.update(std::move(slots[spine]), std::move(acc));
    }
    return acc;
  }

 private:
  struct Level {
    Code ctx[2] = {0, 0};  // last two consumed symbols, landmark context
    bool primed = false;   // ctx valid; the level's bootstrap pair was built
    std::vector<Slot> pending;
  };

  struct PlanNode {
    Slot slot;
    int l, r;
  };

  void process_(std::size_t k, Slot x) {
    if (levels_.size() < k) levels_.resize(k);
    Level& lvl = levels_[k - 1];
    lvl.pending.push_back(std::move(x));

    if (!lvl.primed) {
      if (k >= 2) {
        // Upper levels bootstrap as soon as a pair exists; waiting until a
        // full window would create the pair's rule after rules that sit to
        // its right in the stream.
        if (lvl.pending.size() == 2) first_pair_(k, lvl);
        return;
      }
      if (lvl.pending.size() == 4 &&
          !landmark(lvl.pending[0].code, lvl.pending[1].code, lvl.pending[2].code,
                    lvl.pending[3].code)) {
        first_build2_(k, lvl);
      } else if (lvl.pending.size() == 5) {
        first_build3_(k, lvl);
      }
      return;
    }

    if (lvl.pending.size() == 2 &&
        !landmark(lvl.ctx[0], lvl.ctx[1], lvl.pending[0].code, lvl.pending[1].code)) {
      build2_(k, lvl);
    } else if (lvl.pending.size() == 3) {
      build3_(k, lvl);
    }
  }

  // Bootstrap pair at levels >= 2.
  void first_pair_(std::size_t k, Level& lvl) {
    Code c0 = lvl.pending[0].code, c1 = lvl.pending[1].code;
    Slot a = std::move(lvl.pending[0]);
    Slot b = std::move(lvl.pending[1]);
    lvl.pending.clear();
    lvl.ctx[0] = c0;
    lvl.ctx[1] = c1;
    lvl.primed = true;
    Slot f = sink_.update(std::move(a), std::move(b));
    process_(k + 1, std::move(f));
  }

  // First build at level 1, two pending pairs: bootstrap pair then 2-tree.
  void first_build2_(std::size_t k, Level& lvl) {
    Code c2 = lvl.pending[2].code, c3 = lvl.pending[3].code;
    Slot a = std::move(lvl.pending[0]);
    Slot b = std::move(lvl.pending[1]);
    Slot s2 = std::move(lvl.pending[2]);
    Slot s3 = std::move(lvl.pending[3]);
    lvl.pending.clear();
    lvl.ctx[0] = c2;
    lvl.ctx[1] = c3;
    lvl.primed = true;
    Slot f = sink_.update(std::move(a), std::move(b));
    process_(k + 1, std::move(f));  // may invalidate lvl; state already final
    Slot z = sink_.update(std::move(s2), std::move(s3));
    process_(k + 1, std::move(z));
  }

  // First build at level 1 with five queued symbols: bootstrap pair, then
  // the 2-2-tree over the last three.
  void first_build3_(std::size_t k, Level& lvl) {
    Code c3 = lvl.pending[3].code, c4 = lvl.pending[4].code;
    Slot a = std::move(lvl.pending[0]);
    Slot b = std::move(lvl.pending[1]);
    Slot s2 = std::move(lvl.pending[2]);
    Slot s3 = std::move(lvl.pending[3]);
    Slot s4 = std::move(lvl.pending[4]);
    lvl.pending.clear();
    lvl.ctx[0] = c3;
    lvl.ctx[1] = c4;
    lvl.primed = true;
    Slot f = sink_.update(std::move(a), std::move(b));
    process_(k + 1, std::move(f));
    Slot y = sink_.update(std::move(s3), std::move(s4));
    Slot z = sink_.update(std::move(s2), std::move(y));
    process_(k + 1, std::move(z));
  }

  void build2_(std::size_t k, Level& lvl) {
    Code c0 = lvl.pending[0].code, c1 = lvl.pending[1].code;
    Slot a = std::move(lvl.pending[0]);
    Slot b = std::move(lvl.pending[1]);
    lvl.pending.clear();
    lvl.ctx[0] = c0;
    lvl.ctx[1] = c1;
    Slot z = sink_.update(std::move(a), std::move(b));
    process_(k + 1, std::move(z));
  }

  void build3_(std::size_t k, Level& lvl) {
    Code c1 = lvl.pending[1].code, c2 = lvl.pending[2].code;
    Slot s0 = std::move(lvl.pending[0]);
    Slot s1 = std::move(lvl.pending[1]);
    Slot s2 = std::move(lvl.pending[2]);
    lvl.pending.clear();
    lvl.ctx[0] = c1;
    lvl.ctx[1] = c2;
    Slot y = sink_.update(std::move(s1), std::move(s2));
    Slot z = sink_.update(std::move(s0), std::move(y));
    process_(k + 1, std::move(z));
  }

  std::vector<int> pair_up_(std::vector<PlanNode>& arena, const std::vector<int>& items) {
    std::vector<int> out;
    std::size_t i = 0;
    for (; i + 1 < items.size(); i += 2) {
      arena.push_back(PlanNode{Slot{}, items[i], items[i + 1]});
      out.push_back(static_cast<int>(arena.size() - 1));
    }
    if (i < items.size()) out.push_back(items[i]);
    return out;
  }

  Slot exec_(std::vector<PlanNode>& arena, int id) {
    PlanNode& n = arena[id];
    if (n.l < 0) return std::move(n.slot);
    Slot a = exec_(arena, n.l);
    Slot b = exec_(arena, n.r);
    return sink_.update(std::move(a), std::move(b));
  }

  Sink& sink_;
  std::vector<Level> levels_;
};

}  // namespace grc
