#pragma once

#include <cstdint>
#include <functional>
#include <istream>
#include <ostream>
#include <utility>
#include <vector>

#include "grc/codec.hpp"
#include "grc/common.hpp"
#include "grc/dictionary.hpp"
#include "grc/snapshot.hpp"
#include "grc/strategy.hpp"

namespace grc {

struct DecompressStats {
  std::uint64_t bytes_in = 0;   // container bytes consumed, header included
  std::uint64_t bytes_out = 0;  // recovered text
  std::uint64_t segments = 0;
  std::uint64_t rules_created = 0;
  std::uint64_t rules_live_peak = 0;
};

// Replays the event stream against a mirrored dictionary: every repeat leaf
// re-applies the compressor's counter bump, every internal node must create
// a rule, and each segment boundary reruns the same prune. Working memory is
// the live dictionary plus a stack bounded by the deepest parse tree.
class Decompressor {
 public:
  using BoundaryHook = std::function<void(const BoundarySnapshot&, const PhraseDictionary&)>;

  explicit Decompressor(double alpha = 1.0) : alpha_(alpha) {}

  void set_boundary_hook(BoundaryHook hook) { hook_ = std::move(hook); }

  // Valid once run() has read it.
  const ContainerHeader& header() const { return header_; }

  // out == nullptr replays the whole container (all mirroring and integrity
  // checks included) while discarding the text.
  DecompressStats run(std::istream& in, std::ostream* out) {
    header_ = ContainerHeader::read(in);
    PhraseDictionary dict(static_cast<std::uint32_t>(header_.sigma), alpha_);
    StrategyState strat(header_.to_config());
    EventReader events(in);
    DecompressStats st;
    std::vector<Code> stack;
    std::vector<char> obuf;
    obuf.reserve(kOutBufCap);

    for (;;) {
      EventReader::Event ev = events.next(dict.sigma(), dict.created_count());
      using K = EventReader::Kind;
      if (ev.kind == K::leaf) {
        if (!is_terminal(ev.label, dict.sigma())) {
          if (!dict.is_live(ev.label)) throw CorruptStreamError("leaf names a dead rule");
          strat.on_hit(dict, ev.label);
        }
        stack.push_back(ev.label);
      } else if (ev.kind == K::internal) {
        if (stack.size() < 2) throw InternalError("event balance out of sync");
        Code b = stack.back();
        stack.pop_back();
        Code a = stack.back();
        stack.pop_back();
        auto r = dict.lookup_or_create(a, b, strat.counter_init());
        if (!r.created) throw CorruptStreamError("mirror divergence: digram already live");
        ++st.rules_created;
        if (dict.live_count() > st.rules_live_peak) st.rules_live_peak = dict.live_count();
        stack.push_back(r.code);
      } else if (ev.kind == K::segment_end) {
        if (stack.size() != 1) throw InternalError("event balance out of sync");
        Code root = stack.back();
        stack.pop_back();
        st.bytes_out += expand_(root, dict, out, obuf);
        ++st.segments;
        strat.prune(dict);
        if (hook_) hook_(take_snapshot(dict, st.segments, st.bytes_out), dict);
      } else {
        break;
      }
    }
    flush_(out, obuf);
    st.bytes_in = ContainerHeader::kSize + (events.bits_consumed() + 7) / 8;
    if (header_.original_length != 0 && st.bytes_out != header_.original_length)
      throw IntegrityError("recovered length does not match the header");
    return st;
  }

 private:
  static constexpr std::size_t kOutBufCap = 64 << 10;

  // Left-to-right iterative expansion; stack depth follows derivation
  // height, never text length.
  std::uint64_t expand_(Code root, const PhraseDictionary& dict, std::ostream* out,
                        std::vector<char>& obuf) {
    expand_stack_.clear();
    expand_stack_.push_back(root);
    std::uint64_t n = 0;
    while (!expand_stack_.empty()) {
      Code c = expand_stack_.back();
      expand_stack_.pop_back();
      if (is_terminal(c, dict.sigma())) {
        obuf.push_back(static_cast<char>(static_cast<unsigned char>(c)));
        if (obuf.size() >= kOutBufCap) flush_(out, obuf);
        ++n;
        continue;
      }
      const PhraseDictionary::Rule* r = dict.find(c);
      if (!r) throw CorruptStreamError("broken closure");
      expand_stack_.push_back(r->y);
      expand_stack_.push_back(r->x);
    }
    return n;
  }

  static void flush_(std::ostream* out, std::vector<char>& obuf) {
    if (out && !obuf.empty()) {
      out->write(obuf.data(), static_cast<std::streamsize>(obuf.size()));
      if (!*out) throw IoError("write failure");
    }
    obuf.clear();
  }

  double alpha_;
  BoundaryHook hook_;
  ContainerHeader header_{};
  std::vector<Code> expand_stack_;
};

inline DecompressStats decompress_stream(std::istream& in, std::ostream& out,
                                         double alpha = 1.0) {
  Decompressor d(alpha);
  return d.run(in, &out);
}

}  // namespace grc
