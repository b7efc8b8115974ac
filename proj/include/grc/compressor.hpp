#pragma once

#include <cstdint>
#include <functional>
#include <istream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "grc/bitio.hpp"
#include "grc/codec.hpp"
#include "grc/common.hpp"
#include "grc/dictionary.hpp"
#include "grc/parser.hpp"
#include "grc/snapshot.hpp"
#include "grc/strategy.hpp"

namespace grc {

namespace detail {

// LEB128 over the slot label queues. Labels stay unsized until a segment
// serializes, when their stream positions (and so their widths) are final.
inline void push_label(std::string& out, Code v) {
  while (v >= 0x80) {
    out.push_back(static_cast<char>(v | 0x80));
    v >>= 7;
  }
  out.push_back(static_cast<char>(v));
}

inline Code pop_label(const char*& p, const char* end) {
  Code v = 0;
  for (unsigned shift = 0;; shift += 7) {
    if (p == end) throw InternalError("label queue underrun");
    unsigned char b = static_cast<unsigned char>(*p++);
    v |= static_cast<Code>(b & 0x7f) << shift;
    if (!(b & 0x80)) return v;
  }
}

}  // namespace detail

struct CompressStats {
  std::uint64_t bytes_in = 0;
  std::uint64_t bytes_out = 0;  // header plus padded payload
  std::uint64_t bits_out = 0;   // payload bits before padding
  std::uint64_t segments = 0;
  std::uint64_t rules_created = 0;  // cumulative, survives block resets
  std::uint64_t rules_live_peak = 0;
};

// One-shot streaming compressor: bytes in, container out. The boundary hook,
// when set, fires after each segment's prune with the post-prune snapshot
// and a read-only view of the live dictionary.
class Compressor {
 public:
  using BoundaryHook = std::function<void(const BoundarySnapshot&, const PhraseDictionary&)>;

  explicit Compressor(const StrategyConfig& cfg, double alpha = 1.0)
      : cfg_(cfg), dict_(kSigma, alpha), strat_(cfg), sink_{this}, parser_(sink_) {}

  void set_boundary_hook(BoundaryHook hook) { hook_ = std::move(hook); }

  const PhraseDictionary& dictionary() const { return dict_; }
  const StrategyState& strategy() const { return strat_; }

  CompressStats run(std::istream& in, std::ostream& out) {
    ContainerHeader::from_config(cfg_).write(out);
    BitWriter writer(out);
    writer_ = &writer;
    try {
      std::vector<char> buf(64 << 10);
      for (;;) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (in.bad()) throw IoError("read failure");
        std::streamsize got = in.gcount();
        if (got == 0) break;
        for (std::streamsize i = 0; i < got; ++i)
          feed_byte_(static_cast<unsigned char>(buf[i]));
        if (in.eof()) break;
      }
      // A flush on the final byte leaves nothing behind; only then is
      // skipping the drain legal (and an extra empty segment illegal).
      if (since_flush_ > 0) close_segment_();
      writer.finish();
    } catch (const IoError& e) {
      writer_ = nullptr;
      throw IoError(std::string(e.what()) + " at input byte " + std::to_string(stats_.bytes_in));
    }
    writer_ = nullptr;
    stats_.bits_out = writer.bits_written();
    stats_.bytes_out = ContainerHeader::kSize + (stats_.bits_out + 7) / 8;
    return stats_;
  }

 private:
  struct Sink {
    Compressor* c;
    Slot update(Slot a, Slot b) { return c->update_(std::move(a), std::move(b)); }
  };
  friend struct Sink;

  // The pairing engine announces one adjacent pair, in stream order. A known
  // digram collapses to a repeat leaf and its children's subtrees are
  // dropped; a new rule keeps both subtrees and closes them with a '1'.
  Slot update_(Slot a, Slot b) {
    auto r = dict_.lookup_or_create(a.code, b.code, strat_.counter_init());
    Slot out;
    out.code = r.code;
    if (!r.created) {
      // A first occurrence can never be the repeat: the rule it would
      // repeat is itself. Its counter bump must be undone for children
      // whose leaf now never reaches the stream.
      if (a.fresh || b.fresh) throw InternalError("repeat consumed a first occurrence");
      if (!is_terminal(a.code, dict_.sigma())) dict_.cancel_hit(a.code);
      if (!is_terminal(b.code, dict_.sigma())) dict_.cancel_hit(b.code);
      out.leaves = 1;
      out.shape.push_bit(false);
      detail::push_label(out.labels, out.code);
      return out;
    }
    ++stats_.rules_created;
    if (dict_.live_count() > stats_.rules_live_peak) stats_.rules_live_peak = dict_.live_count();
    out.fresh = true;
    out.leaves = a.leaves + b.leaves;
    out.internals = a.internals + b.internals + 1;
    out.shape = std::move(a.shape);
    out.shape.append(b.shape);
    out.shape.push_bit(true);
    out.labels = std::move(a.labels);
    out.labels += b.labels;
    return out;
  }

  void feed_byte_(unsigned char byte) {
    Slot s;
    s.code = byte;
    s.leaves = 1;
    s.shape.push_bit(false);
    detail::push_label(s.labels, byte);
    parser_.feed(std::move(s));
    strat_.note_byte();
    ++stats_.bytes_in;
    ++since_flush_;
    if (strat_.should_flush(dict_.live_count())) close_segment_();
  }

  void close_segment_() {
    Slot root = parser_.drain();
    if (root.leaves != root.internals + 1) throw InternalError("segment framing broken");
    // Width replay: each '1' in the shape is one rule creation, in stream
    // order, so walking it recovers the exact rule count the decoder will
    // hold in front of every leaf. Labels take their widths only here.
    std::uint64_t created = dict_.created_count() - root.internals;
    const char* lp = root.labels.data();
    const char* lend = lp + root.labels.size();
    root.shape.for_each_chunk([&](std::uint64_t w, std::uint32_t n) {
      for (std::uint32_t i = 0; i < n; ++i) {
        if ((w >> (n - 1 - i)) & 1) {
          writer_->put_bit(true);
          ++created;
        } else {
          writer_->put_bit(false);
          Code label = detail::pop_label(lp, lend);
          writer_->put_bits(label, label_width(dict_.sigma(), created));
        }
      }
    });
    if (lp != lend || created != dict_.created_count())
      throw InternalError("segment label accounting broken");
    writer_->put_bit(true);  // virtual node closes the segment
    ++stats_.segments;
    since_flush_ = 0;
    strat_.prune(dict_);
    if (hook_) hook_(take_snapshot(dict_, stats_.segments, stats_.bytes_in), dict_);
  }

  StrategyConfig cfg_;
  PhraseDictionary dict_;
  StrategyState strat_;
  Sink sink_;
  Parser<Sink> parser_;
  CompressStats stats_;
  BitWriter* writer_ = nullptr;
  BoundaryHook hook_;
  std::uint64_t since_flush_ = 0;
};

inline CompressStats compress_stream(std::istream& in, std::ostream& out,
                                     const StrategyConfig& cfg, double alpha = 1.0) {
  Compressor c(cfg, alpha);
  return c.run(in, out);
}

}  // namespace grc
