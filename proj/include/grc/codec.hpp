#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <ostream>

#include "grc/bitio.hpp"
#include "grc/common.hpp"
#include "grc/strategy.hpp"

namespace grc {

// Leaf labels are written with just enough bits for every code alive at that
// point in the stream; both ends track created-rule counts, so the width
// needs no side channel.
inline std::uint32_t label_width(std::uint32_t sigma, std::uint64_t created_so_far) {
  std::uint32_t w = ceil_log2(static_cast<std::uint64_t>(sigma) + created_so_far);
  return w == 0 ? 1 : w;
}

// 36-byte little-endian container header:
//   0  magic "GRC1"
//   4  version (1)
//   5  mode
//   6  sigma (u16)
//   8  k (u64)
//   16 eps in percent*10^4 (u32)
//   20 interval length (u64)
//   28 original length (u64, 0 = unknown)
// Parameters a mode does not use are zero.
struct ContainerHeader {
  static constexpr std::size_t kSize = 36;
  static constexpr char kMagic[4] = {'G', 'R', 'C', '1'};
  static constexpr std::size_t kOriginalLengthOffset = 28;

  Mode mode = Mode::plain;
  std::uint32_t sigma = kSigma;
  std::uint64_t k = 0;
  std::uint32_t eps_ppm = 0;
  std::uint64_t ell = 0;
  std::uint64_t original_length = 0;

  static ContainerHeader from_config(const StrategyConfig& cfg) {
    ContainerHeader h;
    h.mode = cfg.mode;
    h.k = cfg.k;
    h.eps_ppm = cfg.eps_ppm;
    h.ell = cfg.ell;
    return h;
  }

  StrategyConfig to_config() const { return StrategyConfig{mode, k, eps_ppm, ell}; }

  void write(std::ostream& out) const {
    std::array<unsigned char, kSize> b{};
    b[0] = 'G'; b[1] = 'R'; b[2] = 'C'; b[3] = '1';
    b[4] = 1;
    b[5] = static_cast<unsigned char>(mode);
    put_le_(b.data() + 6, sigma, 2);
    put_le_(b.data() + 8, k, 8);
    put_le_(b.data() + 16, eps_ppm, 4);
    put_le_(b.data() + 20, ell, 8);
    put_le_(b.data() + 28, original_length, 8);
    out.write(reinterpret_cast<const char*>(b.data()), kSize);
    if (!out) throw IoError("write failure");
  }

  static ContainerHeader read(std::istream& in) {
    std::array<unsigned char, kSize> b{};
    in.read(reinterpret_cast<char*>(b.data()), kSize);
    if (in.gcount() != static_cast<std::streamsize>(kSize))
      throw CorruptStreamError("truncated header");
    if (b[0] != 'G' || b[1] != 'R' || b[2] != 'C' || b[3] != '1')
      throw CorruptStreamError("bad magic");
    if (b[4] != 1) throw CorruptStreamError("unsupported version");
    if (b[5] > 3) throw CorruptStreamError("unknown mode");
    ContainerHeader h;
    h.mode = static_cast<Mode>(b[5]);
    h.sigma = static_cast<std::uint32_t>(get_le_(b.data() + 6, 2));
    h.k = get_le_(b.data() + 8, 8);
    h.eps_ppm = static_cast<std::uint32_t>(get_le_(b.data() + 16, 4));
    h.ell = get_le_(b.data() + 20, 8);
    h.original_length = get_le_(b.data() + 28, 8);
    if (h.sigma != kSigma) throw CorruptStreamError("unsupported alphabet size");
    try {
      h.to_config().validate();
    } catch (const std::invalid_argument& e) {
      throw CorruptStreamError(std::string("bad header parameters: ") + e.what());
    }
    switch (h.mode) {
      case Mode::plain:
        if (h.k || h.eps_ppm || h.ell) throw CorruptStreamError("bad header parameters: plain takes none");
        break;
      case Mode::freq:
        if (h.ell) throw CorruptStreamError("bad header parameters: freq takes no interval");
        break;
      case Mode::lossy:
      case Mode::block:
        if (h.k || h.eps_ppm) throw CorruptStreamError("bad header parameters: interval modes take no k/eps");
        break;
    }
    return h;
  }

 private:
  static void put_le_(unsigned char* p, std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) p[i] = static_cast<unsigned char>(v >> (8 * i));
  }
  static std::uint64_t get_le_(const unsigned char* p, int n) {
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
  }
};

// Writes the now-known input length into an already-written header. Returns
// false when the sink cannot seek (pipes), leaving the field's 0 = unknown.
inline bool patch_original_length(std::ostream& out, std::uint64_t length) {
  out.flush();
  if (!out) throw IoError("write failure");
  std::ostream::pos_type end = out.tellp();
  if (end == std::ostream::pos_type(-1)) {
    out.clear();
    return false;
  }
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(length >> (8 * i));
  out.seekp(static_cast<std::streamoff>(ContainerHeader::kOriginalLengthOffset));
  out.write(reinterpret_cast<const char*>(b), 8);
  out.seekp(end);
  if (!out) throw IoError("header patch failure");
  return true;
}

// Pulls one event at a time out of the interleaved structure/label stream.
// A '1' that returns the running leaf-minus-internal balance to zero is the
// segment's virtual close, not a rule.
class EventReader {
 public:
  enum class Kind { leaf, internal, segment_end, end_of_stream };
  struct Event {
    Kind kind;
    Code label = 0;
  };

  explicit EventReader(std::istream& in) : bits_(in) {}

  Event next(std::uint32_t sigma, std::uint64_t created_so_far) {
    if (balance_ == 0) {
      if (bits_.at_clean_end()) return {Kind::end_of_stream};
      seg_leaves_ = 0;
      seg_internals_ = 0;
    }
    bool b = bits_.get_bit();
    if (!b) {
      Code label = bits_.get_bits(label_width(sigma, created_so_far));
      ++balance_;
      ++seg_leaves_;
      return {Kind::leaf, label};
    }
    if (balance_ == 0) throw CorruptStreamError("internal node before any leaf");
    if (--balance_ == 0) return {Kind::segment_end};
    ++seg_internals_;
    return {Kind::internal};
  }

  // Counts for the segment most recently read (valid after segment_end).
  std::uint64_t segment_leaves() const { return seg_leaves_; }
  std::uint64_t segment_internals() const { return seg_internals_; }

  std::uint64_t bits_consumed() const { return bits_.bits_consumed(); }

 private:
  BitReader bits_;
  std::uint64_t balance_ = 0;
  std::uint64_t seg_leaves_ = 0;
  std::uint64_t seg_internals_ = 0;
};

}  // namespace grc
