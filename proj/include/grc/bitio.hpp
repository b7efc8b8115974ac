#pragma once

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <vector>

#include "grc/common.hpp"

namespace grc {

namespace detail {
inline constexpr std::uint64_t low_mask(std::uint32_t w) {
  return w >= 64 ? ~0ull : (1ull << w) - 1;
}
}  // namespace detail

// Growable bit string. Bits live MSB-first inside 64-bit words so whole
// subtrees can be spliced together with shifts instead of per-bit work.
class BitBuffer {
 public:
  void push_bit(bool b) { push_bits(b ? 1 : 0, 1); }

  // Appends the low `width` bits of `value`, most significant first.
  void push_bits(std::uint64_t value, std::uint32_t width) {
    if (width == 0) return;
    value &= detail::low_mask(width);
    std::uint32_t used = nbits_ & 63;
    if (used == 0) words_.push_back(0);
    std::uint32_t space = 64 - used;
    if (width <= space) {
      words_.back() |= value << (space - width);
    } else {
      words_.back() |= value >> (width - space);
      words_.push_back(value << (64 - (width - space)));
    }
    nbits_ += width;
  }

  void append(const BitBuffer& other) {
    if (other.nbits_ == 0) return;
    std::uint32_t used = nbits_ & 63;
    if (used == 0) {
      words_.insert(words_.end(), other.words_.begin(), other.words_.end());
      nbits_ += other.nbits_;
      return;
    }
    std::uint32_t space = 64 - used;
    for (std::size_t i = 0; i + 1 < other.words_.size(); ++i)
      push_word_(other.words_[i], space);
    std::uint32_t tail = ((other.nbits_ - 1) & 63) + 1;  // bits in last word
    std::uint64_t last = other.words_.back() >> (64 - tail);
    push_bits(last, tail);
  }

  std::uint64_t size_bits() const { return nbits_; }
  bool empty() const { return nbits_ == 0; }
  void clear() {
    words_.clear();
    nbits_ = 0;
  }

  // f(word, bits_in_word) over full words then the partial tail.
  template <class F>
  void for_each_chunk(F&& f) const {
    if (nbits_ == 0) return;
    for (std::size_t i = 0; i + 1 < words_.size(); ++i) f(words_[i], 64u);
    std::uint32_t tail = ((nbits_ - 1) & 63) + 1;
    f(words_.back() >> (64 - tail), tail);
  }

 private:
  // Append a full 64-bit word when the write head is mid-word.
  void push_word_(std::uint64_t w, std::uint32_t space) {
    words_.back() |= w >> (64 - space);
    words_.push_back(w << space);
    nbits_ += 64;
  }

  std::vector<std::uint64_t> words_;
  std::uint64_t nbits_ = 0;
};

// MSB-first bit sink over an ostream.
class BitWriter {
 public:
  explicit BitWriter(std::ostream& out) : out_(out) { buf_.reserve(kChunk); }

  void put_bits(std::uint64_t value, std::uint32_t width) {
    if (width == 0) return;
    puts_ += width;
    value &= detail::low_mask(width);
    std::uint32_t space = 64 - acc_bits_;
    if (width < space) {
      acc_ |= value << (space - width);
      acc_bits_ += width;
      return;
    }
    acc_ |= value >> (width - space);
    flush_acc_();
    std::uint32_t rest = width - space;
    if (rest) {
      acc_ = value << (64 - rest);
      acc_bits_ = rest;
    }
  }

  void put_bit(bool b) { put_bits(b ? 1 : 0, 1); }

  void append(const BitBuffer& bits) {
    bits.for_each_chunk([this](std::uint64_t w, std::uint32_t n) { put_bits(w, n); });
  }

  // Zero-pads to a byte boundary and flushes. The writer stays usable only
  // for byte-aligned payloads afterwards; we only call it once at the end.
  void finish() {
    std::uint64_t payload = puts_;
    while (acc_bits_ & 7) put_bit(false);
    puts_ = payload;  // padding is framing, not payload
    while (acc_bits_ >= 8) {
      buf_.push_back(static_cast<char>(acc_ >> 56));
      acc_ <<= 8;
      acc_bits_ -= 8;
    }
    drain_();
    out_.flush();
    if (!out_) throw IoError("write failure");
  }

  // Payload bits accepted so far; final padding is never counted.
  std::uint64_t bits_written() const { return puts_; }

 private:
  static constexpr std::size_t kChunk = 1 << 16;

  void flush_acc_() {
    for (int i = 7; i >= 0; --i) buf_.push_back(static_cast<char>(acc_ >> (8 * i)));
    acc_ = 0;
    acc_bits_ = 0;
    if (buf_.size() >= kChunk) drain_();
  }

  void drain_() {
    if (buf_.empty()) return;
    out_.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
    if (!out_) throw IoError("write failure");
    buf_.clear();
  }

  std::ostream& out_;
  std::vector<char> buf_;
  std::uint64_t acc_ = 0;
  std::uint32_t acc_bits_ = 0;
  std::uint64_t puts_ = 0;
};

// MSB-first bit source over an istream.
class BitReader {
 public:
  explicit BitReader(std::istream& in) : in_(in) {}

  bool get_bit() {
    if (!ensure_(1)) throw CorruptStreamError("truncated stream");
    bool b = (buf_[pos_] >> (7 - bit_)) & 1;
    if (++bit_ == 8) {
      bit_ = 0;
      ++pos_;
    }
    return b;
  }

  std::uint64_t get_bits(std::uint32_t width) {
    std::uint64_t v = 0;
    for (std::uint32_t i = 0; i < width; ++i) v = (v << 1) | (get_bit() ? 1 : 0);
    return v;
  }

  // After a segment's closing bit: true when only zero padding remains,
  // false when another segment follows. Nonzero padding is corruption.
  bool at_clean_end() {
    if (bit_ != 0) {
      if (ensure_whole_byte_beyond_current_()) return false;
      unsigned rest = buf_[pos_] & ((1u << (8 - bit_)) - 1);
      if (rest != 0) throw CorruptStreamError("corrupt padding");
      return true;
    }
    return !ensure_(1);
  }

  std::uint64_t bits_consumed() const { return bits_consumed_base_ + pos_ * 8ull + bit_; }

 private:
  static constexpr std::size_t kChunk = 1 << 16;

  // Make sure the current byte exists (need >= 1 readable bit).
  bool ensure_(std::size_t) {
    if (pos_ < buf_.size()) return true;
    refill_();
    return pos_ < buf_.size();
  }

  // Is there any byte after the current (partially consumed) one?
  bool ensure_whole_byte_beyond_current_() {
    if (pos_ + 1 < buf_.size()) return true;
    refill_();
    return pos_ + 1 < buf_.size();
  }

  void refill_() {
    if (pos_ > 0) {
      // Keep the partially consumed byte, drop fully consumed ones.
      std::size_t keep = buf_.size() - pos_;
      std::memmove(buf_.data(), buf_.data() + pos_, keep);
      buf_.resize(keep);
      bits_consumed_base_ += pos_ * 8ull;
      pos_ = 0;
    }
    if (eof_) return;
    std::size_t old = buf_.size();
    buf_.resize(old + kChunk);
    in_.read(reinterpret_cast<char*>(buf_.data() + old), kChunk);
    std::size_t got = static_cast<std::size_t>(in_.gcount());
    buf_.resize(old + got);
    if (got < kChunk) {
      if (in_.bad()) throw IoError("read failure");
      eof_ = true;
    }
  }

  std::istream& in_;
  std::vector<unsigned char> buf_;
  std::size_t pos_ = 0;
  unsigned bit_ = 0;
  bool eof_ = false;
  std::uint64_t bits_consumed_base_ = 0;
};

}  // namespace grc
