/*!
 *  Copyright (c) 2026 by Contributors
 * \file gmask/byte_set.hpp
 * \brief Fixed 256-bit byte sets and terminal sets (bytes plus end marker).
 */
#pragma once

#include <array>
#include <cstdint>
#include <cstddef>
#include <string>

namespace gmask {

/*! \brief A set of byte values 0..255 stored as four 64-bit words. */
struct ByteSet {
  std::array<uint64_t, 4> words{0, 0, 0, 0};

  static ByteSet Single(uint8_t b) {
    ByteSet s;
    s.Set(b);
    return s;
  }

  void Set(uint8_t b) { words[b >> 6] |= uint64_t{1} << (b & 63); }
  void Reset(uint8_t b) { words[b >> 6] &= ~(uint64_t{1} << (b & 63)); }
  bool Test(uint8_t b) const { return (words[b >> 6] >> (b & 63)) & 1; }

  void Clear() { words = {0, 0, 0, 0}; }

  bool Empty() const {
    return (words[0] | words[1] | words[2] | words[3]) == 0;
  }

  int Count() const {
    int n = 0;
    for (uint64_t w : words) n += __builtin_popcountll(w);
    return n;
  }

  ByteSet& operator|=(const ByteSet& o) {
    for (size_t i = 0; i < 4; ++i) words[i] |= o.words[i];
    return *this;
  }
  ByteSet& operator&=(const ByteSet& o) {
    for (size_t i = 0; i < 4; ++i) words[i] &= o.words[i];
    return *this;
  }

  friend ByteSet operator|(ByteSet a, const ByteSet& b) { return a |= b; }
  friend ByteSet operator&(ByteSet a, const ByteSet& b) { return a &= b; }
  friend bool operator==(const ByteSet& a, const ByteSet& b) { return a.words == b.words; }
  friend bool operator!=(const ByteSet& a, const ByteSet& b) { return !(a == b); }

  /*! \brief Invokes fn(byte) for every member in ascending order. */
  template <typename Fn>
  void ForEach(Fn&& fn) const {
    for (int w = 0; w < 4; ++w) {
      uint64_t bits = words[w];
      while (bits) {
        int bit = __builtin_ctzll(bits);
        fn(static_cast<uint8_t>((w << 6) | bit));
        bits &= bits - 1;
      }
    }
  }

  /*! \brief 64 lowercase hex chars, low nibble of words[0] first. */
  std::string ToHex() const;
  static ByteSet FromHex(const std::string& hex);  // throws std::invalid_argument
};

/*!
 * \brief A set over the runtime terminal alphabet: bytes 0..255, the $ end
 * marker, and (in FIRST-set contexts only) the empty-string marker.
 */
struct TerminalSet {
  ByteSet bytes;
  bool end_marker = false;
  bool epsilon = false;

  bool Empty() const { return bytes.Empty() && !end_marker && !epsilon; }

  int Count() const { return bytes.Count() + (end_marker ? 1 : 0) + (epsilon ? 1 : 0); }

  /*! \brief Unions bytes and $ from o; never propagates epsilon. */
  bool MergeTerminals(const TerminalSet& o) {
    bool changed = false;
    for (size_t i = 0; i < 4; ++i) {
      uint64_t before = bytes.words[i];
      bytes.words[i] |= o.bytes.words[i];
      changed |= bytes.words[i] != before;
    }
    if (o.end_marker && !end_marker) {
      end_marker = true;
      changed = true;
    }
    return changed;
  }

  friend bool operator==(const TerminalSet& a, const TerminalSet& b) {
    return a.bytes == b.bytes && a.end_marker == b.end_marker && a.epsilon == b.epsilon;
  }
  friend bool operator!=(const TerminalSet& a, const TerminalSet& b) { return !(a == b); }
};

}  // namespace gmask
