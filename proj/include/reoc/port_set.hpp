#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace reoc {

/// Fixed-universe bitset over port indices of one automaton.
class PortSet {
public:
  PortSet() = default;
  explicit PortSet(std::size_t universe) : words_((universe + 63) / 64, 0) {}

  void set(std::size_t i) { words_[i / 64] |= (uint64_t{1} << (i % 64)); }
  void reset(std::size_t i) { words_[i / 64] &= ~(uint64_t{1} << (i % 64)); }
  [[nodiscard]] bool test(std::size_t i) const {
    return i / 64 < words_.size() && ((words_[i / 64] >> (i % 64)) & 1u) != 0;
  }

  [[nodiscard]] bool empty() const {
    for (auto w : words_)
      if (w != 0) return false;
    return true;
  }

  [[nodiscard]] std::size_t count() const {
    std::size_t n = 0;
    for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
  }

  [[nodiscard]] bool intersects(const PortSet& o) const {
    for (std::size_t i = 0; i < words_.size() && i < o.words_.size(); ++i)
      if ((words_[i] & o.words_[i]) != 0) return true;
    return false;
  }

  [[nodiscard]] bool contains_all(const PortSet& o) const {
    for (std::size_t i = 0; i < o.words_.size(); ++i) {
      uint64_t mine = i < words_.size() ? words_[i] : 0;
      if ((o.words_[i] & ~mine) != 0) return false;
    }
    return true;
  }

  PortSet& operator|=(const PortSet& o) {
    if (o.words_.size() > words_.size()) words_.resize(o.words_.size(), 0);
    for (std::size_t i = 0; i < o.words_.size(); ++i) words_[i] |= o.words_[i];
    return *this;
  }
  PortSet& operator&=(const PortSet& o) {
    for (std::size_t i = 0; i < words_.size(); ++i)
      words_[i] &= i < o.words_.size() ? o.words_[i] : 0;
    return *this;
  }
  PortSet& subtract(const PortSet& o) {
    for (std::size_t i = 0; i < words_.size() && i < o.words_.size(); ++i)
      words_[i] &= ~o.words_[i];
    return *this;
  }

  friend PortSet operator|(PortSet a, const PortSet& b) { return a |= b; }
  friend PortSet operator&(PortSet a, const PortSet& b) { return a &= b; }

  /// Ascending member indices.
  [[nodiscard]] std::vector<uint32_t> members() const {
    std::vector<uint32_t> out;
    for (std::size_t w = 0; w < words_.size(); ++w) {
      uint64_t bits = words_[w];
      while (bits != 0) {
        out.push_back(static_cast<uint32_t>(w * 64 + std::countr_zero(bits)));
        bits &= bits - 1;
      }
    }
    return out;
  }

  /// Lexicographic order on the ascending member sequences.
  friend bool lex_less(const PortSet& a, const PortSet& b) {
    // The sequences agree below the least element of the symmetric
    // difference d; the set holding d is smaller unless it ends there.
    std::size_t n = std::max(a.words_.size(), b.words_.size());
    for (std::size_t i = 0; i < n; ++i) {
      uint64_t x = i < a.words_.size() ? a.words_[i] : 0;
      uint64_t y = i < b.words_.size() ? b.words_[i] : 0;
      uint64_t diff = x ^ y;
      if (diff == 0) continue;
      int bit = std::countr_zero(diff);
      const PortSet& holder = ((x >> bit) & 1u) != 0 ? a : b;
      const PortSet& other = &holder == &a ? b : a;
      bool other_continues = other.any_above(i * 64 + static_cast<std::size_t>(bit));
      return &holder == &a ? other_continues : !other_continues;
    }
    return false;
  }

  /// True if some member is strictly greater than `i`.
  [[nodiscard]] bool any_above(std::size_t i) const {
    std::size_t w = i / 64;
    if (w >= words_.size()) return false;
    unsigned shift = static_cast<unsigned>(i % 64) + 1;
    uint64_t rest = shift == 64 ? 0 : (words_[w] >> shift);
    if (rest != 0) return true;
    for (std::size_t j = w + 1; j < words_.size(); ++j)
      if (words_[j] != 0) return true;
    return false;
  }

  friend bool operator==(const PortSet& a, const PortSet& b) {
    std::size_t n = std::max(a.words_.size(), b.words_.size());
    for (std::size_t i = 0; i < n; ++i) {
      uint64_t x = i < a.words_.size() ? a.words_[i] : 0;
      uint64_t y = i < b.words_.size() ? b.words_[i] : 0;
      if (x != y) return false;
    }
    return true;
  }

  [[nodiscard]] std::size_t hash() const {
    std::size_t h = 0xcbf29ce484222325ull;
    std::size_t last = words_.size();
    while (last > 0 && words_[last - 1] == 0) --last;
    for (std::size_t i = 0; i < last; ++i) h = (h ^ words_[i]) * 0x100000001b3ull;
    return h;
  }

private:
  std::vector<uint64_t> words_;
};

struct PortSetHash {
  std::size_t operator()(const PortSet& s) const { return s.hash(); }
};

}  // namespace reoc
