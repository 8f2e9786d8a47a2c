#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "trajexit/error.hpp"

namespace trajexit {

/// Detection heads of a three-scale detector, finest resolution first.
enum class Head : std::uint8_t { P3 = 0, P4 = 1, P5 = 2 };

inline constexpr std::array<Head, 3> kAllHeads = {Head::P3, Head::P4, Head::P5};

inline constexpr std::string_view to_string(Head h) {
  switch (h) {
    case Head::P3: return "P3";
    case Head::P4: return "P4";
    case Head::P5: return "P5";
  }
  return "?";
}

inline std::optional<Head> parse_head(std::string_view s) {
  for (Head h : kAllHeads) {
    if (s == to_string(h)) return h;
  }
  return std::nullopt;
}

inline Head head_or_throw(std::string_view s) {
  if (auto h = parse_head(s)) return *h;
  throw InputError("unknown head '" + std::string(s) + "'");
}

/// A subset of {P3, P4, P5}, stored as a bitmask.
class HeadSet {
 public:
  constexpr HeadSet() = default;
  constexpr HeadSet(std::initializer_list<Head> heads) {
    for (Head h : heads) bits_ |= bit(h);
  }

  static constexpr HeadSet all() { return HeadSet{Head::P3, Head::P4, Head::P5}; }

  constexpr bool contains(Head h) const { return (bits_ & bit(h)) != 0; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::size_t size() const {
    return static_cast<std::size_t>(((bits_ >> 0) & 1u) + ((bits_ >> 1) & 1u) + ((bits_ >> 2) & 1u));
  }
  constexpr bool is_subset_of(HeadSet other) const { return (bits_ & ~other.bits_) == 0; }
  constexpr bool is_full() const { return bits_ == all().bits_; }

  constexpr HeadSet with(Head h) const {
    HeadSet s = *this;
    s.bits_ |= bit(h);
    return s;
  }

  std::vector<Head> heads() const {
    std::vector<Head> out;
    for (Head h : kAllHeads) {
      if (contains(h)) out.push_back(h);
    }
    return out;
  }

  constexpr std::uint8_t bits() const { return bits_; }

  friend constexpr bool operator==(HeadSet, HeadSet) = default;

 private:
  static constexpr std::uint8_t bit(Head h) { return static_cast<std::uint8_t>(1u << static_cast<unsigned>(h)); }
  std::uint8_t bits_ = 0;
};

/// Renders as `P3`, `P3|P4|P5`, ... in head order; the empty set renders as "".
inline std::string to_string(HeadSet s) {
  std::string out;
  for (Head h : s.heads()) {
    if (!out.empty()) out += '|';
    out += to_string(h);
  }
  return out;
}

/// Inverse of to_string(HeadSet). Rejects unknown or repeated heads.
inline HeadSet parse_head_set(std::string_view s) {
  HeadSet out;
  while (!s.empty()) {
    auto bar = s.find('|');
    auto token = s.substr(0, bar);
    Head h = head_or_throw(token);
    if (out.contains(h)) throw InputError("head '" + std::string(token) + "' listed twice");
    out = out.with(h);
    if (bar == std::string_view::npos) break;
    s.remove_prefix(bar + 1);
    if (s.empty()) throw InputError("trailing '|' in head set");
  }
  return out;
}

}  // namespace trajexit
