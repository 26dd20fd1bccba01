#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qsa {

/// Fixed-length bit string. Bit 0 is the least significant bit; the textual
/// form puts bit `size() - 1` leftmost, so "1001" has bits 0 and 3 set.
///
/// Bits are packed into 64-bit words. Strings of up to 64 bits occupy a
/// single word, which is what the parity-heavy paths rely on.
class BitString {
 public:
  /// All-zero string of `length` bits. `length` must be positive.
  explicit BitString(std::size_t length);

  static BitString zeros(std::size_t length) { return BitString(length); }
  static BitString ones(std::size_t length);
  /// Low `length` bits of `value`; higher bits of `value` must be clear.
  static BitString from_uint(std::uint64_t value, std::size_t length);
  /// Parses MSB-left text such as "1001". Rejects empty input and any
  /// character other than '0' or '1'.
  static BitString parse(std::string_view text);
  /// Concatenation with `parts.front()` in the most significant position.
  static BitString concat(std::span<const BitString> parts);

  std::size_t size() const { return length_; }
  bool operator[](std::size_t index) const;
  bool test(std::size_t index) const;  // bounds-checked
  void set(std::size_t index, bool value);

  bool is_zero() const;
  std::size_t popcount() const;
  /// Bits [offset, offset + length) as a new string.
  BitString slice(std::size_t offset, std::size_t length) const;
  /// Value as an integer; requires size() <= 64.
  std::uint64_t to_uint() const;
  std::string to_string() const;

  std::span<const std::uint64_t> words() const { return words_; }

  BitString& operator^=(const BitString& other);
  friend BitString operator^(BitString lhs, const BitString& rhs) {
    lhs ^= rhs;
    return lhs;
  }

  friend bool operator==(const BitString&, const BitString&) = default;
  /// Shorter strings order first; equal lengths compare numerically, which
  /// for MSB-left text coincides with lexicographic order.
  friend std::strong_ordering operator<=>(const BitString& lhs, const BitString& rhs);

 private:
  void clear_padding();

  std::size_t length_;
  std::vector<std::uint64_t> words_;
};

/// Agreed ordering and lengths of the agents' partial keys. Agent 0's key
/// occupies the least significant bits of the complete secret.
class KeyLayout {
 public:
  explicit KeyLayout(std::vector<std::size_t> lengths);
  /// Near-even split of `total` bits over `agents` agents; the lower-indexed
  /// agents receive the remainder.
  static KeyLayout even(std::size_t agents, std::size_t total);
  static KeyLayout parse(std::string_view csv);

  std::size_t agents() const { return lengths_.size(); }
  std::size_t total_length() const { return total_; }
  std::size_t length(std::size_t agent) const { return lengths_.at(agent); }
  /// Number of bits below agent `agent`'s key: |p_{agent-1}| + ... + |p_0|.
  std::size_t offset(std::size_t agent) const { return offsets_.at(agent); }
  std::span<const std::size_t> lengths() const { return lengths_; }
  std::string to_string() const;

  friend bool operator==(const KeyLayout&, const KeyLayout&) = default;

 private:
  std::vector<std::size_t> lengths_;
  std::vector<std::size_t> offsets_;
  std::size_t total_ = 0;
};

BitString xor_bits(const BitString& a, const BitString& b);

/// z_{m-1} x_{m-1} xor ... xor z_0 x_0.
bool inner_product_mod2(const BitString& z, const BitString& x);

/// Places `partial` at its agent's slot in an otherwise zero string of the
/// layout's total length.
BitString extend_partial_key(const BitString& partial, const KeyLayout& layout,
                             std::size_t agent_index);

/// a xor y_{n-2} xor ... xor y_0.
BitString reconstruct_secret(const BitString& a, std::span<const BitString> ys);

/// XOR of all extended partial keys, i.e. the complete secret.
BitString complete_secret(const KeyLayout& layout, std::span<const BitString> partial_keys);

}  // namespace qsa

template <>
struct std::hash<qsa::BitString> {
  std::size_t operator()(const qsa::BitString& bits) const noexcept;
};
