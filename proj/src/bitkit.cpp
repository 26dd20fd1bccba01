#include "qsa/bitkit.hpp"

#include <bit>
#include <charconv>
#include <stdexcept>

namespace qsa {

namespace {

constexpr std::size_t kWordBits = 64;

std::size_t word_count(std::size_t length) { return (length + kWordBits - 1) / kWordBits; }

void require_same_length(const BitString& a, const BitString& b, const char* what) {
  if (a.size() != b.size()) {
    throw std::invalid_argument(std::string(what) + ": length mismatch (" +
                                std::to_string(a.size()) + " vs " + std::to_string(b.size()) +
                                ")");
  }
}

}  // namespace

BitString::BitString(std::size_t length) : length_(length), words_(word_count(length), 0) {
  if (length == 0) {
    throw std::invalid_argument("BitString length must be positive");
  }
}

BitString BitString::ones(std::size_t length) {
  BitString out(length);
  for (auto& w : out.words_) {
    w = ~std::uint64_t{0};
  }
  out.clear_padding();
  return out;
}

BitString BitString::from_uint(std::uint64_t value, std::size_t length) {
  BitString out(length);
  if (length < kWordBits && (value >> length) != 0) {
    throw std::invalid_argument("value " + std::to_string(value) + " does not fit in " +
                                std::to_string(length) + " bits");
  }
  out.words_[0] = value;
  return out;
}

BitString BitString::parse(std::string_view text) {
  if (text.empty()) {
    throw std::invalid_argument("empty bit string");
  }
  BitString out(text.size());
  for (std::size_t k = 0; k < text.size(); ++k) {
    char c = text[text.size() - 1 - k];
    if (c != '0' && c != '1') {
      throw std::invalid_argument("non-binary character in bit string '" + std::string(text) + "'");
    }
    out.set(k, c == '1');
  }
  return out;
}

BitString BitString::concat(std::span<const BitString> parts) {
  std::size_t total = 0;
  for (const auto& p : parts) {
    total += p.size();
  }
  BitString out(total);
  std::size_t pos = 0;
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
    for (std::size_t k = 0; k < it->size(); ++k) {
      if ((*it)[k]) {
        out.set(pos + k, true);
      }
    }
    pos += it->size();
  }
  return out;
}

bool BitString::operator[](std::size_t index) const {
  return (words_[index / kWordBits] >> (index % kWordBits)) & 1U;
}

bool BitString::test(std::size_t index) const {
  if (index >= length_) {
    throw std::out_of_range("bit index " + std::to_string(index) + " out of range");
  }
  return (*this)[index];
}

void BitString::set(std::size_t index, bool value) {
  if (index >= length_) {
    throw std::out_of_range("bit index " + std::to_string(index) + " out of range");
  }
  std::uint64_t mask = std::uint64_t{1} << (index % kWordBits);
  if (value) {
    words_[index / kWordBits] |= mask;
  } else {
    words_[index / kWordBits] &= ~mask;
  }
}

bool BitString::is_zero() const {
  for (auto w : words_) {
    if (w != 0) {
      return false;
    }
  }
  return true;
}

std::size_t BitString::popcount() const {
  std::size_t total = 0;
  for (auto w : words_) {
    total += static_cast<std::size_t>(std::popcount(w));
  }
  return total;
}

BitString BitString::slice(std::size_t offset, std::size_t length) const {
  if (offset + length > length_) {
    throw std::out_of_range("slice exceeds bit string length");
  }
  BitString out(length);
  for (std::size_t k = 0; k < length; ++k) {
    if ((*this)[offset + k]) {
      out.set(k, true);
    }
  }
  return out;
}

std::uint64_t BitString::to_uint() const {
  if (length_ > kWordBits) {
    throw std::length_error("bit string longer than 64 bits");
  }
  return words_[0];
}

std::string BitString::to_string() const {
  std::string out(length_, '0');
  for (std::size_t k = 0; k < length_; ++k) {
    if ((*this)[k]) {
      out[length_ - 1 - k] = '1';
    }
  }
  return out;
}

BitString& BitString::operator^=(const BitString& other) {
  require_same_length(*this, other, "xor");
  for (std::size_t w = 0; w < words_.size(); ++w) {
    words_[w] ^= other.words_[w];
  }
  return *this;
}

std::strong_ordering operator<=>(const BitString& lhs, const BitString& rhs) {
  if (auto c = lhs.length_ <=> rhs.length_; c != 0) {
    return c;
  }
  for (std::size_t w = lhs.words_.size(); w-- > 0;) {
    if (auto c = lhs.words_[w] <=> rhs.words_[w]; c != 0) {
      return c;
    }
  }
  return std::strong_ordering::equal;
}

void BitString::clear_padding() {
  std::size_t tail = length_ % kWordBits;
  if (tail != 0) {
    words_.back() &= (std::uint64_t{1} << tail) - 1;
  }
}

KeyLayout::KeyLayout(std::vector<std::size_t> lengths) : lengths_(std::move(lengths)) {
  if (lengths_.empty()) {
    throw std::invalid_argument("key layout needs at least one agent");
  }
  offsets_.reserve(lengths_.size());
  for (auto len : lengths_) {
    if (len == 0) {
      throw std::invalid_argument("partial key lengths must be at least 1");
    }
    offsets_.push_back(total_);
    total_ += len;
  }
}

KeyLayout KeyLayout::even(std::size_t agents, std::size_t total) {
  if (agents == 0 || total < agents) {
    throw std::invalid_argument("cannot split " + std::to_string(total) + " bits over " +
                                std::to_string(agents) + " agents with every key non-empty");
  }
  std::vector<std::size_t> lengths(agents, total / agents);
  for (std::size_t i = 0; i < total % agents; ++i) {
    ++lengths[i];
  }
  return KeyLayout(std::move(lengths));
}

KeyLayout KeyLayout::parse(std::string_view csv) {
  std::vector<std::size_t> lengths;
  std::size_t start = 0;
  while (start <= csv.size()) {
    std::size_t end = csv.find(',', start);
    if (end == std::string_view::npos) {
      end = csv.size();
    }
    std::string_view field = csv.substr(start, end - start);
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
      throw std::invalid_argument("malformed key length list '" + std::string(csv) + "'");
    }
    lengths.push_back(value);
    start = end + 1;
  }
  return KeyLayout(std::move(lengths));
}

std::string KeyLayout::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < lengths_.size(); ++i) {
    if (i != 0) {
      out += ',';
    }
    out += std::to_string(lengths_[i]);
  }
  return out;
}

BitString xor_bits(const BitString& a, const BitString& b) { return a ^ b; }

bool inner_product_mod2(const BitString& z, const BitString& x) {
  require_same_length(z, x, "inner_product_mod2");
  std::uint64_t acc = 0;
  auto zw = z.words();
  auto xw = x.words();
  for (std::size_t w = 0; w < zw.size(); ++w) {
    acc ^= zw[w] & xw[w];
  }
  return std::popcount(acc) & 1;
}

BitString extend_partial_key(const BitString& partial, const KeyLayout& layout,
                             std::size_t agent_index) {
  if (agent_index >= layout.agents()) {
    throw std::out_of_range("agent index " + std::to_string(agent_index) + " out of range for " +
                            std::to_string(layout.agents()) + " agents");
  }
  if (partial.size() != layout.length(agent_index)) {
    throw std::invalid_argument("partial key of agent " + std::to_string(agent_index) +
                                " has length " + std::to_string(partial.size()) + ", layout says " +
                                std::to_string(layout.length(agent_index)));
  }
  BitString out(layout.total_length());
  std::size_t offset = layout.offset(agent_index);
  for (std::size_t k = 0; k < partial.size(); ++k) {
    if (partial[k]) {
      out.set(offset + k, true);
    }
  }
  return out;
}

BitString reconstruct_secret(const BitString& a, std::span<const BitString> ys) {
  BitString out = a;
  for (const auto& y : ys) {
    out ^= y;
  }
  return out;
}

BitString complete_secret(const KeyLayout& layout, std::span<const BitString> partial_keys) {
  if (partial_keys.size() != layout.agents()) {
    throw std::invalid_argument("expected " + std::to_string(layout.agents()) +
                                " partial keys, got " + std::to_string(partial_keys.size()));
  }
  BitString s(layout.total_length());
  for (std::size_t i = 0; i < partial_keys.size(); ++i) {
    s ^= extend_partial_key(partial_keys[i], layout, i);
  }
  return s;
}

}  // namespace qsa

std::size_t std::hash<qsa::BitString>::operator()(const qsa::BitString& bits) const noexcept {
  std::size_t h = bits.size() * 0x9e3779b97f4a7c15ULL;
  for (auto w : bits.words()) {
    h ^= w + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}
