#include "bnnpipe/bit_vector.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

#include "bnnpipe/error.hpp"

namespace bnnpipe {

namespace {

constexpr std::size_t kWordBits = 64;

std::size_t word_count(std::size_t width) { return (width + kWordBits - 1) / kWordBits; }

std::uint64_t low_mask(std::size_t count) {
  return count >= kWordBits ? ~std::uint64_t{0} : (std::uint64_t{1} << count) - 1;
}

void require_same_width(const BitVector& a, const BitVector& b, const char* op) {
  if (a.width() != b.width()) {
    throw std::invalid_argument(std::string(op) + ": width mismatch " + std::to_string(a.width()) +
                                " vs " + std::to_string(b.width()));
  }
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

BitVector::BitVector(std::size_t width) : width_(width), words_(word_count(width), 0) {}

BitVector BitVector::from_uint(std::size_t width, std::uint64_t value) {
  BitVector v(width);
  if (!v.words_.empty()) v.words_[0] = value;
  v.trim();
  return v;
}

BitVector BitVector::ones(std::size_t width) {
  BitVector v(width);
  for (auto& w : v.words_) w = ~std::uint64_t{0};
  v.trim();
  return v;
}

BitVector BitVector::from_hex(std::string_view hex, std::size_t width) {
  if (hex.starts_with("0x") || hex.starts_with("0X")) hex.remove_prefix(2);
  const std::size_t digits = (width + 3) / 4;
  if (hex.size() != digits) {
    throw ParseError("hex string '" + std::string(hex) + "' has " + std::to_string(hex.size()) +
                     " digits, expected " + std::to_string(digits) + " for width " +
                     std::to_string(width));
  }
  BitVector v(width);
  for (std::size_t i = 0; i < digits; ++i) {
    const int nibble = hex_value(hex[digits - 1 - i]);
    if (nibble < 0) {
      throw ParseError("invalid hex digit '" + std::string(1, hex[digits - 1 - i]) + "' in '" +
                       std::string(hex) + "'");
    }
    for (std::size_t b = 0; b < 4; ++b) {
      if (!((nibble >> b) & 1)) continue;
      const std::size_t index = 4 * i + b;
      if (index >= width) {
        throw ParseError("hex string '" + std::string(hex) + "' exceeds width " +
                         std::to_string(width));
      }
      v.set_bit(index);
    }
  }
  return v;
}

bool BitVector::bit(std::size_t index) const {
  if (index >= width_) throw std::out_of_range("bit index out of range");
  return (words_[index / kWordBits] >> (index % kWordBits)) & 1;
}

void BitVector::set_bit(std::size_t index, bool value) {
  if (index >= width_) throw std::out_of_range("bit index out of range");
  const std::uint64_t m = std::uint64_t{1} << (index % kWordBits);
  if (value) {
    words_[index / kWordBits] |= m;
  } else {
    words_[index / kWordBits] &= ~m;
  }
}

std::uint64_t BitVector::bits64(std::size_t offset, std::size_t count) const {
  if (count == 0) return 0;
  if (count > kWordBits || offset + count > width_) throw std::out_of_range("bits64 out of range");
  const std::size_t w = offset / kWordBits;
  const std::size_t s = offset % kWordBits;
  std::uint64_t value = words_[w] >> s;
  if (s != 0 && w + 1 < words_.size()) value |= words_[w + 1] << (kWordBits - s);
  return value & low_mask(count);
}

void BitVector::set_bits64(std::size_t offset, std::size_t count, std::uint64_t value) {
  if (count == 0) return;
  if (count > kWordBits || offset + count > width_) {
    throw std::out_of_range("set_bits64 out of range");
  }
  value &= low_mask(count);
  const std::size_t w = offset / kWordBits;
  const std::size_t s = offset % kWordBits;
  const std::uint64_t m = low_mask(count);
  words_[w] = (words_[w] & ~(m << s)) | (value << s);
  if (s != 0 && s + count > kWordBits) {
    const std::size_t spill = kWordBits - s;
    words_[w + 1] = (words_[w + 1] & ~(m >> spill)) | (value >> spill);
  }
}

BitVector BitVector::slice(std::size_t offset, std::size_t width) const {
  if (offset + width > width_) throw std::out_of_range("slice out of range");
  BitVector out(width);
  for (std::size_t i = 0; i < out.words_.size(); ++i) {
    const std::size_t count = std::min(kWordBits, width - i * kWordBits);
    out.words_[i] = bits64(offset + i * kWordBits, count);
  }
  return out;
}

void BitVector::assign(std::size_t offset, const BitVector& value) {
  if (offset + value.width_ > width_) throw std::out_of_range("assign out of range");
  for (std::size_t i = 0; i < value.words_.size(); ++i) {
    const std::size_t count = std::min(kWordBits, value.width_ - i * kWordBits);
    set_bits64(offset + i * kWordBits, count, value.words_[i]);
  }
}

BitVector BitVector::concat(const BitVector& high) const {
  BitVector out(width_ + high.width_);
  out.assign(0, *this);
  out.assign(width_, high);
  return out;
}

BitVector BitVector::repeat(std::size_t times) const {
  BitVector out(width_ * times);
  for (std::size_t i = 0; i < times; ++i) out.assign(i * width_, *this);
  return out;
}

std::size_t BitVector::popcount() const {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

bool BitVector::is_zero() const {
  for (auto w : words_) {
    if (w != 0) return false;
  }
  return true;
}

bool BitVector::greater_equal(std::uint64_t value) const {
  for (std::size_t i = 1; i < words_.size(); ++i) {
    if (words_[i] != 0) return true;
  }
  return to_uint64() >= value;
}

std::string BitVector::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  const std::size_t digits = (width_ + 3) / 4;
  std::string out(digits, '0');
  for (std::size_t i = 0; i < digits; ++i) {
    const std::size_t count = std::min<std::size_t>(4, width_ - 4 * i);
    out[digits - 1 - i] = kDigits[bits64(4 * i, count)];
  }
  return out;
}

BitVector BitVector::operator~() const {
  BitVector out(*this);
  for (auto& w : out.words_) w = ~w;
  out.trim();
  return out;
}

BitVector BitVector::operator&(const BitVector& rhs) const {
  require_same_width(*this, rhs, "and");
  BitVector out(*this);
  for (std::size_t i = 0; i < words_.size(); ++i) out.words_[i] &= rhs.words_[i];
  return out;
}

BitVector BitVector::operator|(const BitVector& rhs) const {
  require_same_width(*this, rhs, "or");
  BitVector out(*this);
  for (std::size_t i = 0; i < words_.size(); ++i) out.words_[i] |= rhs.words_[i];
  return out;
}

BitVector BitVector::operator^(const BitVector& rhs) const {
  require_same_width(*this, rhs, "xor");
  BitVector out(*this);
  for (std::size_t i = 0; i < words_.size(); ++i) out.words_[i] ^= rhs.words_[i];
  return out;
}

BitVector BitVector::operator>>(std::size_t shift) const {
  BitVector out(width_);
  if (shift >= width_) return out;
  return slice(shift, width_ - shift).concat(BitVector(shift));
}

void BitVector::trim() {
  if (words_.empty()) return;
  const std::size_t tail = width_ % kWordBits;
  if (tail != 0) words_.back() &= low_mask(tail);
}

BitVector xnor(const BitVector& a, const BitVector& b) { return ~(a ^ b); }

BitVector add(const BitVector& a, const BitVector& b) {
  require_same_width(a, b, "add");
  BitVector out(a.width());
  const auto& wa = a.words();
  const auto& wb = b.words();
  std::uint64_t carry = 0;
  for (std::size_t i = 0; i < wa.size(); ++i) {
    const std::uint64_t s1 = wa[i] + wb[i];
    const std::uint64_t c1 = s1 < wa[i] ? 1 : 0;
    const std::uint64_t s2 = s1 + carry;
    const std::uint64_t c2 = s2 < s1 ? 1 : 0;
    const std::size_t count = std::min(kWordBits, a.width() - i * kWordBits);
    out.set_bits64(i * kWordBits, count, s2);
    carry = c1 | c2;
  }
  return out;
}

}  // namespace bnnpipe
