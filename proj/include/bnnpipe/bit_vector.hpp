#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace bnnpipe {

/// Fixed-width bit string. Bit 0 is the least significant bit; bits at or
/// beyond width() are always zero.
class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::size_t width);

  static BitVector from_uint(std::size_t width, std::uint64_t value);
  static BitVector ones(std::size_t width);
  /// Parses an MSB-first hex string holding exactly ceil(width/4) digits.
  /// An optional "0x" prefix is accepted. Throws ParseError.
  static BitVector from_hex(std::string_view hex, std::size_t width);

  std::size_t width() const { return width_; }
  bool empty() const { return width_ == 0; }

  bool bit(std::size_t index) const;
  void set_bit(std::size_t index, bool value = true);

  /// Up to 64 bits starting at `offset`, packed into the low bits.
  std::uint64_t bits64(std::size_t offset, std::size_t count) const;
  void set_bits64(std::size_t offset, std::size_t count, std::uint64_t value);

  BitVector slice(std::size_t offset, std::size_t width) const;
  void assign(std::size_t offset, const BitVector& value);

  /// `high` placed above this vector: result width is width() + high.width().
  BitVector concat(const BitVector& high) const;
  BitVector repeat(std::size_t times) const;

  std::size_t popcount() const;
  bool is_zero() const;
  /// Unsigned comparison against a 64-bit constant.
  bool greater_equal(std::uint64_t value) const;
  /// Low 64 bits.
  std::uint64_t to_uint64() const { return words_.empty() ? 0 : words_[0]; }

  /// MSB-first, ceil(width/4) digits, no prefix.
  std::string to_hex() const;

  BitVector operator~() const;
  BitVector operator&(const BitVector& rhs) const;
  BitVector operator|(const BitVector& rhs) const;
  BitVector operator^(const BitVector& rhs) const;
  /// Logical right shift with zero fill.
  BitVector operator>>(std::size_t shift) const;

  bool operator==(const BitVector&) const = default;

  const std::vector<std::uint64_t>& words() const { return words_; }

 private:
  void trim();

  std::size_t width_ = 0;
  std::vector<std::uint64_t> words_;
};

BitVector xnor(const BitVector& a, const BitVector& b);
/// Unsigned sum modulo 2^width; both operands must share a width.
BitVector add(const BitVector& a, const BitVector& b);

}  // namespace bnnpipe
