// Shared error types, bit-string helpers and deterministic RNG.
#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace wiretap {

// Domain errors map to CLI exit code 2, usage errors to exit code 1.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoSecrecyError : public DomainError {
 public:
  using DomainError::DomainError;
};

class BudgetError : public DomainError {
 public:
  using DomainError::DomainError;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seeded random stream. All randomness in the library flows through one of
// these; sub-streams are derived from a root seed with distinct tags so that
// experiments replay bit-identically.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  static Rng derive(std::uint64_t seed, std::uint64_t tag) {
    return Rng(splitmix64(seed ^ splitmix64(tag + 1)));
  }

  std::uint64_t next() { return gen_(); }

  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  std::size_t below(std::size_t n) { return static_cast<std::size_t>(next() % n); }

  std::uint64_t bits(int width) {
    if (width == 0) return 0;
    return next() & ((width >= 64) ? ~0ULL : ((1ULL << width) - 1));
  }

  // Draw an index from a probability vector by CDF walk.
  std::size_t sample(std::span<const double> probs) {
    const double u = uniform01();
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
      acc += probs[i];
      if (u < acc) return i;
    }
    return probs.empty() ? 0 : probs.size() - 1;
  }

 private:
  std::mt19937_64 gen_;
};

// Fixed-width bit string, big-endian: the first (leftmost) bit is the most
// significant bit of `value`. Message indices and keys use this convention.
struct Bits {
  std::uint64_t value = 0;
  int width = 0;

  static Bits zero(int width) { return Bits{0, width}; }

  bool operator==(const Bits&) const = default;
};

inline std::uint64_t bit_mask(int width) {
  return width >= 64 ? ~0ULL : (1ULL << width) - 1;
}

inline Bits concat_bits(const Bits& high, const Bits& low) {
  if (high.width + low.width > 64)
    throw std::invalid_argument("bit string wider than 64 bits");
  return Bits{(high.value << low.width) | (low.value & bit_mask(low.width)),
              high.width + low.width};
}

// Most-significant `width` bits of b.
inline Bits bits_prefix(const Bits& b, int width) {
  if (width > b.width) throw std::invalid_argument("prefix wider than source");
  return Bits{(b.value >> (b.width - width)) & bit_mask(width), width};
}

inline Bits xor_bits(const Bits& a, const Bits& b) {
  if (a.width != b.width) throw std::invalid_argument("XOR width mismatch");
  return Bits{(a.value ^ b.value) & bit_mask(a.width), a.width};
}

}  // namespace wiretap
