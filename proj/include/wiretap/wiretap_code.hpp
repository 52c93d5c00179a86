// Small-blocklength codes: random-binning wiretap code and a plain random
// channel code for keyed transmission.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wiretap/channel.hpp"
#include "wiretap/common.hpp"
#include "wiretap/infotheory.hpp"

namespace wiretap {

constexpr std::uint64_t kDefaultEnumerationCap = 1ULL << 24;

// Random-binning code: num_bins messages, bin_size randomization codewords
// per bin, all drawn i.i.d. from the construction input distribution.
// Tables regenerate bit-identically from (seed, dimensions).
class WiretapCodebook {
 public:
  static WiretapCodebook build(int n, int rate_bits, int bin_bits,
                               const InputDistribution& input_dist,
                               std::uint64_t seed);

  int n() const { return n_; }
  int rate_bits() const { return rate_bits_; }
  int bin_bits() const { return bin_bits_; }
  int x_size() const { return x_size_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t num_bins() const { return 1ULL << rate_bits_; }
  std::size_t bin_size() const { return 1ULL << bin_bits_; }

  std::span<const std::uint8_t> codeword(std::size_t bin, std::size_t member) const;
  std::span<const std::uint8_t> row(std::size_t index) const;

  std::string dump() const;  // seed + dimensions only
  static WiretapCodebook restore(const std::string& json_text);

 private:
  int n_ = 0, rate_bits_ = 0, bin_bits_ = 0, x_size_ = 0;
  std::uint64_t seed_ = 0;
  InputDistribution input_dist_;
  std::vector<std::uint8_t> codewords_;  // (num_bins * bin_size) x n
};

// Plain random code without bin structure; used behind the keyed encoder.
class ChannelCodebook {
 public:
  static ChannelCodebook build(int n, int message_bits,
                               const InputDistribution& input_dist,
                               std::uint64_t seed);

  int n() const { return n_; }
  int message_bits() const { return message_bits_; }
  int x_size() const { return x_size_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t num_codewords() const { return 1ULL << message_bits_; }

  std::span<const std::uint8_t> codeword(std::size_t index) const;

  std::string dump() const;
  static ChannelCodebook restore(const std::string& json_text);

 private:
  int n_ = 0, message_bits_ = 0, x_size_ = 0;
  std::uint64_t seed_ = 0;
  InputDistribution input_dist_;
  std::vector<std::uint8_t> codewords_;
};

// Stochastic wiretap encoder: uniform codeword within the message's bin.
std::vector<std::uint8_t> wiretap_encode(const WiretapCodebook& book,
                                         std::size_t message, Rng& rng);

// ML decoding over all codewords using Bob's marginal; ties go to the
// lowest codeword index. Returns the bin of the argmax.
std::size_t wiretap_decode(const WiretapCodebook& book,
                           std::span<const std::uint8_t> y_block,
                           const ChannelModel& model);

std::vector<std::uint8_t> channel_encode(const ChannelCodebook& book,
                                         std::size_t message);
std::size_t channel_decode(const ChannelCodebook& book,
                           std::span<const std::uint8_t> y_block,
                           const ChannelModel& model);

// Exact I(W; Z^n) in bits for this codebook over Eve's marginal, by full
// enumeration of Z^n.
double exact_block_leakage(const WiretapCodebook& book, const ChannelModel& model,
                           std::uint64_t state_cap = kDefaultEnumerationCap);

}  // namespace wiretap
