// Discrete memoryless wiretap channel p(y,z|x).
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wiretap/common.hpp"

namespace wiretap {

using Matrix = std::vector<std::vector<double>>;

// Physically degraded construction X -> Y -> Z: p(y|x) followed by p(z|y).
struct CascadeSpec {
  Matrix forward;  // p(y|x), rows sum to 1
  Matrix degrade;  // p(z|y), rows sum to 1
};

Matrix bsc_matrix(double crossover);
Matrix identity_matrix(int size);
// Uniform output regardless of input (erases all information).
Matrix pure_noise_matrix(int in_size, int out_size);

class ChannelModel {
 public:
  static ChannelModel from_cascade(const CascadeSpec& spec);
  // Direct tensor constructor; degradedness is not verified for these.
  static ChannelModel from_tensor(int x_size, int y_size, int z_size,
                                  std::vector<double> transition);

  int x_size() const { return x_size_; }
  int y_size() const { return y_size_; }
  int z_size() const { return z_size_; }
  bool degraded_by_construction() const { return degraded_; }

  double p_yz(int x, int y, int z) const {
    return transition_[(static_cast<std::size_t>(x) * y_size_ + y) * z_size_ + z];
  }
  double p_y(int x, int y) const { return y_marginal_[static_cast<std::size_t>(x) * y_size_ + y]; }
  double p_z(int x, int z) const { return z_marginal_[static_cast<std::size_t>(x) * z_size_ + z]; }

  Matrix y_marginal() const;
  Matrix z_marginal() const;

  // i.i.d. use of the channel over a block; deterministic given the stream.
  std::pair<std::vector<std::uint8_t>, std::vector<std::uint8_t>> sample_block(
      std::span<const std::uint8_t> x_block, Rng& rng) const;

  // Product likelihoods, accumulated in log domain.
  double block_likelihood_y(std::span<const std::uint8_t> x_block,
                            std::span<const std::uint8_t> y_block) const;
  double block_likelihood_z(std::span<const std::uint8_t> x_block,
                            std::span<const std::uint8_t> z_block) const;
  double block_likelihood_yz(std::span<const std::uint8_t> x_block,
                             std::span<const std::uint8_t> y_block,
                             std::span<const std::uint8_t> z_block) const;

  double block_log_likelihood_y(std::span<const std::uint8_t> x_block,
                                std::span<const std::uint8_t> y_block) const;

 private:
  ChannelModel() = default;
  void finalize();

  int x_size_ = 0, y_size_ = 0, z_size_ = 0;
  bool degraded_ = false;
  std::vector<double> transition_;  // [x][y][z] row-major
  std::vector<double> y_marginal_;  // [x][y]
  std::vector<double> z_marginal_;  // [x][z]
};

// Channel config files: {"cascade": {"forward": [[..]], "degrade": [[..]]}}
// or {"transition": [[[..]]]}.
ChannelModel load_channel_json(const std::string& json_text);
ChannelModel load_channel_file(const std::string& path);

}  // namespace wiretap
