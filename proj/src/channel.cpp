#include "wiretap/channel.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace wiretap {

namespace {

constexpr double kRowSumTol = 1e-12;

void check_stochastic(const Matrix& m, const std::string& name) {
  if (m.empty()) throw DomainError(name + ": empty matrix");
  const std::size_t cols = m[0].size();
  for (std::size_t r = 0; r < m.size(); ++r) {
    if (m[r].size() != cols)
      throw DomainError(name + ": ragged row " + std::to_string(r));
    double sum = 0.0;
    for (double p : m[r]) {
      if (p < 0.0) throw DomainError(name + ": negative entry in row " + std::to_string(r));
      sum += p;
    }
    if (std::abs(sum - 1.0) > kRowSumTol)
      throw DomainError(name + ": row " + std::to_string(r) +
                        " sums to " + std::to_string(sum) + ", expected 1");
  }
}

}  // namespace

Matrix bsc_matrix(double crossover) {
  if (crossover < 0.0 || crossover > 1.0)
    throw std::invalid_argument("BSC crossover must lie in [0,1]");
  return {{1.0 - crossover, crossover}, {crossover, 1.0 - crossover}};
}

Matrix identity_matrix(int size) {
  Matrix m(size, std::vector<double>(size, 0.0));
  for (int i = 0; i < size; ++i) m[i][i] = 1.0;
  return m;
}

Matrix pure_noise_matrix(int in_size, int out_size) {
  return Matrix(in_size, std::vector<double>(out_size, 1.0 / out_size));
}

ChannelModel ChannelModel::from_cascade(const CascadeSpec& spec) {
  check_stochastic(spec.forward, "forward p(y|x)");
  check_stochastic(spec.degrade, "degrade p(z|y)");
  const int x_size = static_cast<int>(spec.forward.size());
  const int y_size = static_cast<int>(spec.forward[0].size());
  if (spec.degrade.size() != static_cast<std::size_t>(y_size))
    throw DomainError("degrade p(z|y) must have one row per y symbol");
  const int z_size = static_cast<int>(spec.degrade[0].size());

  ChannelModel model;
  model.x_size_ = x_size;
  model.y_size_ = y_size;
  model.z_size_ = z_size;
  model.degraded_ = true;
  model.transition_.assign(static_cast<std::size_t>(x_size) * y_size * z_size, 0.0);
  for (int x = 0; x < x_size; ++x)
    for (int y = 0; y < y_size; ++y)
      for (int z = 0; z < z_size; ++z)
        model.transition_[(static_cast<std::size_t>(x) * y_size + y) * z_size + z] =
            spec.forward[x][y] * spec.degrade[y][z];
  model.finalize();
  return model;
}

ChannelModel ChannelModel::from_tensor(int x_size, int y_size, int z_size,
                                       std::vector<double> transition) {
  if (x_size <= 0 || y_size <= 0 || z_size <= 0)
    throw std::invalid_argument("alphabet sizes must be positive");
  if (transition.size() != static_cast<std::size_t>(x_size) * y_size * z_size)
    throw std::invalid_argument("transition tensor size mismatch");
  ChannelModel model;
  model.x_size_ = x_size;
  model.y_size_ = y_size;
  model.z_size_ = z_size;
  model.degraded_ = false;  // degradedness unverified for direct tensors
  model.transition_ = std::move(transition);
  for (int x = 0; x < x_size; ++x) {
    double sum = 0.0;
    for (int y = 0; y < y_size; ++y)
      for (int z = 0; z < z_size; ++z) {
        const double p = model.p_yz(x, y, z);
        if (p < 0.0)
          throw DomainError("transition: negative entry at x=" + std::to_string(x));
        sum += p;
      }
    if (std::abs(sum - 1.0) > kRowSumTol)
      throw DomainError("transition: slice x=" + std::to_string(x) + " sums to " +
                        std::to_string(sum) + ", expected 1");
  }
  model.finalize();
  return model;
}

void ChannelModel::finalize() {
  y_marginal_.assign(static_cast<std::size_t>(x_size_) * y_size_, 0.0);
  z_marginal_.assign(static_cast<std::size_t>(x_size_) * z_size_, 0.0);
  for (int x = 0; x < x_size_; ++x)
    for (int y = 0; y < y_size_; ++y)
      for (int z = 0; z < z_size_; ++z) {
        const double p = p_yz(x, y, z);
        y_marginal_[static_cast<std::size_t>(x) * y_size_ + y] += p;
        z_marginal_[static_cast<std::size_t>(x) * z_size_ + z] += p;
      }
}

Matrix ChannelModel::y_marginal() const {
  Matrix m(x_size_, std::vector<double>(y_size_));
  for (int x = 0; x < x_size_; ++x)
    for (int y = 0; y < y_size_; ++y) m[x][y] = p_y(x, y);
  return m;
}

Matrix ChannelModel::z_marginal() const {
  Matrix m(x_size_, std::vector<double>(z_size_));
  for (int x = 0; x < x_size_; ++x)
    for (int z = 0; z < z_size_; ++z) m[x][z] = p_z(x, z);
  return m;
}

std::pair<std::vector<std::uint8_t>, std::vector<std::uint8_t>>
ChannelModel::sample_block(std::span<const std::uint8_t> x_block, Rng& rng) const {
  std::vector<std::uint8_t> y_block(x_block.size());
  std::vector<std::uint8_t> z_block(x_block.size());
  for (std::size_t i = 0; i < x_block.size(); ++i) {
    const int x = x_block[i];
    if (x >= x_size_)
      throw std::invalid_argument("input symbol out of range at position " +
                                  std::to_string(i));
    const std::span<const double> row(
        transition_.data() + static_cast<std::size_t>(x) * y_size_ * z_size_,
        static_cast<std::size_t>(y_size_) * z_size_);
    const std::size_t joint = rng.sample(row);
    y_block[i] = static_cast<std::uint8_t>(joint / z_size_);
    z_block[i] = static_cast<std::uint8_t>(joint % z_size_);
  }
  return {std::move(y_block), std::move(z_block)};
}

namespace {

template <typename Prob>
double block_log_likelihood(std::span<const std::uint8_t> a,
                            std::span<const std::uint8_t> b, Prob&& prob) {
  if (a.size() != b.size())
    throw std::invalid_argument("block length mismatch");
  double log_sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double p = prob(a[i], b[i]);
    if (p <= 0.0) return -std::numeric_limits<double>::infinity();
    log_sum += std::log(p);
  }
  return log_sum;
}

}  // namespace

double ChannelModel::block_log_likelihood_y(std::span<const std::uint8_t> x_block,
                                            std::span<const std::uint8_t> y_block) const {
  return block_log_likelihood(x_block, y_block,
                              [this](int x, int y) { return p_y(x, y); });
}

double ChannelModel::block_likelihood_y(std::span<const std::uint8_t> x_block,
                                        std::span<const std::uint8_t> y_block) const {
  return std::exp(block_log_likelihood_y(x_block, y_block));
}

double ChannelModel::block_likelihood_z(std::span<const std::uint8_t> x_block,
                                        std::span<const std::uint8_t> z_block) const {
  return std::exp(block_log_likelihood(
      x_block, z_block, [this](int x, int z) { return p_z(x, z); }));
}

double ChannelModel::block_likelihood_yz(std::span<const std::uint8_t> x_block,
                                         std::span<const std::uint8_t> y_block,
                                         std::span<const std::uint8_t> z_block) const {
  if (x_block.size() != y_block.size() || x_block.size() != z_block.size())
    throw std::invalid_argument("block length mismatch");
  double log_sum = 0.0;
  for (std::size_t i = 0; i < x_block.size(); ++i) {
    const double p = p_yz(x_block[i], y_block[i], z_block[i]);
    if (p <= 0.0) return 0.0;
    log_sum += std::log(p);
  }
  return std::exp(log_sum);
}

namespace {

Matrix matrix_from_json(const nlohmann::json& j) {
  Matrix m;
  for (const auto& row : j) m.push_back(row.get<std::vector<double>>());
  return m;
}

}  // namespace

ChannelModel load_channel_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DomainError(std::string("channel config parse error: ") + e.what());
  }
  if (j.contains("cascade")) {
    CascadeSpec spec;
    spec.forward = matrix_from_json(j["cascade"].at("forward"));
    spec.degrade = matrix_from_json(j["cascade"].at("degrade"));
    return ChannelModel::from_cascade(spec);
  }
  if (j.contains("transition")) {
    const auto& t = j["transition"];
    const int x_size = static_cast<int>(t.size());
    const int y_size = static_cast<int>(t.at(0).size());
    const int z_size = static_cast<int>(t.at(0).at(0).size());
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(x_size) * y_size * z_size);
    for (const auto& yz : t)
      for (const auto& zrow : yz)
        for (const auto& p : zrow) flat.push_back(p.get<double>());
    return ChannelModel::from_tensor(x_size, y_size, z_size, std::move(flat));
  }
  throw DomainError("channel config needs either \"cascade\" or \"transition\"");
}

ChannelModel load_channel_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open channel file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_channel_json(ss.str());
}

}  // namespace wiretap
