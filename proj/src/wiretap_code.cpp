#include "wiretap/wiretap_code.hpp"

#include <cmath>
#include <limits>

#include <json.hpp>

namespace wiretap {

namespace {

void check_input_dist(const InputDistribution& dist) {
  double sum = 0.0;
  for (double p : dist.probs) {
    if (p < 0.0) throw DomainError("input distribution: negative entry");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw DomainError("input distribution must sum to 1");
}

void check_rate(int n, int total_bits, int x_size) {
  if (total_bits > 62 || static_cast<double>(total_bits) > n * std::log2(x_size) + 1e-9)
    throw DomainError("rate exceeds alphabet capacity: " + std::to_string(total_bits) +
                      " bits over " + std::to_string(n) + " uses of a " +
                      std::to_string(x_size) + "-ary alphabet");
}

std::vector<std::uint8_t> draw_table(std::size_t rows, int n,
                                     const InputDistribution& dist,
                                     std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::uint8_t> table(rows * n);
  for (std::size_t r = 0; r < rows; ++r)
    for (int i = 0; i < n; ++i)
      table[r * n + i] = static_cast<std::uint8_t>(rng.sample(dist.probs));
  return table;
}

// Shared ML search; returns the row index of the argmax likelihood.
template <typename RowAccess>
std::size_t ml_argmax(std::size_t rows, RowAccess&& row,
                      std::span<const std::uint8_t> y_block,
                      const ChannelModel& model) {
  std::size_t best = 0;
  double best_ll = -std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < rows; ++r) {
    const double ll = model.block_log_likelihood_y(row(r), y_block);
    if (ll > best_ll) {
      best_ll = ll;
      best = r;
    }
  }
  return best;
}

}  // namespace

WiretapCodebook WiretapCodebook::build(int n, int rate_bits, int bin_bits,
                                       const InputDistribution& input_dist,
                                       std::uint64_t seed) {
  if (n < 0 || rate_bits < 0 || bin_bits < 0)
    throw std::invalid_argument("codebook dimensions must be nonnegative");
  check_input_dist(input_dist);
  const int x_size = static_cast<int>(input_dist.probs.size());
  check_rate(n, rate_bits + bin_bits, x_size);

  WiretapCodebook book;
  book.n_ = n;
  book.rate_bits_ = rate_bits;
  book.bin_bits_ = bin_bits;
  book.x_size_ = x_size;
  book.seed_ = seed;
  book.input_dist_ = input_dist;
  book.codewords_ = draw_table(book.num_bins() * book.bin_size(), n, input_dist, seed);
  return book;
}

std::span<const std::uint8_t> WiretapCodebook::row(std::size_t index) const {
  return {codewords_.data() + index * n_, static_cast<std::size_t>(n_)};
}

std::span<const std::uint8_t> WiretapCodebook::codeword(std::size_t bin,
                                                        std::size_t member) const {
  return row(bin * bin_size() + member);
}

std::string WiretapCodebook::dump() const {
  nlohmann::json j{{"type", "wiretap"},
                   {"n", n_},
                   {"rate_bits", rate_bits_},
                   {"bin_bits", bin_bits_},
                   {"input_dist", input_dist_.probs},
                   {"seed", seed_}};
  return j.dump();
}

WiretapCodebook WiretapCodebook::restore(const std::string& json_text) {
  const auto j = nlohmann::json::parse(json_text);
  if (j.at("type") != "wiretap") throw DomainError("not a wiretap codebook dump");
  return build(j.at("n"), j.at("rate_bits"), j.at("bin_bits"),
               InputDistribution{j.at("input_dist").get<std::vector<double>>()},
               j.at("seed"));
}

ChannelCodebook ChannelCodebook::build(int n, int message_bits,
                                       const InputDistribution& input_dist,
                                       std::uint64_t seed) {
  if (n < 0 || message_bits < 0)
    throw std::invalid_argument("codebook dimensions must be nonnegative");
  check_input_dist(input_dist);
  const int x_size = static_cast<int>(input_dist.probs.size());
  check_rate(n, message_bits, x_size);

  ChannelCodebook book;
  book.n_ = n;
  book.message_bits_ = message_bits;
  book.x_size_ = x_size;
  book.seed_ = seed;
  book.input_dist_ = input_dist;
  book.codewords_ = draw_table(book.num_codewords(), n, input_dist, seed);
  return book;
}

std::span<const std::uint8_t> ChannelCodebook::codeword(std::size_t index) const {
  return {codewords_.data() + index * n_, static_cast<std::size_t>(n_)};
}

std::string ChannelCodebook::dump() const {
  nlohmann::json j{{"type", "channel"},
                   {"n", n_},
                   {"message_bits", message_bits_},
                   {"input_dist", input_dist_.probs},
                   {"seed", seed_}};
  return j.dump();
}

ChannelCodebook ChannelCodebook::restore(const std::string& json_text) {
  const auto j = nlohmann::json::parse(json_text);
  if (j.at("type") != "channel") throw DomainError("not a channel codebook dump");
  return build(j.at("n"), j.at("message_bits"),
               InputDistribution{j.at("input_dist").get<std::vector<double>>()},
               j.at("seed"));
}

std::vector<std::uint8_t> wiretap_encode(const WiretapCodebook& book,
                                         std::size_t message, Rng& rng) {
  if (message >= book.num_bins())
    throw std::invalid_argument("message index out of range");
  const std::size_t member = rng.below(book.bin_size());
  const auto cw = book.codeword(message, member);
  return {cw.begin(), cw.end()};
}

std::size_t wiretap_decode(const WiretapCodebook& book,
                           std::span<const std::uint8_t> y_block,
                           const ChannelModel& model) {
  if (y_block.size() != static_cast<std::size_t>(book.n()))
    throw std::invalid_argument("y block length mismatch");
  const std::size_t rows = book.num_bins() * book.bin_size();
  const std::size_t best =
      ml_argmax(rows, [&](std::size_t r) { return book.row(r); }, y_block, model);
  return best / book.bin_size();
}

std::vector<std::uint8_t> channel_encode(const ChannelCodebook& book,
                                         std::size_t message) {
  if (message >= book.num_codewords())
    throw std::invalid_argument("message index out of range");
  const auto cw = book.codeword(message);
  return {cw.begin(), cw.end()};
}

std::size_t channel_decode(const ChannelCodebook& book,
                           std::span<const std::uint8_t> y_block,
                           const ChannelModel& model) {
  if (y_block.size() != static_cast<std::size_t>(book.n()))
    throw std::invalid_argument("y block length mismatch");
  return ml_argmax(book.num_codewords(),
                   [&](std::size_t r) { return book.codeword(r); }, y_block, model);
}

double exact_block_leakage(const WiretapCodebook& book, const ChannelModel& model,
                           std::uint64_t state_cap) {
  const int n = book.n();
  const int z_size = model.z_size();
  std::uint64_t z_states = 1;
  for (int i = 0; i < n; ++i) {
    z_states *= z_size;
    if (z_states > state_cap) break;
  }
  const std::uint64_t total = z_states * book.num_bins() * book.bin_size();
  if (z_states > state_cap || total > state_cap)
    throw BudgetError("enumeration cap exceeded: " + std::to_string(total) +
                      " joint states; reduce n");

  // p(w, z^n) = (1/M)(1/M') sum_j prod_i p(z_i | codeword symbol)
  const double weight = 1.0 / (static_cast<double>(book.num_bins()) *
                               static_cast<double>(book.bin_size()));
  Matrix joint(book.num_bins(), std::vector<double>(z_states, 0.0));
  std::vector<std::uint8_t> z_block(n, 0);
  for (std::size_t w = 0; w < book.num_bins(); ++w)
    for (std::size_t j = 0; j < book.bin_size(); ++j) {
      const auto cw = book.codeword(w, j);
      for (std::uint64_t zi = 0; zi < z_states; ++zi) {
        std::uint64_t rem = zi;
        double p = 1.0;
        for (int i = n - 1; i >= 0; --i) {
          z_block[i] = static_cast<std::uint8_t>(rem % z_size);
          rem /= z_size;
          p *= model.p_z(cw[i], z_block[i]);
        }
        joint[w][zi] += weight * p;
      }
    }
  return mutual_information(joint);
}

}  // namespace wiretap
