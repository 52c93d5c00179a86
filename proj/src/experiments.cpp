#include "wiretap/experiments.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace wiretap {

namespace {

constexpr int kChunks = 64;  // fixed chunk count keeps results thread-count invariant

int resolve_threads(int threads) {
  if (threads > 0) return threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Run `work(chunk, chunk_trials, rng)` over fixed chunks; aggregation happens
// in chunk order so any worker count gives identical results.
template <typename Work>
void run_chunked(int trials, std::uint64_t seed, int threads, Work&& work) {
  threads = resolve_threads(threads);
  std::vector<std::future<void>> futures;
  std::atomic<int> next{0};
  for (int t = 0; t < std::min(threads, kChunks); ++t)
    futures.push_back(std::async(std::launch::async, [&]() {
      for (int c = next.fetch_add(1); c < kChunks; c = next.fetch_add(1)) {
        const int lo = static_cast<int>(static_cast<long long>(trials) * c / kChunks);
        const int hi = static_cast<int>(static_cast<long long>(trials) * (c + 1) / kChunks);
        if (hi > lo) {
          Rng rng = Rng::derive(seed, static_cast<std::uint64_t>(c));
          work(c, hi - lo, rng);
        }
      }
    }));
  for (auto& f : futures) f.get();
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

Interval wilson_interval(std::size_t successes, std::size_t trials) {
  if (trials == 0) throw std::invalid_argument("wilson_interval: zero trials");
  constexpr double z = 1.959963984540054;  // 97.5th normal quantile
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return Interval{p, std::max(0.0, center - half), std::min(1.0, center + half)};
}

double ErrorEstimate::delta_max() const {
  double d = 0.0;
  for (const Interval& i : keyed) d = std::max(d, i.estimate);
  return d;
}

ErrorEstimate measure_component_errors(const ChannelModel& model,
                                       const SessionCodebooks& books, int trials,
                                       std::uint64_t seed, int threads) {
  if (trials < 100) throw std::invalid_argument("need at least 100 trials");

  std::vector<int> widths;
  for (const auto& [width, book] : books.keyed) widths.push_back(width);

  std::vector<std::size_t> wiretap_errors(kChunks, 0);
  std::vector<std::vector<std::size_t>> keyed_errors(widths.size(),
                                                     std::vector<std::size_t>(kChunks, 0));
  run_chunked(trials, seed, threads, [&](int chunk, int chunk_trials, Rng& rng) {
    for (int t = 0; t < chunk_trials; ++t) {
      const std::size_t w = rng.below(books.wiretap.num_bins());
      const auto x = wiretap_encode(books.wiretap, w, rng);
      const auto [y, z] = model.sample_block(x, rng);
      if (wiretap_decode(books.wiretap, y, model) != w) ++wiretap_errors[chunk];
      for (std::size_t b = 0; b < widths.size(); ++b) {
        const ChannelCodebook& book = books.keyed.at(widths[b]);
        const std::size_t msg = rng.below(book.num_codewords());
        const auto xc = channel_encode(book, msg);
        const auto [yc, zc] = model.sample_block(xc, rng);
        if (channel_decode(book, yc, model) != msg) ++keyed_errors[b][chunk];
      }
    }
  });

  ErrorEstimate est;
  est.trials = static_cast<std::size_t>(trials);
  std::size_t sum = 0;
  for (std::size_t e : wiretap_errors) sum += e;
  est.wiretap = wilson_interval(sum, trials);
  for (std::size_t b = 0; b < widths.size(); ++b) {
    sum = 0;
    for (std::size_t e : keyed_errors[b]) sum += e;
    est.keyed.push_back(wilson_interval(sum, trials));
    est.keyed_widths.push_back(widths[b]);
  }
  return est;
}

PropagationCurve error_propagation_curve(const ChannelModel& model,
                                         const SlotSchedule& schedule,
                                         const SessionCodebooks& books, int trials,
                                         std::uint64_t seed, int threads) {
  const std::size_t num_slots = schedule.slots.size();
  std::vector<std::vector<std::size_t>> slot_errors(num_slots,
                                                    std::vector<std::size_t>(kChunks, 0));
  run_chunked(trials, splitmix64(seed ^ 0x70726f70ULL), threads,
              [&](int chunk, int chunk_trials, Rng& rng) {
                for (int t = 0; t < chunk_trials; ++t) {
                  const TranscriptRecord rec = run_session(model, schedule, books, rng);
                  for (std::size_t s = 0; s < num_slots; ++s)
                    if (rec.slots[s].error) ++slot_errors[s][chunk];
                }
              });

  PropagationCurve curve;
  curve.components = measure_component_errors(model, books, trials,
                                              splitmix64(seed ^ 0x636f6d70ULL), threads);
  const double eps = curve.components.wiretap.estimate;
  const double delta = curve.components.delta_max();
  const double n_comp = static_cast<double>(curve.components.trials);
  const double var_eps = eps * (1.0 - eps) / n_comp;
  const double var_delta = delta * (1.0 - delta) / n_comp;

  for (std::size_t s = 0; s < num_slots; ++s) {
    std::size_t sum = 0;
    for (std::size_t e : slot_errors[s]) sum += e;
    const Interval ci = wilson_interval(sum, trials);
    const int pos = schedule.slots[s].position;
    const double var_p = ci.estimate * (1.0 - ci.estimate) / trials;
    const double sigma = std::sqrt(var_p + pos * pos * var_eps +
                                   (pos - 1.0) * (pos - 1.0) * var_delta);
    PropagationPoint point;
    point.slot = schedule.slots[s].index;
    point.p_err = ci.estimate;
    point.ci_lo = ci.lo;
    point.ci_hi = ci.hi;
    point.bound = pos * eps + (pos - 1) * delta + 3.0 * sigma;
    point.flag = point.p_err > point.bound;
    curve.points.push_back(point);
  }
  return curve;
}

RampTable rate_ramp(const RateProfile& profile, int slots) {
  RampTable table;
  table.limit = profile.lambda * profile.secrecy_capacity;
  table.ratio_is_integer = profile.ratio_is_integer;
  double used = 0.0, delivered = 0.0;
  for (int k = 1; k <= slots; ++k) {
    RampPoint p;
    p.slot = k;
    if (k == 1) {
      p.mini_slots = 1;
      p.rate = profile.secrecy_capacity;
    } else if (k <= profile.lambda) {
      p.mini_slots = 2;
      p.rate = k * profile.secrecy_capacity / 2.0;
    } else {
      p.mini_slots = 1;
      p.rate = profile.lambda * profile.secrecy_capacity;
    }
    used += p.mini_slots;
    delivered += p.rate * p.mini_slots;
    p.cumulative_avg = delivered / used;
    table.points.push_back(p);
  }
  return table;
}

double two_proportion_z(std::size_t err_a, std::size_t n_a, std::size_t err_b,
                        std::size_t n_b) {
  const double pa = static_cast<double>(err_a) / n_a;
  const double pb = static_cast<double>(err_b) / n_b;
  const double pooled = static_cast<double>(err_a + err_b) / (n_a + n_b);
  const double se =
      std::sqrt(pooled * (1.0 - pooled) * (1.0 / n_a + 1.0 / n_b));
  if (se == 0.0) return 0.0;
  return std::abs(pa - pb) / se;
}

std::string ramp_csv(const RampTable& table) {
  std::ostringstream out;
  out << "# ramp.v1 slot,minislots,rate,cumulative_avg\n";
  out << "slot,minislots,rate,cumulative_avg\n";
  for (const RampPoint& p : table.points)
    out << p.slot << ',' << p.mini_slots << ',' << format_double(p.rate) << ','
        << format_double(p.cumulative_avg) << '\n';
  return out.str();
}

std::string errors_csv(const PropagationCurve& curve) {
  std::ostringstream out;
  out << "# errors.v1 slot,p_err,ci_lo,ci_hi,bound,flag\n";
  out << "slot,p_err,ci_lo,ci_hi,bound,flag\n";
  for (const PropagationPoint& p : curve.points)
    out << p.slot << ',' << format_double(p.p_err) << ',' << format_double(p.ci_lo)
        << ',' << format_double(p.ci_hi) << ',' << format_double(p.bound) << ','
        << (p.flag ? 1 : 0) << '\n';
  return out.str();
}

ExperimentConfig ExperimentConfig::from_json(const std::string& json_text,
                                             const std::string& base_dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DomainError(std::string("experiment config parse error: ") + e.what());
  }
  ExperimentConfig cfg;
  const auto& ch = j.at("channel");
  if (ch.is_object() && ch.contains("file")) {
    const std::string path = base_dir + "/" + ch["file"].get<std::string>();
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open channel file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    cfg.channel_json = ss.str();
  } else {
    cfg.channel_json = ch.dump();
  }
  cfg.n = j.value("n", cfg.n);
  cfg.rate_bits = j.value("rate_bits", cfg.rate_bits);
  cfg.bin_bits = j.value("bin_bits", cfg.bin_bits);
  cfg.slots = j.value("slots", cfg.slots);
  cfg.trials = j.value("trials", cfg.trials);
  cfg.restart_period = j.value("restart_period", cfg.restart_period);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.grid_steps = j.value("grid_steps", cfg.grid_steps);
  if (j.contains("lambda")) cfg.lambda = j["lambda"].get<int>();
  if (cfg.trials < 1) throw DomainError("trials must be >= 1");
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  const auto slash = path.find_last_of('/');
  return from_json(ss.str(), slash == std::string::npos ? "." : path.substr(0, slash));
}

std::string ExperimentConfig::manifest_json() const {
  nlohmann::json j;
  j["channel"] = nlohmann::json::parse(channel_json);
  j["n"] = n;
  j["rate_bits"] = rate_bits;
  j["bin_bits"] = bin_bits;
  j["slots"] = slots;
  j["trials"] = trials;
  j["restart_period"] = restart_period;
  j["seed"] = seed;
  j["grid_steps"] = grid_steps;
  if (lambda) j["lambda"] = *lambda;
  return j.dump(2);
}

}  // namespace wiretap
