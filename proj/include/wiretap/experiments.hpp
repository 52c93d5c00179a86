// Monte-Carlo harness: component error rates, error-propagation curves,
// rate ramp tables and reproducible CSV/manifest emission.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wiretap/chain_protocol.hpp"
#include "wiretap/channel.hpp"
#include "wiretap/infotheory.hpp"

namespace wiretap {

struct ExperimentConfig {
  std::string channel_json;  // inline channel config (resolved from file refs)
  int n = 8;
  int rate_bits = 1;
  int bin_bits = 0;  // 0 = default
  int slots = 3;
  int trials = 10000;
  int restart_period = 0;
  std::uint64_t seed = 0;
  std::optional<int> lambda;  // override; otherwise derived via rate_profile
  int grid_steps = 201;

  static ExperimentConfig from_json(const std::string& json_text,
                                    const std::string& base_dir = ".");
  static ExperimentConfig from_file(const std::string& path);
  std::string manifest_json() const;
};

struct Interval {
  double estimate = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

// Wilson score interval at 95%.
Interval wilson_interval(std::size_t successes, std::size_t trials);

struct ErrorEstimate {
  Interval wiretap;                 // epsilon-hat: wiretap message error
  std::vector<Interval> keyed;      // delta-hat per keyed codebook width
  std::vector<int> keyed_widths;
  std::size_t trials = 0;

  double delta_max() const;
};

// Monte-Carlo single-code error rates over Bob's channel.
ErrorEstimate measure_component_errors(const ChannelModel& model,
                                       const SessionCodebooks& books, int trials,
                                       std::uint64_t seed, int threads = 0);

struct PropagationPoint {
  int slot = 0;
  double p_err = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;
  double bound = 0.0;  // position*eps + (position-1)*delta + 3 sigma
  bool flag = false;   // true when the measured rate exceeds the bound
};

struct PropagationCurve {
  std::vector<PropagationPoint> points;
  ErrorEstimate components;
};

PropagationCurve error_propagation_curve(const ChannelModel& model,
                                         const SlotSchedule& schedule,
                                         const SessionCodebooks& books, int trials,
                                         std::uint64_t seed, int threads = 0);

struct RampPoint {
  int slot = 0;
  int mini_slots = 0;
  double rate = 0.0;            // bits per channel use, in R_s units of the profile
  double cumulative_avg = 0.0;  // average rate over slots 1..k
};

struct RampTable {
  std::vector<RampPoint> points;
  double limit = 0.0;  // lambda * R_s
  bool ratio_is_integer = false;
};

RampTable rate_ramp(const RateProfile& profile, int slots);

// Two-proportion z test; returns |z| (1.96 is the 95% critical value).
double two_proportion_z(std::size_t err_a, std::size_t n_a, std::size_t err_b,
                        std::size_t n_b);

std::string ramp_csv(const RampTable& table);
std::string errors_csv(const PropagationCurve& curve);

}  // namespace wiretap
