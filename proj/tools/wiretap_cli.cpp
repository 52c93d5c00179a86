// Command-line front end: rate computation, schedule preview, Monte-Carlo
// simulation and exact leakage audit.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "wiretap/chain_protocol.hpp"
#include "wiretap/channel.hpp"
#include "wiretap/experiments.hpp"
#include "wiretap/infotheory.hpp"
#include "wiretap/leakage_audit.hpp"

namespace {

using namespace wiretap;

void print_profile(const RateProfile& profile) {
  std::printf("C=%.6f\n", profile.main_capacity);
  std::printf("R_s=%.6f\n", profile.secrecy_capacity);
  std::printf("lambda=%d\n", profile.lambda);
  std::printf("ratio_is_integer=%s\n", profile.ratio_is_integer ? "true" : "false");
  if (!profile.optimizer_c.probs.empty()) {
    std::printf("optimizer_c=");
    for (std::size_t i = 0; i < profile.optimizer_c.probs.size(); ++i)
      std::printf("%s%.6f", i ? "," : "", profile.optimizer_c.probs[i]);
    std::printf("\noptimizer_rs=");
    for (std::size_t i = 0; i < profile.optimizer_rs.probs.size(); ++i)
      std::printf("%s%.6f", i ? "," : "", profile.optimizer_rs.probs[i]);
    std::printf("\n");
  }
}

InputDistribution uniform_input(int x_size) {
  return InputDistribution{std::vector<double>(x_size, 1.0 / x_size)};
}

struct Session {
  ChannelModel model;
  RateProfile profile;
  SlotSchedule schedule;
  SessionCodebooks books;
};

Session open_session(const ExperimentConfig& cfg) {
  ChannelModel model = load_channel_json(cfg.channel_json);
  RateProfile profile;
  SlotSchedule schedule;
  if (cfg.lambda) {
    // Explicit lambda skips the capacity computation; used for desk-scale
    // audits where rate_bits/n intentionally exceeds R_s.
    schedule = make_schedule(*cfg.lambda, cfg.rate_bits, cfg.n, cfg.slots,
                             cfg.restart_period);
    try {
      profile = rate_profile(model, cfg.grid_steps);
      profile.lambda = *cfg.lambda;
    } catch (const NoSecrecyError&) {
      profile.secrecy_capacity = 0.0;
      profile.lambda = *cfg.lambda;
    }
  } else {
    profile = rate_profile(model, cfg.grid_steps);
    schedule = build_schedule(profile, cfg.rate_bits, cfg.n, cfg.slots,
                              cfg.restart_period);
  }
  const InputDistribution dist = profile.optimizer_rs.probs.empty()
                                     ? uniform_input(model.x_size())
                                     : profile.optimizer_rs;
  SessionCodebooks books =
      SessionCodebooks::build(schedule, model, dist, cfg.bin_bits, cfg.seed);
  return Session{std::move(model), std::move(profile), std::move(schedule),
                 std::move(books)};
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path.string());
  out << content;
}

int cmd_rates(const std::string& channel_path, int grid_steps) {
  print_profile(rate_profile(load_channel_file(channel_path), grid_steps));
  return 0;
}

int cmd_gaussian(double power, double sigma_b_sq, double sigma_e_sq) {
  print_profile(gaussian_rates(GaussianWiretapParams{power, sigma_b_sq, sigma_e_sq}));
  return 0;
}

int cmd_schedule(const ExperimentConfig& cfg) {
  const Session session = open_session(cfg);
  std::printf("slot,position,minislots,wiretap_msgs,keyed_msgs,keyed_bits,total_bits,rate,restart\n");
  for (const SlotSpec& s : session.schedule.slots)
    std::printf("%d,%d,%d,%d,%d,%d,%d,%.10g,%d\n", s.index, s.position, s.mini_slots,
                s.wiretap_msgs, s.keyed_msgs, s.keyed_bits, s.total_bits, s.slot_rate,
                s.restart ? 1 : 0);
  return 0;
}

int cmd_simulate(const ExperimentConfig& cfg, const std::string& out_dir, int threads) {
  const Session session = open_session(cfg);
  std::filesystem::create_directories(out_dir);

  RateProfile ramp_profile = session.profile;
  const RampTable ramp = rate_ramp(ramp_profile, cfg.slots);
  const PropagationCurve curve = error_propagation_curve(
      session.model, session.schedule, session.books, cfg.trials, cfg.seed, threads);

  write_file(std::filesystem::path(out_dir) / "ramp.csv", ramp_csv(ramp));
  write_file(std::filesystem::path(out_dir) / "errors.csv", errors_csv(curve));
  write_file(std::filesystem::path(out_dir) / "manifest.json", cfg.manifest_json());
  std::printf("wrote %s/ramp.csv %s/errors.csv %s/manifest.json\n", out_dir.c_str(),
              out_dir.c_str(), out_dir.c_str());
  return 0;
}

int cmd_leakage(const ExperimentConfig& cfg, const std::string& out_dir) {
  const Session session = open_session(cfg);
  const JointState joint(session.model, session.schedule, session.books, cfg.slots);
  const LeakageReport report = full_audit(joint);

  std::filesystem::create_directories(out_dir);
  write_file(std::filesystem::path(out_dir) / "leakage.json",
             report.to_json(cfg.n) + "\n");
  std::printf("states=%llu structural_pass=%s all_pass=%s\n",
              static_cast<unsigned long long>(joint.total_states()),
              report.structural_pass() ? "true" : "false",
              report.all_pass() ? "true" : "false");
  return report.structural_pass() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Key-chaining wiretap protocol: rates, simulation, leakage audit"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int trials = 0, threads = 0, grid_steps = 201;
  double power = 0, sigma_b_sq = 0, sigma_e_sq = 0;

  auto* rates = app.add_subcommand("rates", "Capacity and secrecy capacity of a channel");
  rates->add_option("--config", config_path, "channel config file")->required();
  rates->add_option("--grid-steps", grid_steps, "simplex grid steps");

  auto* gaussian = app.add_subcommand("gaussian", "Gaussian wiretap closed forms");
  gaussian->add_option("--power", power)->required();
  gaussian->add_option("--sigma-b-sq", sigma_b_sq)->required();
  gaussian->add_option("--sigma-e-sq", sigma_e_sq)->required();

  auto* schedule = app.add_subcommand("schedule", "Preview the slot schedule");
  schedule->add_option("--config", config_path, "experiment config file")->required();

  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo error/rate simulation");
  simulate->add_option("--config", config_path, "experiment config file")->required();
  simulate->add_option("--out", out_dir, "output directory");
  simulate->add_option("--seed", seed)->each([&](const std::string&) { seed_set = true; });
  simulate->add_option("--trials", trials);
  simulate->add_option("--threads", threads);

  auto* leakage = app.add_subcommand("leakage", "Exact leakage audit");
  leakage->add_option("--config", config_path, "experiment config file")->required();
  leakage->add_option("--out", out_dir, "output directory");
  leakage->add_option("--seed", seed)->each([&](const std::string&) { seed_set = true; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (rates->parsed()) return cmd_rates(config_path, grid_steps);
    if (gaussian->parsed())
      return cmd_gaussian(power, sigma_b_sq, sigma_e_sq);

    ExperimentConfig cfg = ExperimentConfig::from_file(config_path);
    if (seed_set) cfg.seed = seed;
    if (trials > 0) cfg.trials = trials;
    if (schedule->parsed()) return cmd_schedule(cfg);
    if (simulate->parsed()) return cmd_simulate(cfg, out_dir, threads);
    if (leakage->parsed()) return cmd_leakage(cfg, out_dir);
  } catch (const wiretap::UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const wiretap::DomainError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
