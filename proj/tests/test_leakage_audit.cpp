#include <doctest.h>

#include <json.hpp>

#include "wiretap/leakage_audit.hpp"

using namespace wiretap;

namespace {

const InputDistribution kUniformBinary{{0.5, 0.5}};

ChannelModel bsc_cascade(double p_bob, double p_eve) {
  return ChannelModel::from_cascade({bsc_matrix(p_bob), bsc_matrix(p_eve)});
}

ChannelModel deaf_eve() {
  return ChannelModel::from_cascade({bsc_matrix(0.1), pure_noise_matrix(2, 2)});
}

struct Setup {
  ChannelModel model;
  SlotSchedule schedule;
  SessionCodebooks books;
};

Setup make_setup(const ChannelModel& model, int lambda, int n, int slots,
                 std::uint64_t seed, int bin_bits = 1) {
  auto schedule = make_schedule(lambda, 1, n, slots, 0);
  auto books = SessionCodebooks::build(schedule, model, kUniformBinary, bin_bits, seed);
  return Setup{model, std::move(schedule), std::move(books)};
}

}  // namespace

TEST_CASE("single-slot joint reproduces the codebook leakage oracle") {
  const auto model = bsc_cascade(0.1, 0.3);
  for (std::uint64_t seed : {1ULL, 5ULL, 9ULL}) {
    const auto s = make_setup(model, 2, 3, 1, seed);
    const JointState joint(s.model, s.schedule, s.books, 1);
    const double via_joint = joint.mi({joint.var("W11")}, {joint.var("Z11")});
    const double oracle = exact_block_leakage(s.books.wiretap, model);
    CHECK(via_joint == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(joint.wiretap_block_leakage(1) == doctest::Approx(oracle).epsilon(1e-12));
  }
}

TEST_CASE("joint state bookkeeping counts variables and states") {
  const auto s = make_setup(bsc_cascade(0.1, 0.3), 2, 2, 2, 4);
  const JointState joint(s.model, s.schedule, s.books, 2);
  // W11, J1, Z11 | W21, J2, Z21, W22, Z22 with 4 z-states at n=2
  CHECK(joint.variables().size() == 8);
  CHECK(joint.total_states() == 2ULL * 2 * 4 * 2 * 2 * 4 * 2 * 4);
  CHECK(joint.message_vars(2).size() == 2);
  CHECK(joint.eve_history(2).size() == 3);
  CHECK(joint.has_var("W22"));
  CHECK_FALSE(joint.has_var("W12"));
  CHECK_THROWS_AS(joint.var("Q1"), std::invalid_argument);
}

TEST_CASE("joint enumeration cap raises a budget error") {
  const auto s = make_setup(bsc_cascade(0.1, 0.3), 2, 2, 2, 4);
  CHECK_THROWS_AS(JointState(s.model, s.schedule, s.books, 2, 1024), BudgetError);
}

TEST_CASE("a deaf Eve leaks nothing anywhere in the chain") {
  const auto s = make_setup(deaf_eve(), 2, 2, 3, 11);
  const JointState joint(s.model, s.schedule, s.books, 3);
  const auto report = full_audit(joint);
  CHECK(report.all_pass());
  for (const auto& point : report.leakage)
    CHECK(point.bits == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("slot-2 decomposition: every structural term vanishes exactly") {
  const auto model = bsc_cascade(0.1, 0.3);
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL, 5ULL}) {
    const auto s = make_setup(model, 2, 2, 2, seed);
    const JointState joint(s.model, s.schedule, s.books, 2);
    const auto report = audit_slot2(joint);
    CHECK(report.structural_pass());
    for (const char* key : {"eq11", "eq14", "eq16", "eq19", "eq17_otp"}) {
      const AuditTerm* t = report.find(key);
      REQUIRE(t != nullptr);
      CHECK(std::abs(t->value) <= 1e-9);
    }
    const AuditTerm* bound = report.find("eq22_bound");
    REQUIRE(bound != nullptr);
    CHECK(bound->pass);
    // leakage table covers (1,1), (1,2), (2,2)
    CHECK(report.leakage.size() == 3);
    CHECK(report.leakage[0].bits == doctest::Approx(report.leakage[1].bits).epsilon(1e-9));
  }
}

TEST_CASE("slot-2 audit requires a hybrid second slot") {
  const auto s = make_setup(bsc_cascade(0.1, 0.3), 1, 2, 2, 1);
  const JointState joint(s.model, s.schedule, s.books, 2);
  CHECK_THROWS_AS(audit_slot2(joint), std::invalid_argument);
}

TEST_CASE("induction step holds for every message at the three-slot horizon") {
  const auto model = bsc_cascade(0.1, 0.3);
  const auto s = make_setup(model, 2, 2, 3, 7);
  const JointState joint(s.model, s.schedule, s.books, 3);

  for (int m = 1; m <= 3; ++m) {
    const auto report = audit_induction(joint, m, 2);
    CHECK(report.structural_pass());
    const AuditTerm* bound = report.find("eq49_bound");
    REQUIRE(bound != nullptr);
    CHECK(bound->pass);
    const AuditTerm* chain = report.find("eq28_chain");
    REQUIRE(chain != nullptr);
    CHECK(chain->pass);
  }

  // the first message leaks only through its own block, at any horizon
  const auto first = audit_induction(joint, 1, 2);
  const AuditTerm* ident = first.find("w1_identity");
  REQUIRE(ident != nullptr);
  CHECK(ident->pass);
  CHECK(ident->lhs == doctest::Approx(joint.wiretap_block_leakage(1)).epsilon(1e-9));

  // the fresh message is independent of everything Eve saw before
  const auto fresh = audit_induction(joint, 3, 2);
  const AuditTerm* eq38 = fresh.find("eq38");
  REQUIRE(eq38 != nullptr);
  CHECK(std::abs(eq38->value) <= 1e-9);

  CHECK_THROWS_AS(audit_induction(joint, 4, 2), std::invalid_argument);
  CHECK_THROWS_AS(audit_induction(joint, 1, 3), std::invalid_argument);
}

TEST_CASE("leakage about a fixed message never decreases with the horizon") {
  const auto model = bsc_cascade(0.1, 0.3);
  const auto s = make_setup(model, 2, 2, 3, 13);
  const JointState joint(s.model, s.schedule, s.books, 3);
  double prev = 0.0;
  for (int k = 1; k <= 3; ++k) {
    const double bits = joint.mi(joint.message_vars(1), joint.eve_history(k));
    CHECK(bits >= prev - 1e-12);
    prev = bits;
  }
}

TEST_CASE("full audit aggregates slot-2 and induction terms with prefixed keys") {
  const auto s = make_setup(bsc_cascade(0.1, 0.3), 2, 2, 3, 3);
  const JointState joint(s.model, s.schedule, s.books, 3);
  const auto report = full_audit(joint);
  CHECK(report.find("eq11") != nullptr);
  CHECK(report.find("s3.m1.eq49_bound") != nullptr);
  CHECK(report.find("s3.m3.eq38") != nullptr);
  CHECK(report.structural_pass());
  // leakage table: (m,k) for all m <= k <= 3
  CHECK(report.leakage.size() == 6);

  const auto parsed = nlohmann::json::parse(report.to_json(joint.n()));
  CHECK(parsed.at("structural_pass").get<bool>());
  CHECK(parsed.at("terms").at("eq11").is_number());
  CHECK(parsed.at("terms").at("eq22_bound").at("kind") == "bound");
  CHECK(parsed.at("leakage").size() == 6);
}

TEST_CASE("empirical estimate brackets the exact leakage") {
  const auto model = bsc_cascade(0.1, 0.3);
  const auto s = make_setup(model, 2, 2, 2, 21);
  const JointState joint(s.model, s.schedule, s.books, 2);
  const double exact = joint.mi(joint.message_vars(1), joint.eve_history(1));

  std::vector<TranscriptRecord> transcripts;
  Rng rng(99);
  for (int t = 0; t < 4000; ++t)
    transcripts.push_back(run_session(model, s.schedule, s.books, rng));

  Rng boot(7);
  const auto est = empirical_leakage_estimate(transcripts, 1, 1, model.z_size(), boot);
  CHECK(est.samples == 4000);
  CHECK(est.ci_lo <= est.estimate);
  CHECK(est.estimate <= est.ci_hi);
  CHECK(exact >= est.ci_lo - 0.02);
  CHECK(exact <= est.ci_hi + 0.02);
}

TEST_CASE("empirical estimate refuses undersized or oversized inputs") {
  const auto model = bsc_cascade(0.1, 0.3);
  const auto s = make_setup(model, 2, 2, 2, 21);
  Rng rng(1);
  std::vector<TranscriptRecord> few;
  for (int t = 0; t < 10; ++t) few.push_back(run_session(model, s.schedule, s.books, rng));
  Rng boot(2);
  CHECK_THROWS_WITH_AS(empirical_leakage_estimate(few, 1, 1, model.z_size(), boot),
                       doctest::Contains("insufficient samples"), DomainError);
  CHECK_THROWS_AS(empirical_leakage_estimate(few, 1, 5, model.z_size(), boot, 10, 1),
                  std::invalid_argument);
}
