// Exact enumeration of the multi-slot joint law over messages,
// randomization indices and Eve's blocks, plus the mutual-information
// identities and bounds the chaining argument rests on.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wiretap/chain_protocol.hpp"
#include "wiretap/channel.hpp"
#include "wiretap/common.hpp"

namespace wiretap {

constexpr std::uint64_t kDefaultJointCap = 1ULL << 26;
constexpr double kAuditTol = 1e-9;

enum class VarKind { Message, Randomization, EveBlock };

struct JointVariable {
  std::string name;
  VarKind kind;
  int card = 0;
  int slot = 0;
  int width_bits = 0;  // message width; 0 for Eve blocks / randomization
};

// Factored representation of the exact joint law implied by uniform
// messages, stochastic wiretap encoding, XOR chaining and the memoryless
// channel. Marginals over arbitrary variable groups are computed on demand.
class JointState {
 public:
  JointState(const ChannelModel& model, const SlotSchedule& schedule,
             const SessionCodebooks& books, int num_slots,
             std::uint64_t state_cap = kDefaultJointCap);

  int num_slots() const { return num_slots_; }
  int n() const { return n_; }
  std::uint64_t total_states() const { return total_states_; }
  const std::vector<JointVariable>& variables() const { return vars_; }

  int var(const std::string& name) const;
  bool has_var(const std::string& name) const;
  // Message variables of slot m: wiretap part then keyed part, as present.
  std::vector<int> message_vars(int slot) const;
  std::vector<int> eve_vars(int slot) const;
  std::vector<int> eve_history(int upto_slot) const;

  // Dense p(a,b,c) over composite group indices; dims returned via out-params.
  std::vector<double> marginal(const std::vector<int>& a, const std::vector<int>& b,
                               const std::vector<int>& c, std::size_t* dim_a,
                               std::size_t* dim_b, std::size_t* dim_c) const;

  double mi(const std::vector<int>& a, const std::vector<int>& b) const;
  double cmi(const std::vector<int>& a, const std::vector<int>& b,
             const std::vector<int>& c) const;

  // Exact I(wiretap message of slot m; its own Eve block).
  double wiretap_block_leakage(int slot) const;

 private:
  struct MiniSlotLaw {
    enum Type { Wiretap, Keyed } type = Wiretap;
    int z_var = -1;
    int w_var = -1;  // wiretap message or keyed payload variable
    int j_var = -1;  // randomization (wiretap only)
    std::vector<std::pair<int, int>> key_vars;  // (var, width), big-endian
    std::size_t num_rows = 0;
    std::size_t num_zstates = 0;
    std::vector<double> lik;  // [row][zstate]
  };

  std::size_t row_of(const MiniSlotLaw& law, const std::vector<int>& vals) const;

  int num_slots_ = 0;
  int n_ = 0;
  std::uint64_t total_states_ = 0;
  std::vector<JointVariable> vars_;
  std::map<std::string, int> var_index_;
  std::vector<int> hidden_vars_;  // all Message + Randomization variables
  std::vector<MiniSlotLaw> laws_;
  mutable std::map<std::string, double> cache_;
};

struct AuditTerm {
  enum Kind { Zero, Identity, Bound };
  std::string key;
  std::string description;
  Kind kind = Zero;
  double value = 0.0;  // Zero terms
  double lhs = 0.0, rhs = 0.0;  // Identity / Bound terms
  double tol = kAuditTol;
  bool pass = false;
};

struct LeakagePoint {
  int m = 0, k = 0;
  double bits = 0.0;
  double normalized = 0.0;  // bits / n
};

struct LeakageReport {
  std::vector<AuditTerm> terms;
  std::vector<LeakagePoint> leakage;

  const AuditTerm* find(const std::string& key) const;
  bool structural_pass() const;  // all Zero and Identity terms
  bool all_pass() const;
  std::string to_json(int n, int indent = 2) const;
};

// Slot-2 decomposition: every term the chaining argument makes exactly
// zero, the leakage identity for the first message, and the two-block bound.
LeakageReport audit_slot2(const JointState& joint);

// Induction step k -> k+1 for message m <= k+1.
LeakageReport audit_induction(const JointState& joint, int m, int k);

// Slot-2 audit plus every induction step within the joint's horizon, with
// the per-(m,k) leakage table.
LeakageReport full_audit(const JointState& joint);

struct MiEstimate {
  double estimate = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::size_t samples = 0;
};

// Plug-in estimate of I(slot-m message; Eve blocks of slots 1..k) with a
// bootstrap 95% interval; consistency check for sizes beyond enumeration.
MiEstimate empirical_leakage_estimate(const std::vector<TranscriptRecord>& transcripts,
                                      int m, int k, int z_size, Rng& rng,
                                      int bootstrap_reps = 200,
                                      std::size_t min_samples = 1000);

}  // namespace wiretap
