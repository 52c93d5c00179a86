#include "wiretap/leakage_audit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "wiretap/infotheory.hpp"

namespace wiretap {

namespace {

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > ~0ULL / a) return ~0ULL;
  return a * b;
}

// z-block index: first channel use is the most significant digit.
void fill_likelihood(const ChannelModel& model, std::span<const std::uint8_t> codeword,
                     std::size_t num_zstates, double* out) {
  const int n = static_cast<int>(codeword.size());
  const int z_size = model.z_size();
  for (std::size_t zi = 0; zi < num_zstates; ++zi) {
    std::size_t rem = zi;
    double p = 1.0;
    for (int i = n - 1; i >= 0; --i) {
      p *= model.p_z(codeword[i], static_cast<int>(rem % z_size));
      rem /= z_size;
    }
    out[zi] = p;
  }
}

}  // namespace

JointState::JointState(const ChannelModel& model, const SlotSchedule& schedule,
                       const SessionCodebooks& books, int num_slots,
                       std::uint64_t state_cap) {
  if (num_slots < 1 || num_slots > static_cast<int>(schedule.slots.size()))
    throw std::invalid_argument("num_slots outside schedule");
  n_ = schedule.n;
  num_slots_ = num_slots;

  std::size_t z_states = 1;
  for (int i = 0; i < n_; ++i) z_states = checked_mul(z_states, model.z_size());

  auto add_var = [&](const std::string& name, VarKind kind, std::size_t card, int slot,
                     int width) {
    vars_.push_back(JointVariable{name, kind, static_cast<int>(card), slot, width});
    var_index_[name] = static_cast<int>(vars_.size()) - 1;
    if (kind != VarKind::EveBlock) hidden_vars_.push_back(static_cast<int>(vars_.size()) - 1);
    return static_cast<int>(vars_.size()) - 1;
  };

  total_states_ = 1;
  for (int m = 1; m <= num_slots_; ++m) {
    const SlotSpec& slot = schedule.slots[m - 1];
    const std::string tag = std::to_string(m);
    if (slot.wiretap_msgs > 0) {
      const WiretapCodebook& wb = books.wiretap;
      if (wb.rate_bits() != slot.wiretap_bits)
        throw DomainError("wiretap codebook width does not match schedule");
      const int w = add_var("W" + tag + "1", VarKind::Message, wb.num_bins(), m,
                            slot.wiretap_bits);
      const int j = add_var("J" + tag, VarKind::Randomization, wb.bin_size(), m, 0);
      const int z = add_var("Z" + tag + "1", VarKind::EveBlock, z_states, m, 0);
      MiniSlotLaw law;
      law.type = MiniSlotLaw::Wiretap;
      law.z_var = z;
      law.w_var = w;
      law.j_var = j;
      law.num_rows = wb.num_bins() * wb.bin_size();
      law.num_zstates = z_states;
      law.lik.resize(law.num_rows * z_states);
      for (std::size_t r = 0; r < law.num_rows; ++r)
        fill_likelihood(model, wb.row(r), z_states, law.lik.data() + r * z_states);
      laws_.push_back(std::move(law));
    }
    if (slot.keyed_bits > 0) {
      const ChannelCodebook& cb = books.keyed.at(slot.keyed_bits);
      const int w = add_var("W" + tag + "2", VarKind::Message, cb.num_codewords(), m,
                            slot.keyed_bits);
      const int z = add_var("Z" + tag + "2", VarKind::EveBlock, z_states, m, 0);
      MiniSlotLaw law;
      law.type = MiniSlotLaw::Keyed;
      law.z_var = z;
      law.w_var = w;
      int key_width = 0;
      for (int kv : message_vars(m - 1)) {
        law.key_vars.emplace_back(kv, vars_[kv].width_bits);
        key_width += vars_[kv].width_bits;
      }
      if (key_width != slot.keyed_bits)
        throw DomainError("key width mismatch in slot " + std::to_string(m) +
                          ": schedule violates key availability");
      law.num_rows = cb.num_codewords();
      law.num_zstates = z_states;
      law.lik.resize(law.num_rows * z_states);
      for (std::size_t r = 0; r < law.num_rows; ++r)
        fill_likelihood(model, cb.codeword(r), z_states, law.lik.data() + r * z_states);
      laws_.push_back(std::move(law));
    }
  }

  for (const JointVariable& v : vars_)
    total_states_ = checked_mul(total_states_, static_cast<std::uint64_t>(v.card));
  if (total_states_ > state_cap)
    throw BudgetError("joint enumeration cap exceeded: " +
                      std::to_string(total_states_) + " states > cap " +
                      std::to_string(state_cap) + "; reduce n or slots");
}

int JointState::var(const std::string& name) const {
  const auto it = var_index_.find(name);
  if (it == var_index_.end())
    throw std::invalid_argument("unknown joint variable: " + name);
  return it->second;
}

bool JointState::has_var(const std::string& name) const {
  return var_index_.count(name) > 0;
}

std::vector<int> JointState::message_vars(int slot) const {
  std::vector<int> out;
  const std::string tag = std::to_string(slot);
  if (has_var("W" + tag + "1")) out.push_back(var("W" + tag + "1"));
  if (has_var("W" + tag + "2")) out.push_back(var("W" + tag + "2"));
  if (out.empty()) throw std::invalid_argument("slot " + tag + " not in joint");
  return out;
}

std::vector<int> JointState::eve_vars(int slot) const {
  std::vector<int> out;
  const std::string tag = std::to_string(slot);
  if (has_var("Z" + tag + "1")) out.push_back(var("Z" + tag + "1"));
  if (has_var("Z" + tag + "2")) out.push_back(var("Z" + tag + "2"));
  return out;
}

std::vector<int> JointState::eve_history(int upto_slot) const {
  std::vector<int> out;
  for (int m = 1; m <= upto_slot; ++m)
    for (int v : eve_vars(m)) out.push_back(v);
  return out;
}

std::size_t JointState::row_of(const MiniSlotLaw& law, const std::vector<int>& vals) const {
  if (law.type == MiniSlotLaw::Wiretap)
    return static_cast<std::size_t>(vals[law.w_var]) * vars_[law.j_var].card +
           vals[law.j_var];
  std::uint64_t key = 0;
  for (const auto& [kv, width] : law.key_vars) key = (key << width) | vals[kv];
  return static_cast<std::size_t>(vals[law.w_var]) ^ key;
}

std::vector<double> JointState::marginal(const std::vector<int>& a,
                                         const std::vector<int>& b,
                                         const std::vector<int>& c, std::size_t* dim_a,
                                         std::size_t* dim_b, std::size_t* dim_c) const {
  const std::vector<const std::vector<int>*> groups{&a, &b, &c};
  std::size_t dims[3] = {1, 1, 1};
  std::vector<int> z_query;
  for (int g = 0; g < 3; ++g)
    for (int v : *groups[g]) {
      dims[g] *= vars_[v].card;
      if (vars_[v].kind == VarKind::EveBlock) z_query.push_back(v);
    }
  std::sort(z_query.begin(), z_query.end());
  z_query.erase(std::unique(z_query.begin(), z_query.end()), z_query.end());

  std::vector<const MiniSlotLaw*> active;
  for (const MiniSlotLaw& law : laws_)
    if (std::binary_search(z_query.begin(), z_query.end(), law.z_var))
      active.push_back(&law);

  double hidden_weight = 1.0;
  for (int v : hidden_vars_) hidden_weight /= vars_[v].card;

  std::vector<double> out(dims[0] * dims[1] * dims[2], 0.0);
  std::vector<int> vals(vars_.size(), 0);
  std::vector<const double*> rows(active.size());

  const auto group_index = [&](const std::vector<int>& group) {
    std::size_t idx = 0;
    for (int v : group) idx = idx * vars_[v].card + vals[v];
    return idx;
  };

  // Odometer over hidden (message + randomization) variables; Eve blocks
  // outside the query integrate out of their factors exactly.
  bool hidden_done = false;
  while (!hidden_done) {
    for (std::size_t i = 0; i < active.size(); ++i)
      rows[i] = active[i]->lik.data() + row_of(*active[i], vals) * active[i]->num_zstates;

    bool z_done = false;
    while (!z_done) {
      double p = hidden_weight;
      for (std::size_t i = 0; i < active.size(); ++i)
        p *= rows[i][vals[active[i]->z_var]];
      if (p != 0.0) {
        const std::size_t ia = group_index(a);
        const std::size_t ib = group_index(b);
        const std::size_t ic = group_index(c);
        out[(ia * dims[1] + ib) * dims[2] + ic] += p;
      }
      z_done = true;
      for (int v : z_query) {
        if (++vals[v] < vars_[v].card) {
          z_done = false;
          break;
        }
        vals[v] = 0;
      }
    }

    hidden_done = true;
    for (int v : hidden_vars_) {
      if (++vals[v] < vars_[v].card) {
        hidden_done = false;
        break;
      }
      vals[v] = 0;
    }
  }

  *dim_a = dims[0];
  *dim_b = dims[1];
  *dim_c = dims[2];
  return out;
}

namespace {

std::string cache_key(const char* op, const std::vector<JointVariable>& vars,
                      std::initializer_list<const std::vector<int>*> groups) {
  std::ostringstream ss;
  ss << op;
  for (const auto* g : groups) {
    ss << '|';
    for (int v : *g) ss << vars[v].name << ',';
  }
  return ss.str();
}

}  // namespace

double JointState::mi(const std::vector<int>& a, const std::vector<int>& b) const {
  const std::string key = cache_key("mi", vars_, {&a, &b});
  if (const auto it = cache_.find(key); it != cache_.end()) return it->second;

  std::size_t da, db, dc;
  const std::vector<double> p = marginal(a, b, {}, &da, &db, &dc);
  Matrix joint(da, std::vector<double>(db));
  for (std::size_t i = 0; i < da; ++i)
    for (std::size_t j = 0; j < db; ++j) joint[i][j] = p[i * db + j];
  const double value = mutual_information(joint);
  cache_[key] = value;
  return value;
}

double JointState::cmi(const std::vector<int>& a, const std::vector<int>& b,
                       const std::vector<int>& c) const {
  if (c.empty()) return mi(a, b);
  const std::string key = cache_key("cmi", vars_, {&a, &b, &c});
  if (const auto it = cache_.find(key); it != cache_.end()) return it->second;

  std::size_t da, db, dc;
  const std::vector<double> p = marginal(a, b, c, &da, &db, &dc);
  std::vector<Matrix> tensor(da, Matrix(db, std::vector<double>(dc)));
  for (std::size_t i = 0; i < da; ++i)
    for (std::size_t j = 0; j < db; ++j)
      for (std::size_t l = 0; l < dc; ++l)
        tensor[i][j][l] = p[(i * db + j) * dc + l];
  const double value = conditional_mi(tensor);
  cache_[key] = value;
  return value;
}

double JointState::wiretap_block_leakage(int slot) const {
  const std::string tag = std::to_string(slot);
  if (!has_var("W" + tag + "1")) return 0.0;
  return mi({var("W" + tag + "1")}, {var("Z" + tag + "1")});
}

const AuditTerm* LeakageReport::find(const std::string& key) const {
  for (const AuditTerm& t : terms)
    if (t.key == key) return &t;
  return nullptr;
}

bool LeakageReport::structural_pass() const {
  for (const AuditTerm& t : terms)
    if (t.kind != AuditTerm::Bound && !t.pass) return false;
  return true;
}

bool LeakageReport::all_pass() const {
  for (const AuditTerm& t : terms)
    if (!t.pass) return false;
  return true;
}

std::string LeakageReport::to_json(int n, int indent) const {
  nlohmann::json j;
  j["n"] = n;
  nlohmann::json jt = nlohmann::json::object();
  for (const AuditTerm& t : terms) {
    if (t.kind == AuditTerm::Zero) {
      jt[t.key] = t.value;
    } else {
      jt[t.key] = {{"lhs", t.lhs},
                   {"rhs", t.rhs},
                   {"pass", t.pass},
                   {"kind", t.kind == AuditTerm::Identity ? "identity" : "bound"}};
    }
  }
  j["terms"] = jt;
  nlohmann::json jl = nlohmann::json::array();
  for (const LeakagePoint& p : leakage)
    jl.push_back({{"m", p.m}, {"k", p.k}, {"bits", p.bits}, {"normalized", p.normalized}});
  j["leakage"] = jl;
  j["structural_pass"] = structural_pass();
  j["all_pass"] = all_pass();
  return j.dump(indent);
}

namespace {

void add_zero(LeakageReport& rep, const std::string& key, const std::string& desc,
              double value) {
  AuditTerm t;
  t.key = key;
  t.description = desc;
  t.kind = AuditTerm::Zero;
  t.value = value;
  t.pass = std::abs(value) <= kAuditTol;
  rep.terms.push_back(std::move(t));
}

void add_identity(LeakageReport& rep, const std::string& key, const std::string& desc,
                  double lhs, double rhs) {
  AuditTerm t;
  t.key = key;
  t.description = desc;
  t.kind = AuditTerm::Identity;
  t.lhs = lhs;
  t.rhs = rhs;
  t.pass = std::abs(lhs - rhs) <= kAuditTol;
  rep.terms.push_back(std::move(t));
}

void add_bound(LeakageReport& rep, const std::string& key, const std::string& desc,
               double lhs, double rhs) {
  AuditTerm t;
  t.key = key;
  t.description = desc;
  t.kind = AuditTerm::Bound;
  t.lhs = lhs;
  t.rhs = rhs;
  t.pass = lhs <= rhs + kAuditTol;
  rep.terms.push_back(std::move(t));
}

// Sum of exact wiretap-block leakages of slots 1..m: the finite-n stand-in
// for the asymptotic epsilon terms.
double accumulated_block_leakage(const JointState& joint, int m) {
  double sum = 0.0;
  for (int s = 1; s <= m; ++s) sum += joint.wiretap_block_leakage(s);
  return sum;
}

}  // namespace

LeakageReport audit_slot2(const JointState& joint) {
  if (joint.num_slots() < 2 || !joint.has_var("W21") || !joint.has_var("W22"))
    throw std::invalid_argument("audit_slot2 needs a two-mini-slot slot 2");
  const int W11 = joint.var("W11"), W21 = joint.var("W21"), W22 = joint.var("W22");
  const int Z11 = joint.var("Z11"), Z21 = joint.var("Z21"), Z22 = joint.var("Z22");

  LeakageReport rep;
  add_zero(rep, "eq11", "I(msg1; Eve slot-2 blocks | Eve slot-1 block)",
           joint.cmi({W11}, {Z21, Z22}, {Z11}));
  add_zero(rep, "eq14", "I(msg2; Eve slot-1 block)", joint.mi({W21, W22}, {Z11}));
  add_zero(rep, "eq16", "I(wiretap msg of slot 2; keyed Eve block | Eve slot-1 block)",
           joint.cmi({W21}, {Z22}, {Z11}));
  add_zero(rep, "eq19",
           "I(keyed msg of slot 2; wiretap Eve block | Eve slot-1 block, wiretap msg)",
           joint.cmi({W22}, {Z21}, {Z11, W21}));
  add_zero(rep, "eq17_otp", "one-time pad: I(keyed msg of slot 2; its Eve block)",
           joint.mi({W22}, {Z22}));

  const double w1_all = joint.mi({W11}, {Z11, Z21, Z22});
  const double w1_own = joint.mi({W11}, {Z11});
  add_identity(rep, "eq12_identity", "msg1 leaks only through its own block", w1_all,
               w1_own);

  const double w2_all = joint.mi({W21, W22}, {Z11, Z21, Z22});
  add_identity(rep, "eq13_chain", "chain rule recomposition for msg2", w2_all,
               joint.mi({W21, W22}, {Z11}) + joint.cmi({W21, W22}, {Z21, Z22}, {Z11}));
  add_bound(rep, "eq22_bound", "two-block leakage bound for msg2", w2_all,
            w1_own + joint.mi({W21}, {Z21}));

  const int n = joint.n();
  rep.leakage.push_back({1, 1, w1_own, w1_own / n});
  rep.leakage.push_back({1, 2, w1_all, w1_all / n});
  rep.leakage.push_back({2, 2, w2_all, w2_all / n});
  return rep;
}

LeakageReport audit_induction(const JointState& joint, int m, int k) {
  const int s = k + 1;
  if (k < 1 || s > joint.num_slots())
    throw std::invalid_argument("induction step outside the joint's horizon");
  if (m < 1 || m > s) throw std::invalid_argument("m must be in 1..k+1");

  const std::vector<int> past = joint.eve_history(k);
  const std::vector<int> msg_m = joint.message_vars(m);
  const std::string stag = std::to_string(s);
  const bool has_zs1 = joint.has_var("Z" + stag + "1");
  const bool has_zs2 = joint.has_var("Z" + stag + "2");
  const int n = joint.n();

  LeakageReport rep;
  auto with = [](std::vector<int> base, std::initializer_list<int> extra) {
    base.insert(base.end(), extra.begin(), extra.end());
    return base;
  };

  if (m <= k) {
    const std::string mtag = std::to_string(m);
    if (has_zs1) {
      const int Zs1 = joint.var("Z" + stag + "1");
      if (joint.has_var("W" + mtag + "1"))
        add_zero(rep, "eq30",
                 "I(wiretap msg of slot " + mtag + "; fresh wiretap block | past)",
                 joint.cmi({joint.var("W" + mtag + "1")}, {Zs1}, past));
      if (joint.has_var("W" + mtag + "2")) {
        std::vector<int> cond = past;
        if (joint.has_var("W" + mtag + "1")) cond.push_back(joint.var("W" + mtag + "1"));
        add_zero(rep, "eq31",
                 "I(keyed msg of slot " + mtag + "; fresh wiretap block | past, wiretap msg)",
                 joint.cmi({joint.var("W" + mtag + "2")}, {Zs1}, cond));
      }
      add_zero(rep, "eq32", "I(msg " + mtag + "; fresh wiretap block | past)",
               joint.cmi(msg_m, {Zs1}, past));
    }
    if (has_zs2) {
      const int Zs2 = joint.var("Z" + stag + "2");
      std::vector<int> cond = past;
      if (has_zs1) cond.push_back(joint.var("Z" + stag + "1"));
      add_zero(rep, m == k ? "eq35" : "eq45",
               "I(msg " + mtag + "; fresh keyed block | past, fresh wiretap block)",
               joint.cmi(msg_m, {Zs2}, cond));
      if (m == k && joint.has_var("W" + mtag + "2"))
        add_zero(rep, "eq35_otp", "key message does not show in the fresh keyed block",
                 joint.mi({joint.var("W" + mtag + "2")}, {Zs2}));
    }
  } else {
    // m == k + 1: the fresh slot's own message.
    add_zero(rep, "eq38", "fresh message independent of past Eve blocks",
             joint.mi(msg_m, past));
    if (joint.has_var("W" + stag + "2")) {
      const int Ws2 = joint.var("W" + stag + "2");
      if (has_zs1 && joint.has_var("W" + stag + "1"))
        add_zero(rep, "eq43",
                 "I(keyed msg; own wiretap block | own wiretap msg)",
                 joint.cmi({Ws2}, {joint.var("Z" + stag + "1")},
                           {joint.var("W" + stag + "1")}));
      if (has_zs2)
        add_zero(rep, "eq43_otp", "one-time pad: I(keyed msg; own keyed block)",
                 joint.mi({Ws2}, {joint.var("Z" + stag + "2")}));
    }
  }

  const std::vector<int> all = joint.eve_history(s);
  const double full = joint.mi(msg_m, all);
  add_identity(rep, "eq28_chain", "chain rule recomposition", full,
               joint.mi(msg_m, past) + joint.cmi(msg_m, with(joint.eve_vars(s), {}), past));
  if (m == 1)
    add_identity(rep, "w1_identity", "first message leaks only through its own block",
                 full, joint.mi(msg_m, joint.eve_vars(1)));
  add_bound(rep, "eq49_bound",
            "leakage bounded by accumulated wiretap-block leakages", full,
            accumulated_block_leakage(joint, m));

  rep.leakage.push_back({m, s, full, full / n});
  return rep;
}

LeakageReport full_audit(const JointState& joint) {
  LeakageReport rep;

  // Exact per-(m,k) leakage table.
  for (int k = 1; k <= joint.num_slots(); ++k)
    for (int m = 1; m <= k; ++m) {
      const double bits = joint.mi(joint.message_vars(m), joint.eve_history(k));
      rep.leakage.push_back({m, k, bits, bits / joint.n()});
    }

  if (joint.num_slots() >= 2 && joint.has_var("W22")) {
    LeakageReport slot2 = audit_slot2(joint);
    for (const AuditTerm& t : slot2.terms) rep.terms.push_back(t);
  }
  for (int k = 2; k < joint.num_slots(); ++k)
    for (int m = 1; m <= k + 1; ++m) {
      LeakageReport step = audit_induction(joint, m, k);
      const std::string prefix =
          "s" + std::to_string(k + 1) + ".m" + std::to_string(m) + ".";
      for (AuditTerm t : step.terms) {
        t.key = prefix + t.key;
        rep.terms.push_back(std::move(t));
      }
    }
  return rep;
}

MiEstimate empirical_leakage_estimate(const std::vector<TranscriptRecord>& transcripts,
                                      int m, int k, int z_size, Rng& rng,
                                      int bootstrap_reps, std::size_t min_samples) {
  if (transcripts.size() < min_samples)
    throw DomainError("insufficient samples: " + std::to_string(transcripts.size()) +
                      " transcripts, need at least " + std::to_string(min_samples));

  // Symbolize each transcript as (message of slot m, all Eve symbols 1..k).
  std::unordered_map<std::uint64_t, int> b_ids;
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(transcripts.size());
  std::size_t na = 0;
  for (const TranscriptRecord& rec : transcripts) {
    if (static_cast<int>(rec.slots.size()) < k || static_cast<int>(rec.slots.size()) < m)
      throw std::invalid_argument("transcript shorter than requested horizon");
    const int a = static_cast<int>(rec.slots[m - 1].sent.value);
    na = std::max<std::size_t>(na, static_cast<std::size_t>(a) + 1);
    std::uint64_t b = 0;
    int symbols = 0;
    for (int s = 0; s < k; ++s)
      for (const auto& block : rec.slots[s].z_blocks)
        for (std::uint8_t sym : block) {
          b = b * z_size + sym;
          ++symbols;
        }
    if (symbols * std::log2(static_cast<double>(z_size)) > 63)
      throw BudgetError("Eve observation too wide to symbolize");
    const auto [it, inserted] = b_ids.try_emplace(b, static_cast<int>(b_ids.size()));
    pairs.emplace_back(a, it->second);
  }
  const std::size_t nb = b_ids.size();
  const std::size_t N = pairs.size();

  const auto plugin = [&](const std::vector<std::pair<int, int>>& sample) {
    std::vector<double> counts(na * nb, 0.0);
    std::vector<double> ra(na, 0.0), cb(nb, 0.0);
    for (const auto& [a, b] : sample) {
      counts[a * nb + b] += 1.0;
      ra[a] += 1.0;
      cb[b] += 1.0;
    }
    const double total = static_cast<double>(sample.size());
    double mi = 0.0;
    std::size_t nz_rows = 0, nz_cols = 0;
    for (double r : ra) nz_rows += r > 0;
    for (double c : cb) nz_cols += c > 0;
    for (std::size_t a = 0; a < na; ++a)
      for (std::size_t b = 0; b < nb; ++b) {
        const double c = counts[a * nb + b];
        if (c > 0) mi += (c / total) * std::log2(c * total / (ra[a] * cb[b]));
      }
    // Miller-Madow bias correction.
    mi -= static_cast<double>((nz_rows - 1) * (nz_cols - 1)) /
          (2.0 * total * std::log(2.0));
    return mi;
  };

  MiEstimate est;
  est.samples = N;
  est.estimate = plugin(pairs);

  std::vector<double> reps(bootstrap_reps);
  std::vector<std::pair<int, int>> resample(N);
  for (int r = 0; r < bootstrap_reps; ++r) {
    for (std::size_t i = 0; i < N; ++i) resample[i] = pairs[rng.below(N)];
    reps[r] = plugin(resample);
  }
  std::sort(reps.begin(), reps.end());
  est.ci_lo = reps[static_cast<std::size_t>(0.025 * bootstrap_reps)];
  est.ci_hi = reps[std::min<std::size_t>(bootstrap_reps - 1,
                                         static_cast<std::size_t>(0.975 * bootstrap_reps))];
  return est;
}

}  // namespace wiretap
