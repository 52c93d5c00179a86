#include "wiretap/chain_protocol.hpp"

#include <cmath>

namespace wiretap {

namespace {

SlotSpec make_slot(int index, int position, int lambda, int rate_bits, int n) {
  SlotSpec s;
  s.index = index;
  s.position = position;
  s.restart = (position == 1 && index > 1);
  if (position == 1) {
    s.mini_slots = 1;
    s.wiretap_msgs = 1;
    s.keyed_msgs = 0;
  } else if (position <= lambda) {
    s.mini_slots = 2;
    s.wiretap_msgs = 1;
    s.keyed_msgs = position - 1;
  } else {
    s.mini_slots = 1;
    s.wiretap_msgs = 0;
    s.keyed_msgs = lambda;
  }
  s.wiretap_bits = s.wiretap_msgs * rate_bits;
  s.keyed_bits = s.keyed_msgs * rate_bits;
  s.total_bits = s.wiretap_bits + s.keyed_bits;
  s.slot_rate = static_cast<double>(s.total_bits) / (s.mini_slots * n);
  return s;
}

}  // namespace

SlotSchedule make_schedule(int lambda, int rate_bits, int n, int num_slots,
                           int restart_period) {
  if (lambda < 1) throw std::invalid_argument("lambda must be >= 1");
  if (rate_bits < 1 || n < 1 || num_slots < 1)
    throw std::invalid_argument("rate_bits, n and num_slots must be positive");
  if (restart_period < 0) throw std::invalid_argument("restart_period must be >= 0");
  if (lambda * rate_bits > 62)
    throw DomainError("slot messages exceed 62 bits; reduce lambda or rate_bits");

  SlotSchedule schedule;
  schedule.n = n;
  schedule.rate_bits = rate_bits;
  schedule.lambda = lambda;
  schedule.restart_period = restart_period;
  for (int k = 1; k <= num_slots; ++k) {
    const int position = restart_period > 0 ? ((k - 1) % restart_period) + 1 : k;
    schedule.slots.push_back(make_slot(k, position, lambda, rate_bits, n));
  }
  return schedule;
}

SlotSchedule build_schedule(const RateProfile& profile, int rate_bits, int n,
                            int num_slots, int restart_period) {
  if (static_cast<double>(rate_bits) / n > profile.secrecy_capacity + 1e-12)
    throw DomainError("rate exceeds secrecy capacity: " + std::to_string(rate_bits) +
                      "/" + std::to_string(n) + " > R_s");
  return make_schedule(profile.lambda, rate_bits, n, num_slots, restart_period);
}

SessionCodebooks SessionCodebooks::build(const SlotSchedule& schedule,
                                         const ChannelModel& model,
                                         const InputDistribution& input_dist,
                                         int bin_bits, std::uint64_t seed) {
  const int n = schedule.n;
  if (bin_bits <= 0) {
    // Default randomization rate: match Eve's mutual information, the
    // classical binning sweet spot.
    Matrix joint(input_dist.probs.size(), std::vector<double>(model.z_size()));
    for (std::size_t x = 0; x < input_dist.probs.size(); ++x)
      for (int z = 0; z < model.z_size(); ++z)
        joint[x][z] = input_dist.probs[x] * model.p_z(static_cast<int>(x), z);
    const double ixz = mutual_information(joint);
    const int max_bits = static_cast<int>(std::floor(
        n * std::log2(static_cast<double>(model.x_size())) + 1e-9));
    bin_bits = std::max(1, static_cast<int>(std::ceil(n * ixz - 1e-9)));
    bin_bits = std::min(bin_bits, std::max(1, max_bits - schedule.rate_bits));
  }

  SessionCodebooks books{
      WiretapCodebook::build(n, schedule.rate_bits, bin_bits, input_dist,
                             splitmix64(seed ^ 0x77697265ULL)),
      {}};
  for (const SlotSpec& slot : schedule.slots)
    if (slot.keyed_bits > 0 && !books.keyed.count(slot.keyed_bits))
      books.keyed.emplace(
          slot.keyed_bits,
          ChannelCodebook::build(n, slot.keyed_bits, input_dist,
                                 splitmix64(seed ^ 0x6b657965ULL) + slot.keyed_bits));
  return books;
}

ProtocolState ProtocolState::start(Role role, const SlotSchedule& schedule,
                                   const SessionCodebooks& books) {
  ProtocolState s;
  s.role = role;
  s.schedule = &schedule;
  s.books = &books;
  return s;
}

namespace {

const SlotSpec& current_slot(const ProtocolState& state) {
  const auto& slots = state.schedule->slots;
  if (state.slot_index < 1 || state.slot_index > static_cast<int>(slots.size()))
    throw DomainError("slot index beyond schedule");
  return slots[state.slot_index - 1];
}

// Split a slot message into its wiretap (high bits) and keyed (low bits) parts.
void split_message(const SlotSpec& slot, const Bits& message, std::size_t* wiretap_part,
                   std::uint64_t* keyed_part) {
  *wiretap_part = static_cast<std::size_t>(message.value >> slot.keyed_bits);
  *keyed_part = message.value & bit_mask(slot.keyed_bits);
}

std::uint64_t key_prefix_value(const ProtocolState& state, const SlotSpec& slot) {
  if (state.key_buffer.width < slot.keyed_bits)
    throw DomainError("protocol error: key shortfall in slot " +
                      std::to_string(slot.index));
  return bits_prefix(state.key_buffer, slot.keyed_bits).value;
}

}  // namespace

std::vector<std::vector<std::uint8_t>> alice_encode_slot(ProtocolState& state,
                                                         const Bits& fresh_messages,
                                                         Rng& rng) {
  const SlotSpec& slot = current_slot(state);
  if (fresh_messages.width != slot.total_bits)
    throw std::invalid_argument("message width " + std::to_string(fresh_messages.width) +
                                " does not match slot's " +
                                std::to_string(slot.total_bits) + " bits");
  if (slot.restart) state.key_buffer = Bits{};

  std::size_t wiretap_part;
  std::uint64_t keyed_part;
  split_message(slot, fresh_messages, &wiretap_part, &keyed_part);

  std::vector<std::vector<std::uint8_t>> blocks;
  if (slot.wiretap_msgs > 0)
    blocks.push_back(wiretap_encode(state.books->wiretap, wiretap_part, rng));
  if (slot.keyed_bits > 0) {
    const std::uint64_t cipher = keyed_part ^ key_prefix_value(state, slot);
    blocks.push_back(channel_encode(state.books->keyed.at(slot.keyed_bits), cipher));
  }

  state.key_buffer = fresh_messages;
  state.slot_index += 1;
  return blocks;
}

Bits bob_decode_slot(ProtocolState& state,
                     const std::vector<std::vector<std::uint8_t>>& y_blocks,
                     const ChannelModel& model) {
  const SlotSpec& slot = current_slot(state);
  if (static_cast<int>(y_blocks.size()) != slot.mini_slots)
    throw std::invalid_argument("expected " + std::to_string(slot.mini_slots) +
                                " mini-slot blocks");
  if (slot.restart) state.key_buffer = Bits{};

  std::size_t block_idx = 0;
  std::uint64_t wiretap_part = 0;
  if (slot.wiretap_msgs > 0)
    wiretap_part = wiretap_decode(state.books->wiretap, y_blocks[block_idx++], model);
  std::uint64_t keyed_part = 0;
  if (slot.keyed_bits > 0) {
    const std::uint64_t cipher = channel_decode(state.books->keyed.at(slot.keyed_bits),
                                                y_blocks[block_idx++], model);
    keyed_part = cipher ^ key_prefix_value(state, slot);
  }

  const Bits decoded = concat_bits(Bits{wiretap_part, slot.wiretap_bits},
                                   Bits{keyed_part, slot.keyed_bits});
  state.key_buffer = decoded;
  state.slot_index += 1;
  return decoded;
}

TranscriptRecord run_session(const ChannelModel& model, const SlotSchedule& schedule,
                             const SessionCodebooks& books, Rng& rng) {
  ProtocolState alice = ProtocolState::start(Role::Alice, schedule, books);
  ProtocolState bob = ProtocolState::start(Role::Bob, schedule, books);

  TranscriptRecord record;
  record.slots.reserve(schedule.slots.size());
  for (const SlotSpec& slot : schedule.slots) {
    TranscriptSlot t;
    t.sent = Bits{rng.bits(slot.total_bits), slot.total_bits};
    t.x_blocks = alice_encode_slot(alice, t.sent, rng);
    for (const auto& x : t.x_blocks) {
      auto [y, z] = model.sample_block(x, rng);
      t.y_blocks.push_back(std::move(y));
      t.z_blocks.push_back(std::move(z));
    }
    t.decoded = bob_decode_slot(bob, t.y_blocks, model);
    t.error = !(t.decoded == t.sent);
    record.slots.push_back(std::move(t));
  }
  return record;
}

}  // namespace wiretap
