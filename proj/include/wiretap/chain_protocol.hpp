// Multi-slot key-chaining state machines: slot schedule, hybrid encoding
// (wiretap mini-slot + keyed mini-slot), one-time-pad cipher, chained
// decoding and restart policy.
#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "wiretap/channel.hpp"
#include "wiretap/common.hpp"
#include "wiretap/infotheory.hpp"
#include "wiretap/wiretap_code.hpp"

namespace wiretap {

struct SlotSpec {
  int index = 0;      // 1-based slot number
  int position = 0;   // position within the restart window (1 = slot-1 behavior)
  int mini_slots = 0; // 1 or 2
  int wiretap_msgs = 0;
  int keyed_msgs = 0;
  int wiretap_bits = 0;
  int keyed_bits = 0;   // cipher payload width; equals key bits consumed
  int total_bits = 0;
  double slot_rate = 0.0;  // message bits per channel use
  bool restart = false;    // true when the key chain resets at this slot
};

struct SlotSchedule {
  int n = 0;
  int rate_bits = 0;
  int lambda = 0;
  int restart_period = 0;  // 0 = never restart
  std::vector<SlotSpec> slots;
};

// Low-level constructor used when lambda is fixed directly (audits, tests).
SlotSchedule make_schedule(int lambda, int rate_bits, int n, int num_slots,
                           int restart_period);

// Checks rate_bits/n against the profile's secrecy capacity.
SlotSchedule build_schedule(const RateProfile& profile, int rate_bits, int n,
                            int num_slots, int restart_period);

// One wiretap codebook (reused across wiretap mini-slots) plus one channel
// codebook per distinct keyed payload width in the schedule.
struct SessionCodebooks {
  WiretapCodebook wiretap;
  std::map<int, ChannelCodebook> keyed;  // payload bits -> codebook

  // bin_bits <= 0 selects the default: ceil(n * I(X;Z)) under input_dist,
  // clamped so the total rate stays within the alphabet.
  static SessionCodebooks build(const SlotSchedule& schedule,
                                const ChannelModel& model,
                                const InputDistribution& input_dist,
                                int bin_bits, std::uint64_t seed);
};

enum class Role { Alice, Bob };

struct ProtocolState {
  Role role = Role::Alice;
  const SlotSchedule* schedule = nullptr;
  const SessionCodebooks* books = nullptr;
  int slot_index = 1;  // next slot to process
  Bits key_buffer;     // previous slot's message (exact for Alice, decoded for Bob)

  static ProtocolState start(Role role, const SlotSchedule& schedule,
                             const SessionCodebooks& books);
};

// Encode one slot: wiretap message plus key-ciphered messages. Returns one
// x block per mini-slot; the key buffer becomes this slot's message.
std::vector<std::vector<std::uint8_t>> alice_encode_slot(ProtocolState& state,
                                                         const Bits& fresh_messages,
                                                         Rng& rng);

// Decode one slot; the key buffer becomes Bob's decoded message, so decode
// errors propagate exactly as the chain dictates.
Bits bob_decode_slot(ProtocolState& state,
                     const std::vector<std::vector<std::uint8_t>>& y_blocks,
                     const ChannelModel& model);

struct TranscriptSlot {
  Bits sent;
  Bits decoded;
  std::vector<std::vector<std::uint8_t>> x_blocks;
  std::vector<std::vector<std::uint8_t>> y_blocks;
  std::vector<std::vector<std::uint8_t>> z_blocks;
  bool error = false;
};

struct TranscriptRecord {
  std::vector<TranscriptSlot> slots;
};

// Full session: Alice draws uniform messages from the stream, transmits,
// Bob decodes. Deterministic given the stream.
TranscriptRecord run_session(const ChannelModel& model, const SlotSchedule& schedule,
                             const SessionCodebooks& books, Rng& rng);

}  // namespace wiretap
