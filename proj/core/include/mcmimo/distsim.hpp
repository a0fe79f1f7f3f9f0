#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "mcmimo/optimizer.hpp"

namespace mcmimo {

enum class MessageKind : std::uint8_t { bu_pilot = 0, ub_feedback = 1, bb_share = 2 };

const char* to_string(MessageKind kind);

/// One signaling message. Node ids: BS b has id b, UE u has id num_bs + u.
/// Payloads are matrices tagged with (user, sub-channel): BU pilots carry
/// the receiver's effective channels H*M per transmitting user, UB feedback
/// carries the sender's theta matrices, BB shares carry the sending BS's
/// users' theta matrices.
struct NodeMessage {
  MessageKind kind = MessageKind::bu_pilot;
  int sender = 0;
  int receiver = 0;
  int frame = 0;  // outer iteration
  int iter = 0;   // inner iteration; -1 for the setup pilots
  std::vector<CMat> payload;
  std::vector<int> payload_user;
  std::vector<int> payload_subchannel;
};

struct TranscriptEntry {
  int frame = 0;
  int iter = 0;
  MessageKind kind = MessageKind::bu_pilot;
  int sender = 0;
  int receiver = 0;
  std::uint64_t payload_hash = 0;
};

/// In-process ordered reliable message channel. Every send folds into a
/// rolling transcript hash; full entries are kept when recording is on.
class Transport {
 public:
  explicit Transport(bool record_transcript = false) : record_(record_transcript) {}

  void send(NodeMessage msg);
  /// Removes and returns all queued messages of one kind for one receiver,
  /// in send order.
  std::vector<NodeMessage> collect(MessageKind kind, int receiver);
  /// True when any message is still queued (a completed phase must drain).
  bool pending() const { return !queue_.empty(); }

  std::uint64_t transcript_hash() const { return rolling_hash_; }
  const std::vector<TranscriptEntry>& transcript() const { return entries_; }
  std::size_t messages_sent() const { return sent_; }
  void write_transcript_csv(std::ostream& os) const;

 private:
  bool record_ = false;
  std::vector<NodeMessage> queue_;
  std::vector<TranscriptEntry> entries_;
  std::uint64_t rolling_hash_ = 0xCBF29CE484222325ull;
  std::size_t sent_ = 0;
};

std::uint64_t payload_hash(const NodeMessage& msg);

/// Signaling cost bookkeeping. After T completed inner iterations the pilot
/// count is exactly 2 * T * B * U_b * S.
struct OverheadCounter {
  long long pilot_symbols = 0;
  long long backhaul_matrices = 0;
  int iterations = 0;
  int stale_events = 0;
};

struct DistributedResult {
  SolveResult solve;
  OverheadCounter overhead;
};

/// Decentralized solve: per-node states exchange precoded-pilot and
/// backhaul messages through the transport; the update arithmetic is shared
/// with the centralized engine, so a single-cell single-user instance
/// reproduces the centralized trace exactly.
DistributedResult run_decentralized(const ProblemInstance& inst, const SolverConfig& cfg,
                                    Transport& transport);

}  // namespace mcmimo
