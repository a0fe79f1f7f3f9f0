#include "mcmimo/distsim.hpp"

#include <algorithm>
#include <cstring>
#include <ostream>

#include "mcmimo/errors.hpp"

namespace mcmimo {

const char* to_string(MessageKind kind) {
  switch (kind) {
    case MessageKind::bu_pilot: return "BU";
    case MessageKind::ub_feedback: return "UB";
    case MessageKind::bb_share: return "BB";
  }
  return "?";
}

namespace {

void hash_u64(std::uint64_t& h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xFF;
    h *= 0x100000001B3ull;
  }
}

void hash_double(std::uint64_t& h, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, sizeof(bits));
  hash_u64(h, bits);
}

}  // namespace

std::uint64_t payload_hash(const NodeMessage& msg) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  hash_u64(h, static_cast<std::uint64_t>(msg.kind));
  hash_u64(h, static_cast<std::uint64_t>(msg.sender));
  hash_u64(h, static_cast<std::uint64_t>(msg.receiver));
  for (std::size_t k = 0; k < msg.payload.size(); ++k) {
    hash_u64(h, static_cast<std::uint64_t>(msg.payload_user[k]));
    hash_u64(h, static_cast<std::uint64_t>(msg.payload_subchannel[k]));
    const CMat& m = msg.payload[k];
    hash_u64(h, static_cast<std::uint64_t>(m.rows()));
    hash_u64(h, static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      for (Eigen::Index r = 0; r < m.rows(); ++r) {
        hash_double(h, m(r, c).real());
        hash_double(h, m(r, c).imag());
      }
  }
  return h;
}

void Transport::send(NodeMessage msg) {
  TranscriptEntry e;
  e.frame = msg.frame;
  e.iter = msg.iter;
  e.kind = msg.kind;
  e.sender = msg.sender;
  e.receiver = msg.receiver;
  e.payload_hash = payload_hash(msg);
  hash_u64(rolling_hash_, static_cast<std::uint64_t>(e.frame));
  hash_u64(rolling_hash_, static_cast<std::uint64_t>(e.iter));
  hash_u64(rolling_hash_, e.payload_hash);
  if (record_) entries_.push_back(e);
  ++sent_;
  queue_.push_back(std::move(msg));
}

std::vector<NodeMessage> Transport::collect(MessageKind kind, int receiver) {
  std::vector<NodeMessage> out;
  std::size_t w = 0;
  for (std::size_t i = 0; i < queue_.size(); ++i) {
    if (queue_[i].kind == kind && queue_[i].receiver == receiver)
      out.push_back(std::move(queue_[i]));
    else
      queue_[w++] = std::move(queue_[i]);
  }
  queue_.resize(w);
  return out;
}

void Transport::write_transcript_csv(std::ostream& os) const {
  os << "frame,iter,kind,sender,receiver,payload_hash\n";
  for (const auto& e : entries_)
    os << e.frame << ',' << e.iter << ',' << to_string(e.kind) << ',' << e.sender << ','
       << e.receiver << ',' << e.payload_hash << '\n';
}

namespace {

/// The radio medium plus the per-phase message flow of the decentralized
/// algorithm. BSs only ever see uplink effective channels toward
/// themselves, UEs only see downlink effective channels; neither side reads
/// the other's private state.
class MessageSignaling final : public SignalingLayer {
 public:
  MessageSignaling(std::vector<UeAlgoState>& ues, std::vector<BsAlgoState>& bss, BeamformerSet& bf,
                   const ChannelGrid& h, Transport& transport, OverheadCounter& overhead)
      : ues_(ues),
        bss_(bss),
        bf_(bf),
        h_(h),
        transport_(transport),
        overhead_(overhead),
        users_per_bs_(h.num_users / h.num_bs),
        streams_(static_cast<int>(bf.tx(0, 0).cols())) {
    bs_has_active_.resize(static_cast<std::size_t>(h_.num_bs), false);
    for (int b = 0; b < h_.num_bs; ++b)
      for (int j = 0; j < users_per_bs_; ++j)
        if (ues_[static_cast<std::size_t>(b * users_per_bs_ + j)].load.active)
          bs_has_active_[static_cast<std::size_t>(b)] = true;
  }

  void begin_iteration(int outer, int inner) override {
    frame_ = outer;
    iter_ = inner;
  }

  void broadcast_dl_pilots() override {
    // Each BS precodes pilots for its active users; the medium applies the
    // downlink channel per receiving UE.
    for (int b = 0; b < h_.num_bs; ++b) {
      if (!bs_has_active_[static_cast<std::size_t>(b)]) continue;
      for (int u = 0; u < h_.num_users; ++u) {
        if (!ues_[static_cast<std::size_t>(u)].load.active) continue;
        NodeMessage msg;
        msg.kind = MessageKind::bu_pilot;
        msg.sender = b;
        msg.receiver = h_.num_bs + u;
        msg.frame = frame_;
        msg.iter = iter_;
        for (int j = 0; j < users_per_bs_; ++j) {
          const int i = b * users_per_bs_ + j;
          if (!ues_[static_cast<std::size_t>(i)].load.active) continue;
          for (int n = 0; n < h_.num_subchannels; ++n) {
            msg.payload.push_back(h_.at(b, u, n) * bf_.tx(i, n));
            msg.payload_user.push_back(i);
            msg.payload_subchannel.push_back(n);
          }
        }
        transport_.send(std::move(msg));
      }
    }
    // UEs absorb the pilots; links not covered this round keep their last
    // known effective channel.
    for (int u = 0; u < h_.num_users; ++u) {
      auto& ue = ues_[static_cast<std::size_t>(u)];
      if (!ue.load.active) continue;
      const auto msgs = transport_.collect(MessageKind::bu_pilot, h_.num_bs + u);
      std::vector<bool> heard(static_cast<std::size_t>(h_.num_bs), false);
      for (const auto& msg : msgs) {
        heard[static_cast<std::size_t>(msg.sender)] = true;
        for (std::size_t k = 0; k < msg.payload.size(); ++k)
          ue.eff[static_cast<std::size_t>(msg.payload_subchannel[k])]
                [static_cast<std::size_t>(msg.payload_user[k])] = msg.payload[k];
      }
      for (int b = 0; b < h_.num_bs; ++b)
        if (bs_has_active_[static_cast<std::size_t>(b)] && !heard[static_cast<std::size_t>(b)])
          ++overhead_.stale_events;
    }
  }

  void feedback_and_share() override {
    // Uplink: each active UE sends theta to its serving BS; every BS also
    // measures the UE's precoded uplink pilot, i.e. the effective channel
    // H^H W toward itself.
    for (int u = 0; u < h_.num_users; ++u) {
      auto& ue = ues_[static_cast<std::size_t>(u)];
      if (!ue.load.active) continue;
      NodeMessage msg;
      msg.kind = MessageKind::ub_feedback;
      msg.sender = h_.num_bs + u;
      msg.receiver = u / users_per_bs_;
      msg.frame = frame_;
      msg.iter = iter_;
      for (int n = 0; n < h_.num_subchannels; ++n) {
        msg.payload.push_back(ue.theta[static_cast<std::size_t>(n)]);
        msg.payload_user.push_back(u);
        msg.payload_subchannel.push_back(n);
      }
      transport_.send(std::move(msg));
      for (int b = 0; b < h_.num_bs; ++b)
        for (int n = 0; n < h_.num_subchannels; ++n)
          bss_[static_cast<std::size_t>(b)].ul(u, n) =
              h_.at(b, u, n).adjoint() * ue.rx[static_cast<std::size_t>(n)];
    }
    for (int b = 0; b < h_.num_bs; ++b) {
      auto& bs = bss_[static_cast<std::size_t>(b)];
      for (const auto& msg : transport_.collect(MessageKind::ub_feedback, b))
        for (std::size_t k = 0; k < msg.payload.size(); ++k)
          bs.th(msg.payload_user[k], msg.payload_subchannel[k]) = msg.payload[k];
    }

    // Backhaul: each BS shares its users' weights with every peer.
    for (int b = 0; b < h_.num_bs; ++b) {
      if (!bs_has_active_[static_cast<std::size_t>(b)]) continue;
      for (int peer = 0; peer < h_.num_bs; ++peer) {
        if (peer == b) continue;
        NodeMessage msg;
        msg.kind = MessageKind::bb_share;
        msg.sender = b;
        msg.receiver = peer;
        msg.frame = frame_;
        msg.iter = iter_;
        for (int j = 0; j < users_per_bs_; ++j) {
          const int i = b * users_per_bs_ + j;
          if (!ues_[static_cast<std::size_t>(i)].load.active) continue;
          for (int n = 0; n < h_.num_subchannels; ++n) {
            msg.payload.push_back(bss_[static_cast<std::size_t>(b)].th(i, n));
            msg.payload_user.push_back(i);
            msg.payload_subchannel.push_back(n);
          }
        }
        overhead_.backhaul_matrices += static_cast<long long>(msg.payload.size());
        transport_.send(std::move(msg));
      }
    }
    for (int b = 0; b < h_.num_bs; ++b) {
      auto& bs = bss_[static_cast<std::size_t>(b)];
      std::vector<bool> heard(static_cast<std::size_t>(h_.num_bs), false);
      heard[static_cast<std::size_t>(b)] = true;
      for (const auto& msg : transport_.collect(MessageKind::bb_share, b)) {
        heard[static_cast<std::size_t>(msg.sender)] = true;
        for (std::size_t k = 0; k < msg.payload.size(); ++k)
          bs.th(msg.payload_user[k], msg.payload_subchannel[k]) = msg.payload[k];
      }
      for (int p = 0; p < h_.num_bs; ++p)
        if (bs_has_active_[static_cast<std::size_t>(p)] && !heard[static_cast<std::size_t>(p)])
          ++overhead_.stale_events;  // proceed with last known weights
    }
  }

  void end_inner_iteration() override {
    ++overhead_.iterations;
    overhead_.pilot_symbols +=
        2LL * h_.num_bs * users_per_bs_ * streams_;  // one BU + one UB pilot block
  }

 private:
  std::vector<UeAlgoState>& ues_;
  std::vector<BsAlgoState>& bss_;
  BeamformerSet& bf_;
  const ChannelGrid& h_;
  Transport& transport_;
  OverheadCounter& overhead_;
  int users_per_bs_;
  int streams_;
  std::vector<bool> bs_has_active_;
  int frame_ = 0;
  int iter_ = -1;  // setup pilots precede the first iteration
};

}  // namespace

DistributedResult run_decentralized(const ProblemInstance& inst, const SolverConfig& cfg,
                                    Transport& transport) {
  DistributedResult result;
  std::vector<UeAlgoState> ues;
  std::vector<BsAlgoState> bss;
  BeamformerSet bf;
  build_algo_states(inst, cfg, ues, bss, bf);
  MessageSignaling sig(ues, bss, bf, *inst.channel, transport, result.overhead);
  result.solve = run_primal_dual(ues, bss, bf, sig, inst, cfg);
  if (transport.pending())
    throw SolverError("run_decentralized: transport not drained after the final phase");
  return result;
}

}  // namespace mcmimo
