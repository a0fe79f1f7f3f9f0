#pragma once

#include <deque>
#include <optional>
#include <vector>

#include "mcmimo/rng.hpp"
#include "mcmimo/scenario.hpp"

namespace mcmimo {

struct Packet {
  double size_bits = 0;
  int arrival_tti = 0;
  int first_service_tti = -1;  // -1 until any bits are served
  std::optional<int> departure_tti;
  double remaining_bits = 0;
};

/// Completed-packet latency sample, all in TTIs.
/// waiting = first service - arrival, service = departure - first service + 1,
/// so a packet fully served in its arrival TTI has D = 1.
struct LatencyRecord {
  int user = 0;
  int arrival_tti = 0;
  int waiting_ttis = 0;
  int service_ttis = 0;
  int total_ttis = 0;
};

/// FIFO finite buffer tracked in bits; the head packet may be served
/// partially, with the remainder carrying over to later TTIs.
class UserQueue {
 public:
  explicit UserQueue(int user = 0) : user_(user) {}

  void push(Packet p);

  /// Serves up to served_bits in FIFO order at the given TTI. Emits one
  /// latency record per packet that departs. applied_bits_last() reports
  /// how many bits actually left the buffer.
  std::vector<LatencyRecord> drain(double served_bits, int tti);

  double backlog_bits() const { return backlog_bits_; }
  double applied_bits_last() const { return applied_last_; }
  bool empty() const { return packets_.empty(); }
  const std::deque<Packet>& packets() const { return packets_; }
  int user() const { return user_; }

 private:
  int user_ = 0;
  std::deque<Packet> packets_;
  double backlog_bits_ = 0;
  double applied_last_ = 0;
};

/// Per-user source state for the ON-OFF model (unused in Poisson mode).
struct TrafficState {
  bool initialized = false;
  bool on = false;
  int remaining_ttis = 0;
};

/// Draws this TTI's arrivals for one user.
std::vector<Packet> step_arrivals(const TrafficParams& params, TrafficState& state, RngStream& rng,
                                  int tti);

/// Fraction of records with total latency strictly above d_max; 0 if empty.
double outage_probability(const std::vector<LatencyRecord>& records, int d_max_ttis);

/// Effective (arrival rate, mean packet size) feeding the minimum-rate
/// transform; the ON-OFF source maps to one fixed-size packet per TTI.
std::pair<double, double> qos_traffic_profile(const TrafficParams& params);

}  // namespace mcmimo
