#include "mcmimo/traffic.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace mcmimo {

void UserQueue::push(Packet p) {
  if (!(p.size_bits > 0.0)) throw std::invalid_argument("UserQueue::push: packet size must be > 0");
  p.remaining_bits = p.size_bits;
  backlog_bits_ += p.size_bits;
  packets_.push_back(std::move(p));
}

std::vector<LatencyRecord> UserQueue::drain(double served_bits, int tti) {
  if (served_bits < 0.0) throw std::invalid_argument("UserQueue::drain: served_bits must be >= 0");
  std::vector<LatencyRecord> records;
  const double backlog_before = backlog_bits_;
  double chunk_sum = 0;
  double left = served_bits;
  while (left > 0.0 && !packets_.empty()) {
    Packet& head = packets_.front();
    if (head.first_service_tti < 0) head.first_service_tti = tti;
    const double chunk = std::min(head.remaining_bits, left);
    head.remaining_bits -= chunk;
    chunk_sum += chunk;
    left -= chunk;
    if (head.remaining_bits <= 0.0) {
      head.departure_tti = tti;
      LatencyRecord rec;
      rec.user = user_;
      rec.arrival_tti = head.arrival_tti;
      rec.waiting_ttis = head.first_service_tti - head.arrival_tti;
      rec.service_ttis = tti - head.first_service_tti + 1;
      rec.total_ttis = rec.waiting_ttis + rec.service_ttis;
      assert(rec.waiting_ttis >= 0 && rec.service_ttis >= 1 && rec.total_ttis >= 1);
      records.push_back(rec);
      packets_.pop_front();
    }
  }
  // An empty buffer holds exactly zero bits; applied bits are defined as the
  // backlog delta so bit conservation holds without rounding residue.
  backlog_bits_ = packets_.empty() ? 0.0 : backlog_before - chunk_sum;
  applied_last_ = backlog_before - backlog_bits_;
  return records;
}

namespace {

std::vector<Packet> poisson_arrivals(const PoissonTrafficParams& p, RngStream& rng, int tti) {
  std::vector<Packet> out;
  if (p.lambda <= 0.0) return out;
  const int count = rng.poisson(p.lambda);
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    Packet pkt;
    pkt.size_bits = rng.exponential(p.mean_size_bits);
    pkt.arrival_tti = tti;
    out.push_back(pkt);
  }
  return out;
}

int ttis_from_duration(double d) { return std::max(1, static_cast<int>(std::ceil(d))); }

std::vector<Packet> bursty_arrivals(const BurstyTrafficParams& p, TrafficState& st, RngStream& rng,
                                    int tti) {
  if (!st.initialized) {
    st.initialized = true;
    st.on = false;
    st.remaining_ttis = ttis_from_duration(rng.exponential(1.0 / p.off_rate));
  }
  if (st.remaining_ttis == 0) {
    st.on = !st.on;
    st.remaining_ttis = st.on ? ttis_from_duration(rng.pareto(p.pareto_shape, p.pareto_scale))
                              : ttis_from_duration(rng.exponential(1.0 / p.off_rate));
  }
  --st.remaining_ttis;
  std::vector<Packet> out;
  if (st.on) {
    Packet pkt;
    pkt.size_bits = p.burst_packet_bits;
    pkt.arrival_tti = tti;
    out.push_back(pkt);
  }
  return out;
}

}  // namespace

std::vector<Packet> step_arrivals(const TrafficParams& params, TrafficState& state, RngStream& rng,
                                  int tti) {
  if (const auto* p = std::get_if<PoissonTrafficParams>(&params))
    return poisson_arrivals(*p, rng, tti);
  return bursty_arrivals(std::get<BurstyTrafficParams>(params), state, rng, tti);
}

double outage_probability(const std::vector<LatencyRecord>& records, int d_max_ttis) {
  if (records.empty()) return 0.0;
  std::size_t late = 0;
  for (const auto& r : records)
    if (r.total_ttis > d_max_ttis) ++late;
  return static_cast<double>(late) / static_cast<double>(records.size());
}

std::pair<double, double> qos_traffic_profile(const TrafficParams& params) {
  if (const auto* p = std::get_if<PoissonTrafficParams>(&params))
    return {p->lambda, p->mean_size_bits};
  const auto& b = std::get<BurstyTrafficParams>(params);
  return {1.0, b.burst_packet_bits};
}

}  // namespace mcmimo
