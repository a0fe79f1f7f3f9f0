#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace mcmimo {

/// Poisson packet arrivals: count per TTI ~ Poisson(lambda), sizes
/// i.i.d. exponential with the given mean.
struct PoissonTrafficParams {
  double lambda = 0.07;          // arrivals per TTI per user
  double mean_size_bits = 9600;  // mean packet size
};

/// Semi-Markov ON-OFF source: during ON, one fixed-size packet per TTI.
/// ON duration ~ Pareto(shape, scale) TTIs, OFF duration ~ Exponential
/// with rate off_rate (mean 1/off_rate TTIs); durations round up to whole
/// TTIs.
struct BurstyTrafficParams {
  double pareto_shape = 2.0;       // > 1 so the mean exists
  double pareto_scale = 10.0;      // minimum ON duration, TTIs
  double off_rate = 100.0;         // exponential rate of the OFF duration
  double burst_packet_bits = 1600;
};

using TrafficParams = std::variant<PoissonTrafficParams, BurstyTrafficParams>;

enum class SolverMode { proposed, wmmse_baseline };
enum class StepSchedule { fixed, diminishing };

struct SolverConfig {
  double step_size = 0.01;   // subgradient step in (0,1)
  int max_outer = 50;        // receive-beamformer updates
  int max_inner = 10;        // SCA/dual updates per receive update
  double power_tol = 1e-9;   // bisection tolerance on the per-BS power sum
  double converge_tol = 1e-5;
  SolverMode mode = SolverMode::proposed;
  StepSchedule step_schedule = StepSchedule::fixed;

  void validate() const;
};

enum class Algorithm { centralized, decentralized, wmmse_baseline };
enum class PathlossModel { unit, log_distance };

/// Full scenario description. Defaults follow the reference evaluation
/// setup: 35 dBm per-BS budget, 180 kHz sub-channels, 1 ms TTI, 250 m
/// inter-site distance, d_max = 20 TTIs, xi = 0.05, 9600-bit mean packets.
struct ScenarioConfig {
  // dimensions
  int num_bs = 2;           // B
  int users_per_bs = 3;     // U_b
  int num_subchannels = 1;  // N
  int tx_antennas = 8;      // N_T
  int rx_antennas = 2;      // N_R
  int streams = 0;          // S; 0 means min(rx_antennas, tx_antennas)

  // radio
  double power_dbm = 35.0;
  double noise_dbm = -114.4;  // per sub-channel (thermal + 7 dB NF over 180 kHz)
  PathlossModel pathloss_model = PathlossModel::log_distance;
  double pathloss_ref_db = 30.5;    // loss at 1 m
  double pathloss_exponent = 3.67;  // distance exponent
  double inter_site_distance_m = 250.0;
  double min_bs_user_distance_m = 10.0;
  // First-order Gauss-Markov coefficient per TTI. Stand-in for a mobility
  // model: J0(2*pi*fD*dt) at 3 km/h, 2 GHz carrier, 1 ms TTI is ~0.9997.
  double time_corr = 0.9997;

  // QoS
  int d_max_ttis = 20;
  double xi = 0.05;
  std::vector<double> weights;  // beta per user; empty = all ones

  // system timing
  double tti_seconds = 1e-3;
  double subchannel_bandwidth_hz = 180e3;

  // traffic and CSI
  TrafficParams traffic = PoissonTrafficParams{};
  double csi_reliability = 1.0;

  // campaign
  std::vector<std::uint64_t> seeds = {1};
  int ttis = 300;
  Algorithm algorithm = Algorithm::decentralized;
  SolverConfig solver;
  bool continue_on_infeasible = false;
  int threads = 0;  // 0 = hardware concurrency

  int num_users() const { return num_bs * users_per_bs; }
  int num_streams() const;
  int serving_bs(int user) const { return user / users_per_bs; }
  double power_linear() const;  // mW
  double noise_linear() const;  // mW per sub-channel
  double beta(int user) const;
  /// bits/TTI carried by one unit of spectral efficiency on one sub-channel
  double bits_per_rate_unit() const { return subchannel_bandwidth_hz * tti_seconds; }

  void validate() const;  // throws ConfigError
};

double dbm_to_linear(double dbm);

}  // namespace mcmimo
