#include "mcmimo/scenario.hpp"

#include <algorithm>
#include <cmath>

#include "mcmimo/errors.hpp"

namespace mcmimo {

double dbm_to_linear(double dbm) { return std::pow(10.0, dbm / 10.0); }

int ScenarioConfig::num_streams() const {
  return streams > 0 ? streams : std::min(rx_antennas, tx_antennas);
}

double ScenarioConfig::power_linear() const { return dbm_to_linear(power_dbm); }

double ScenarioConfig::noise_linear() const { return dbm_to_linear(noise_dbm); }

double ScenarioConfig::beta(int user) const {
  if (weights.empty()) return 1.0;
  return weights[static_cast<std::size_t>(user)];
}

void SolverConfig::validate() const {
  if (!(step_size > 0.0 && step_size < 1.0)) throw ConfigError("solver.step_size must be in (0,1)");
  if (max_outer < 1 || max_inner < 1) throw ConfigError("solver iteration limits must be >= 1");
  if (!(power_tol > 0.0)) throw ConfigError("solver.power_tol must be > 0");
  if (!(converge_tol > 0.0)) throw ConfigError("solver.converge_tol must be > 0");
}

void ScenarioConfig::validate() const {
  if (num_bs < 1 || users_per_bs < 1 || num_subchannels < 1 || tx_antennas < 1 || rx_antennas < 1)
    throw ConfigError("scenario dimensions must be >= 1");
  if (num_streams() > std::min(rx_antennas, tx_antennas))
    throw ConfigError("streams must not exceed min(rx_antennas, tx_antennas)");
  if (!weights.empty() && static_cast<int>(weights.size()) != num_users())
    throw ConfigError("weights must have one entry per user");
  for (double w : weights)
    if (!(w > 0.0)) throw ConfigError("user weights must be > 0");
  if (!(noise_linear() > 0.0)) throw ConfigError("noise power must be > 0");
  if (d_max_ttis < 1) throw ConfigError("d_max_ttis must be >= 1");
  if (!(xi > 0.0 && xi < 1.0)) throw ConfigError("xi must be in (0,1)");
  if (!(tti_seconds > 0.0) || !(subchannel_bandwidth_hz > 0.0))
    throw ConfigError("tti_seconds and subchannel_bandwidth_hz must be > 0");
  if (!(csi_reliability >= 0.0 && csi_reliability <= 1.0))
    throw ConfigError("csi_reliability must be in [0,1]");
  if (!(time_corr >= 0.0 && time_corr <= 1.0)) throw ConfigError("time_corr must be in [0,1]");
  if (ttis < 0) throw ConfigError("ttis must be >= 0");
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (pathloss_model == PathlossModel::log_distance) {
    if (!(inter_site_distance_m > 0.0) || !(min_bs_user_distance_m > 0.0) ||
        min_bs_user_distance_m >= inter_site_distance_m / 2.0)
      throw ConfigError("log-distance pathloss needs 0 < min distance < inter_site_distance/2");
  }
  if (const auto* p = std::get_if<PoissonTrafficParams>(&traffic)) {
    if (p->lambda < 0.0) throw ConfigError("traffic.lambda must be >= 0");
    if (!(p->mean_size_bits > 0.0)) throw ConfigError("traffic.mean_size_bits must be > 0");
  } else {
    const auto& b = std::get<BurstyTrafficParams>(traffic);
    if (!(b.pareto_shape > 1.0)) throw ConfigError("traffic.pareto_shape must be > 1");
    if (!(b.pareto_scale >= 1.0)) throw ConfigError("traffic.pareto_scale must be >= 1");
    if (!(b.off_rate > 0.0)) throw ConfigError("traffic.off_rate must be > 0");
    if (!(b.burst_packet_bits > 0.0)) throw ConfigError("traffic.burst_packet_bits must be > 0");
  }
  solver.validate();
}

}  // namespace mcmimo
