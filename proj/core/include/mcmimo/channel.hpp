#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <vector>

#include "mcmimo/rng.hpp"
#include "mcmimo/scenario.hpp"

namespace mcmimo {

using CMat = Eigen::MatrixXcd;

/// Dense storage for one complex matrix per (BS, user, sub-channel) link.
struct ChannelGrid {
  int num_bs = 0;
  int num_users = 0;
  int num_subchannels = 0;
  int rx_antennas = 0;
  int tx_antennas = 0;
  std::vector<CMat> h;  // indexed (b * num_users + u) * num_subchannels + n

  void resize(int bs, int users, int subchannels, int rx, int tx);
  const CMat& at(int b, int u, int n) const {
    return h[static_cast<std::size_t>((b * num_users + u) * num_subchannels + n)];
  }
  CMat& at(int b, int u, int n) {
    return h[static_cast<std::size_t>((b * num_users + u) * num_subchannels + n)];
  }
  bool same_shape(const ChannelGrid& other) const;
};

/// One TTI's fading realization plus the static large-scale gains.
struct ChannelState {
  ChannelGrid grid;
  std::vector<double> pathloss;  // linear power gain, indexed b * num_users + u
  int tti = 0;

  double pathloss_at(int b, int u) const {
    return pathloss[static_cast<std::size_t>(b * grid.num_users + u)];
  }
};

/// Imperfect CSI: h_hat = reliability * h + sqrt(1 - reliability^2) * noise,
/// with unit-variance complex Gaussian noise entries.
struct CsiEstimate {
  ChannelGrid grid;
  double reliability = 1.0;
};

/// Draws a fading realization for one TTI. Entries are complex Gaussian
/// with per-entry variance equal to the link pathloss. With a previous
/// state, applies the first-order Gauss-Markov recursion
/// h_t = c * h_{t-1} + sqrt(1 - c^2) * innovation and reuses the previous
/// pathloss map; otherwise draws the user geometry first.
ChannelState generate_channel(const ScenarioConfig& cfg, RngStream& rng, int tti,
                              const ChannelState* previous = nullptr);

CsiEstimate corrupt_csi(const ChannelState& ch, double reliability, RngStream& rng);

/// CSV dump, one row per matrix entry: tti,b,u,n,row,col,re,im.
void write_channel_csv(const ChannelState& ch, std::ostream& os);

}  // namespace mcmimo
