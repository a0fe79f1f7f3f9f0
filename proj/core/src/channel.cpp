#include "mcmimo/channel.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

#include "mcmimo/errors.hpp"

namespace mcmimo {

void ChannelGrid::resize(int bs, int users, int subchannels, int rx, int tx) {
  num_bs = bs;
  num_users = users;
  num_subchannels = subchannels;
  rx_antennas = rx;
  tx_antennas = tx;
  h.assign(static_cast<std::size_t>(bs) * users * subchannels, CMat::Zero(rx, tx));
}

bool ChannelGrid::same_shape(const ChannelGrid& other) const {
  return num_bs == other.num_bs && num_users == other.num_users &&
         num_subchannels == other.num_subchannels && rx_antennas == other.rx_antennas &&
         tx_antennas == other.tx_antennas;
}

namespace {

// Hexagonal-ish BS layout: center site plus spiral rings at the inter-site
// distance. Good enough as a stand-in for a full hex grid.
std::vector<std::pair<double, double>> bs_positions(int num_bs, double isd) {
  std::vector<std::pair<double, double>> pos;
  pos.reserve(static_cast<std::size_t>(num_bs));
  pos.emplace_back(0.0, 0.0);
  int ring = 1;
  while (static_cast<int>(pos.size()) < num_bs) {
    for (int k = 0; k < 6 * ring && static_cast<int>(pos.size()) < num_bs; ++k) {
      const double angle = 2.0 * std::numbers::pi * k / (6.0 * ring);
      pos.emplace_back(ring * isd * std::cos(angle), ring * isd * std::sin(angle));
    }
    ++ring;
  }
  return pos;
}

std::vector<double> draw_pathloss(const ScenarioConfig& cfg, RngStream& rng) {
  const int num_bs = cfg.num_bs;
  const int num_users = cfg.num_users();
  std::vector<double> pl(static_cast<std::size_t>(num_bs) * num_users, 1.0);
  if (cfg.pathloss_model == PathlossModel::unit) return pl;

  const double isd = cfg.inter_site_distance_m;
  const double cell_radius = isd / 2.0;
  const double r_min = cfg.min_bs_user_distance_m;
  const auto bs = bs_positions(num_bs, isd);

  // Uniform drop in an annulus [r_min, cell_radius] around the serving BS.
  std::vector<std::pair<double, double>> ue(static_cast<std::size_t>(num_users));
  for (int u = 0; u < num_users; ++u) {
    const int b = cfg.serving_bs(u);
    const double r =
        std::sqrt(rng.uniform() * (cell_radius * cell_radius - r_min * r_min) + r_min * r_min);
    const double phi = 2.0 * std::numbers::pi * rng.uniform();
    ue[static_cast<std::size_t>(u)] = {bs[static_cast<std::size_t>(b)].first + r * std::cos(phi),
                                       bs[static_cast<std::size_t>(b)].second + r * std::sin(phi)};
  }
  for (int b = 0; b < num_bs; ++b) {
    for (int u = 0; u < num_users; ++u) {
      const double dx = ue[static_cast<std::size_t>(u)].first - bs[static_cast<std::size_t>(b)].first;
      const double dy = ue[static_cast<std::size_t>(u)].second - bs[static_cast<std::size_t>(b)].second;
      const double d = std::max(r_min, std::hypot(dx, dy));
      const double loss_db = cfg.pathloss_ref_db + 10.0 * cfg.pathloss_exponent * std::log10(d);
      pl[static_cast<std::size_t>(b * num_users + u)] = std::pow(10.0, -loss_db / 10.0);
    }
  }
  return pl;
}

}  // namespace

ChannelState generate_channel(const ScenarioConfig& cfg, RngStream& rng, int tti,
                              const ChannelState* previous) {
  const int num_users = cfg.num_users();
  ChannelState state;
  state.tti = tti;
  state.grid.resize(cfg.num_bs, num_users, cfg.num_subchannels, cfg.rx_antennas, cfg.tx_antennas);

  if (previous != nullptr) {
    if (!previous->grid.same_shape(state.grid))
      throw ConfigError("generate_channel: previous state has mismatched dimensions");
    state.pathloss = previous->pathloss;
  } else {
    state.pathloss = draw_pathloss(cfg, rng);
  }

  const double c = previous != nullptr ? cfg.time_corr : 1.0;
  const bool evolve = previous != nullptr && c < 1.0;
  const bool fresh = previous == nullptr;
  if (previous != nullptr && !evolve) {
    state.grid.h = previous->grid.h;  // perfectly correlated
    return state;
  }
  const double innov = std::sqrt(1.0 - c * c);
  for (int b = 0; b < cfg.num_bs; ++b) {
    for (int u = 0; u < num_users; ++u) {
      const double amp = std::sqrt(state.pathloss_at(b, u));
      for (int n = 0; n < cfg.num_subchannels; ++n) {
        CMat& m = state.grid.at(b, u, n);
        for (int col = 0; col < cfg.tx_antennas; ++col) {
          for (int row = 0; row < cfg.rx_antennas; ++row) {
            const std::complex<double> g = amp * rng.complex_normal();
            m(row, col) = fresh ? g : c * previous->grid.at(b, u, n)(row, col) + innov * g;
          }
        }
      }
    }
  }
  return state;
}

CsiEstimate corrupt_csi(const ChannelState& ch, double reliability, RngStream& rng) {
  if (!(reliability >= 0.0 && reliability <= 1.0))
    throw std::invalid_argument("corrupt_csi: reliability must be in [0,1]");
  CsiEstimate est;
  est.reliability = reliability;
  est.grid = ch.grid;
  if (reliability == 1.0) return est;
  const double err = std::sqrt(1.0 - reliability * reliability);
  for (CMat& m : est.grid.h) {
    for (int col = 0; col < m.cols(); ++col)
      for (int row = 0; row < m.rows(); ++row)
        m(row, col) = reliability * m(row, col) + err * rng.complex_normal();
  }
  return est;
}

void write_channel_csv(const ChannelState& ch, std::ostream& os) {
  os << "tti,b,u,n,row,col,re,im\n";
  char buf[64];
  for (int b = 0; b < ch.grid.num_bs; ++b)
    for (int u = 0; u < ch.grid.num_users; ++u)
      for (int n = 0; n < ch.grid.num_subchannels; ++n) {
        const CMat& m = ch.grid.at(b, u, n);
        for (int row = 0; row < m.rows(); ++row)
          for (int col = 0; col < m.cols(); ++col) {
            os << ch.tti << ',' << b << ',' << u << ',' << n << ',' << row << ',' << col << ',';
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", m(row, col).real(), m(row, col).imag());
            os << buf;
          }
      }
}

}  // namespace mcmimo
