#pragma once

#include <vector>

#include "mcmimo/channel.hpp"

namespace mcmimo {

/// Transmit matrices M (N_T x S) and receive matrices W (N_R x S) for
/// every (user, sub-channel). Inactive users keep all-zero tx matrices.
struct BeamformerSet {
  int num_users = 0;
  int num_subchannels = 0;
  std::vector<CMat> tx_mats;
  std::vector<CMat> rx_mats;

  void resize(int users, int subchannels, int tx_antennas, int rx_antennas, int streams);
  const CMat& tx(int u, int n) const { return tx_mats[static_cast<std::size_t>(u * num_subchannels + n)]; }
  CMat& tx(int u, int n) { return tx_mats[static_cast<std::size_t>(u * num_subchannels + n)]; }
  const CMat& rx(int u, int n) const { return rx_mats[static_cast<std::size_t>(u * num_subchannels + n)]; }
  CMat& rx(int u, int n) { return rx_mats[static_cast<std::size_t>(u * num_subchannels + n)]; }
};

/// Per-BS transmit power: sum over served users and sub-channels of
/// trace(M M^H).
double bs_power(const BeamformerSet& bf, int bs, int users_per_bs);

/// log2 det of a Hermitian positive definite matrix via Cholesky, summed in
/// the log domain. Throws NumericalError when the matrix is not PD.
double log2_det_hermitian_pd(const CMat& a);

// ---------------------------------------------------------------------------
// Effective-channel kernels. `eff` holds, for one receiving user and one
// sub-channel, the matrices H_{b_i,u,n} M_{i,n} for every transmitting user
// i in ascending order (zero columns for silent users). Receivers only ever
// see these products, so both the centralized solver and the per-node
// message-passing realization share these exact code paths.
// ---------------------------------------------------------------------------

/// Achievable rate (bits/s/Hz on one sub-channel) treating all non-self
/// streams as noise. Zero when the own effective channel is zero.
double rate_from_effective(const std::vector<CMat>& eff, int self, double sigma2);

/// MMSE receive matrix: (sum_i eff_i eff_i^H + sigma2 I)^{-1} eff_self.
CMat mmse_receiver_from_effective(const std::vector<CMat>& eff, int self, double sigma2);

/// Error covariance of the linear estimate for the given receive matrix:
/// (I - W^H eff_self)(.)^H + sum_{i != self} (W^H eff_i)(.)^H + sigma2 W^H W.
CMat mse_from_effective(const std::vector<CMat>& eff, int self, const CMat& rx, double sigma2);

/// First-order lower bound of -log2 det(e) expanded around e_ref:
/// -log2 det(e_ref) - trace(e_ref^{-1} (e - e_ref)) / ln 2.
double taylor_rate_bound(const CMat& e, const CMat& e_ref);

// ---------------------------------------------------------------------------
// Grid-level wrappers: materialize the effective channels from a channel
// grid and a beamformer set, then delegate to the kernels above. The
// serving BS of user u is u / (num_users / num_bs).
// ---------------------------------------------------------------------------

std::vector<CMat> effective_channels(const ChannelGrid& h, const BeamformerSet& bf, int u, int n);

double user_rate(const ChannelGrid& h, const BeamformerSet& bf, int u, int n, double sigma2);
CMat mmse_receiver(const ChannelGrid& h, const BeamformerSet& bf, int u, int n, double sigma2);
CMat mse_matrix(const ChannelGrid& h, const BeamformerSet& bf, int u, int n, double sigma2);

}  // namespace mcmimo
