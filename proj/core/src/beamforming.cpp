#include "mcmimo/beamforming.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <numbers>

#include "mcmimo/errors.hpp"

namespace mcmimo {

void BeamformerSet::resize(int users, int subchannels, int tx_antennas, int rx_antennas,
                           int streams) {
  num_users = users;
  num_subchannels = subchannels;
  tx_mats.assign(static_cast<std::size_t>(users) * subchannels, CMat::Zero(tx_antennas, streams));
  rx_mats.assign(static_cast<std::size_t>(users) * subchannels, CMat::Zero(rx_antennas, streams));
}

double bs_power(const BeamformerSet& bf, int bs, int users_per_bs) {
  double p = 0;
  for (int j = 0; j < users_per_bs; ++j) {
    const int u = bs * users_per_bs + j;
    for (int n = 0; n < bf.num_subchannels; ++n) p += bf.tx(u, n).squaredNorm();
  }
  return p;
}

double log2_det_hermitian_pd(const CMat& a) {
  Eigen::LLT<CMat> llt(a);
  if (llt.info() != Eigen::Success)
    throw NumericalError("log2_det_hermitian_pd: matrix is not positive definite");
  double log_det = 0;
  const auto& l = llt.matrixLLT();
  for (Eigen::Index i = 0; i < l.rows(); ++i) log_det += std::log(l(i, i).real());
  return 2.0 * log_det / std::numbers::ln2;
}

double rate_from_effective(const std::vector<CMat>& eff, int self, double sigma2) {
  const CMat& own = eff[static_cast<std::size_t>(self)];
  if (own.isZero(0.0)) return 0.0;
  const Eigen::Index nr = own.rows();
  CMat cov = sigma2 * CMat::Identity(nr, nr);
  for (int i = 0; i < static_cast<int>(eff.size()); ++i) {
    if (i == self) continue;
    const CMat& e = eff[static_cast<std::size_t>(i)];
    if (e.size() != 0) cov.noalias() += e * e.adjoint();
  }
  const CMat x = Eigen::LLT<CMat>(cov).solve(own);
  const CMat g = own.adjoint() * x;
  return log2_det_hermitian_pd(CMat::Identity(g.rows(), g.cols()) + g);
}

CMat mmse_receiver_from_effective(const std::vector<CMat>& eff, int self, double sigma2) {
  const CMat& own = eff[static_cast<std::size_t>(self)];
  const Eigen::Index nr = own.rows();
  CMat cov = sigma2 * CMat::Identity(nr, nr);
  for (const CMat& e : eff)
    if (e.size() != 0) cov.noalias() += e * e.adjoint();
  return Eigen::LLT<CMat>(cov).solve(own);
}

CMat mse_from_effective(const std::vector<CMat>& eff, int self, const CMat& rx, double sigma2) {
  const CMat& own = eff[static_cast<std::size_t>(self)];
  const Eigen::Index s = own.cols();
  const CMat z0 = CMat::Identity(s, s) - rx.adjoint() * own;
  CMat e = z0 * z0.adjoint();
  for (int i = 0; i < static_cast<int>(eff.size()); ++i) {
    if (i == self) continue;
    const CMat& ei = eff[static_cast<std::size_t>(i)];
    if (ei.size() == 0) continue;
    const CMat zi = rx.adjoint() * ei;
    e.noalias() += zi * zi.adjoint();
  }
  e.noalias() += sigma2 * (rx.adjoint() * rx);
  return e;
}

double taylor_rate_bound(const CMat& e, const CMat& e_ref) {
  Eigen::LLT<CMat> llt(e_ref);
  if (llt.info() != Eigen::Success)
    throw NumericalError(
        "taylor_rate_bound: expansion point is numerically singular "
        "(smallest pivot lost during Cholesky)");
  double log_det = 0;
  const auto& l = llt.matrixLLT();
  for (Eigen::Index i = 0; i < l.rows(); ++i) log_det += std::log(l(i, i).real());
  const CMat x = llt.solve(e - e_ref);
  return (-2.0 * log_det - x.trace().real()) / std::numbers::ln2;
}

std::vector<CMat> effective_channels(const ChannelGrid& h, const BeamformerSet& bf, int u, int n) {
  const int users_per_bs = h.num_users / h.num_bs;
  std::vector<CMat> eff(static_cast<std::size_t>(h.num_users));
  for (int i = 0; i < h.num_users; ++i)
    eff[static_cast<std::size_t>(i)] = h.at(i / users_per_bs, u, n) * bf.tx(i, n);
  return eff;
}

double user_rate(const ChannelGrid& h, const BeamformerSet& bf, int u, int n, double sigma2) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("user_rate: sigma2 must be > 0");
  return rate_from_effective(effective_channels(h, bf, u, n), u, sigma2);
}

CMat mmse_receiver(const ChannelGrid& h, const BeamformerSet& bf, int u, int n, double sigma2) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("mmse_receiver: sigma2 must be > 0");
  return mmse_receiver_from_effective(effective_channels(h, bf, u, n), u, sigma2);
}

CMat mse_matrix(const ChannelGrid& h, const BeamformerSet& bf, int u, int n, double sigma2) {
  return mse_from_effective(effective_channels(h, bf, u, n), u, bf.rx(u, n), sigma2);
}

}  // namespace mcmimo
