#include "mcmimo/optimizer.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <sstream>

#include "mcmimo/errors.hpp"

namespace mcmimo {

void ProblemInstance::validate() const {
  if (channel == nullptr) throw ConfigError("ProblemInstance: channel is null");
  const int users = channel->num_users;
  const int bs = channel->num_bs;
  if (bs < 1 || users < 1 || users % bs != 0)
    throw ConfigError("ProblemInstance: users must be a positive multiple of BS count");
  if (static_cast<int>(beta.size()) != users || static_cast<int>(loads.size()) != users)
    throw ConfigError("ProblemInstance: beta/loads must have one entry per user");
  if (static_cast<int>(power_budget.size()) != bs)
    throw ConfigError("ProblemInstance: power_budget must have one entry per BS");
  if (!(sigma2 > 0.0)) throw ConfigError("ProblemInstance: sigma2 must be > 0");
  for (double p : power_budget)
    if (!(p > 0.0)) throw ConfigError("ProblemInstance: power budgets must be > 0");
  if (!warm_gamma.empty() && static_cast<int>(warm_gamma.size()) != users)
    throw ConfigError("ProblemInstance: warm_gamma size mismatch");
  if (!warm_phi.empty() && static_cast<int>(warm_phi.size()) != users)
    throw ConfigError("ProblemInstance: warm_phi size mismatch");
}

CMat update_theta(const CMat& theta, double psi, const CMat& e_ref, double step) {
  if (!(step > 0.0 && step <= 1.0)) throw std::invalid_argument("update_theta: step must be in (0,1]");
  CMat target;
  if (psi == 0.0) {
    target = CMat::Zero(theta.rows(), theta.cols());
  } else {
    Eigen::LLT<CMat> llt(e_ref);
    if (llt.info() != Eigen::Success)
      throw NumericalError("update_theta: expansion point is not positive definite");
    target = (psi / std::numbers::ln2) *
             llt.solve(CMat::Identity(e_ref.rows(), e_ref.cols()));
  }
  CMat next = theta + step * (target - theta);
  return 0.5 * (next + next.adjoint().eval());
}

std::pair<double, double> update_gamma_phi(double gamma, double phi, double rhat_sum, double r_min,
                                           double queue_cap, double step) {
  const double g = gamma + step * (r_min - rhat_sum);
  const double p = phi + step * (rhat_sum - queue_cap);
  return {g > 0.0 ? g : 0.0, p > 0.0 ? p : 0.0};
}

TxSolveResult solve_tx_beamformers(const TxSolveRequest& req) {
  TxSolveResult res;
  const std::size_t num_rhs = req.rhs.size();
  res.m.resize(num_rhs);
  if (num_rhs == 0) return res;
  if (req.rhs_subchannel.size() != num_rhs)
    throw std::invalid_argument("solve_tx_beamformers: rhs_subchannel size mismatch");

  // One Hermitian eigendecomposition per sub-channel, then the power is a
  // cheap scalar function of nu and the bisection never refactorizes.
  const std::size_t num_sub = req.q.size();
  std::vector<Eigen::VectorXd> evals(num_sub);
  std::vector<CMat> evecs(num_sub);
  for (std::size_t n = 0; n < num_sub; ++n) {
    Eigen::SelfAdjointEigenSolver<CMat> es(req.q[n]);
    if (es.info() != Eigen::Success)
      throw NumericalError("solve_tx_beamformers: eigendecomposition failed");
    evals[n] = es.eigenvalues().cwiseMax(0.0);  // PSD up to roundoff
    evecs[n] = es.eigenvectors();
  }

  std::vector<CMat> rt(num_rhs);  // rhs rotated into the eigenbasis
  double total_sq = 0;
  for (std::size_t k = 0; k < num_rhs; ++k) {
    rt[k] = evecs[static_cast<std::size_t>(req.rhs_subchannel[k])].adjoint() * req.rhs[k];
    total_sq += rt[k].squaredNorm();
  }

  const auto power_at = [&](double nu) {
    double p = 0;
    for (std::size_t k = 0; k < num_rhs; ++k) {
      const auto& lam = evals[static_cast<std::size_t>(req.rhs_subchannel[k])];
      for (Eigen::Index i = 0; i < rt[k].rows(); ++i) {
        const double d = lam(i) + nu;
        p += rt[k].row(i).squaredNorm() / (d * d);
      }
    }
    return p;
  };

  // Unconstrained check with minimum-norm semantics on singular directions.
  double lam_max = 0;
  for (const auto& lam : evals) if (lam.size() > 0) lam_max = std::max(lam_max, lam(lam.size() - 1));
  const double rank_tol = lam_max * 1e-13;
  double p0 = 0;
  for (std::size_t k = 0; k < num_rhs; ++k) {
    const auto& lam = evals[static_cast<std::size_t>(req.rhs_subchannel[k])];
    for (Eigen::Index i = 0; i < rt[k].rows(); ++i) {
      const double sq = rt[k].row(i).squaredNorm();
      if (lam(i) <= rank_tol) continue;  // rhs lies in range(Q); drop null rows
      p0 += sq / (lam(i) * lam(i));
    }
  }

  double nu = 0;
  if (p0 <= req.power_budget + req.power_tol) {
    res.nu = 0;
    res.power = p0;
  } else {
    double lo = 0;
    double hi = std::sqrt(total_sq / req.power_budget);  // power(hi) <= budget
    double p_hi = power_at(hi);
    res.bisection_trace.emplace_back(hi, p_hi);
    if (p_hi > req.power_budget) {
      std::ostringstream msg;
      msg << "solve_tx_beamformers: bisection bracket failed (power(" << hi << ") = " << p_hi
          << " > budget " << req.power_budget << ")";
      throw SolverError(msg.str());
    }
    int it = 0;
    while (req.power_budget - p_hi > req.power_tol && it++ < 300) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;  // bracket exhausted at double precision
      const double p_mid = power_at(mid);
      res.bisection_trace.emplace_back(mid, p_mid);
      if (p_mid > req.power_budget) {
        lo = mid;
      } else {
        hi = mid;
        p_hi = p_mid;
      }
    }
    nu = hi;
    res.nu = nu;
    res.power = p_hi;
  }

  for (std::size_t k = 0; k < num_rhs; ++k) {
    const std::size_t n = static_cast<std::size_t>(req.rhs_subchannel[k]);
    const auto& lam = evals[n];
    CMat scaled = rt[k];
    for (Eigen::Index i = 0; i < scaled.rows(); ++i) {
      if (nu == 0.0 && lam(i) <= rank_tol)
        scaled.row(i).setZero();
      else
        scaled.row(i) /= (lam(i) + nu);
    }
    res.m[k] = evecs[n] * scaled;
  }
  return res;
}

}  // namespace mcmimo
