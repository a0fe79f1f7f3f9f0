#include <cmath>
#include <numbers>
#include <sstream>

#include "mcmimo/errors.hpp"
#include "mcmimo/optimizer.hpp"

namespace mcmimo {

void UeAlgoState::init(int user_, int num_users_, int subchannels_, int rx_antennas, int streams,
                       double sigma2_, double beta_, const UserLoad& load_, double gamma0,
                       double phi0) {
  user = user_;
  num_users = num_users_;
  subchannels = subchannels_;
  sigma2 = sigma2_;
  beta = beta_;
  load = load_;
  gamma = gamma0;
  phi = phi0;
  eff.assign(static_cast<std::size_t>(subchannels),
             std::vector<CMat>(static_cast<std::size_t>(num_users), CMat::Zero(rx_antennas, streams)));
  rx.assign(static_cast<std::size_t>(subchannels), CMat::Zero(rx_antennas, streams));
  e_ref.assign(static_cast<std::size_t>(subchannels), CMat::Identity(streams, streams));
  e_meas = e_ref;
  const double psi0 = update_psi(beta, gamma, phi);
  theta.assign(static_cast<std::size_t>(subchannels),
               (psi0 / std::numbers::ln2) * CMat::Identity(streams, streams));
  rhat.assign(static_cast<std::size_t>(subchannels), 0.0);
  psi.assign(static_cast<std::size_t>(subchannels), psi0);
  neg_log_det.assign(static_cast<std::size_t>(subchannels), 0.0);
  e_ref_valid = false;
}

void UeAlgoState::update_receivers() {
  for (int n = 0; n < subchannels; ++n)
    rx[static_cast<std::size_t>(n)] =
        mmse_receiver_from_effective(eff[static_cast<std::size_t>(n)], user, sigma2);
}

void UeAlgoState::inner_update(double step) {
  for (int n = 0; n < subchannels; ++n) {
    const std::size_t sn = static_cast<std::size_t>(n);
    e_meas[sn] = mse_from_effective(eff[sn], user, rx[sn], sigma2);
  }
  if (!e_ref_valid) {
    e_ref = e_meas;
    e_ref_valid = true;
  }
  for (int n = 0; n < subchannels; ++n) {
    const std::size_t sn = static_cast<std::size_t>(n);
    rhat[sn] = taylor_rate_bound(e_meas[sn], e_ref[sn]);
    neg_log_det[sn] = -log2_det_hermitian_pd(e_meas[sn]);
    psi[sn] = update_psi(beta, gamma, phi);
  }
  const double rsum = rhat_sum();
  std::tie(gamma, phi) = update_gamma_phi(gamma, phi, rsum, load.min_rate, load.rate_cap, step);
  for (int n = 0; n < subchannels; ++n) {
    const std::size_t sn = static_cast<std::size_t>(n);
    theta[sn] = update_theta(theta[sn], psi[sn], e_ref[sn], step);
  }
}

void UeAlgoState::commit_sca_point() { e_ref = e_meas; }

double UeAlgoState::rhat_sum() const {
  double s = 0;
  for (double r : rhat) s += r;
  return s;
}

double UeAlgoState::achievable_rate_sum(double* per_subchannel) const {
  double s = 0;
  for (int n = 0; n < subchannels; ++n) {
    const double r = rate_from_effective(eff[static_cast<std::size_t>(n)], user, sigma2);
    if (per_subchannel != nullptr) per_subchannel[n] = r;
    s += r;
  }
  return s;
}

void BsAlgoState::init(int bs_, int num_users_, int users_per_bs_, int subchannels_,
                       int tx_antennas_, int streams_, double power_budget_, double power_tol_) {
  bs = bs_;
  num_users = num_users_;
  users_per_bs = users_per_bs_;
  subchannels = subchannels_;
  tx_antennas = tx_antennas_;
  streams = streams_;
  power_budget = power_budget_;
  power_tol = power_tol_;
  ul_eff.assign(static_cast<std::size_t>(num_users) * subchannels, CMat::Zero(tx_antennas, streams));
  theta.assign(static_cast<std::size_t>(num_users) * subchannels, CMat::Zero(streams, streams));
  active.assign(static_cast<std::size_t>(num_users), 0);
  nu = 0;
  power = 0;
}

std::vector<CMat> BsAlgoState::solve_tx() {
  TxSolveRequest req;
  req.power_budget = power_budget;
  req.power_tol = power_tol;
  req.q.assign(static_cast<std::size_t>(subchannels), CMat::Zero(tx_antennas, tx_antennas));
  for (int n = 0; n < subchannels; ++n) {
    CMat& q = req.q[static_cast<std::size_t>(n)];
    for (int i = 0; i < num_users; ++i) {
      if (!active[static_cast<std::size_t>(i)]) continue;
      const CMat& g = ul(i, n);
      q.noalias() += g * th(i, n) * g.adjoint();
    }
  }
  for (int j = 0; j < users_per_bs; ++j) {
    const int u = bs * users_per_bs + j;
    if (!active[static_cast<std::size_t>(u)]) continue;
    for (int n = 0; n < subchannels; ++n) {
      req.rhs.push_back(ul(u, n) * th(u, n));
      req.rhs_subchannel.push_back(n);
    }
  }
  TxSolveResult sol = solve_tx_beamformers(req);
  nu = sol.nu;
  power = sol.power;
  bisection_trace = std::move(sol.bisection_trace);

  std::vector<CMat> out(static_cast<std::size_t>(users_per_bs) * subchannels,
                        CMat::Zero(tx_antennas, streams));
  std::size_t k = 0;
  for (int j = 0; j < users_per_bs; ++j) {
    const int u = bs * users_per_bs + j;
    if (!active[static_cast<std::size_t>(u)]) continue;
    for (int n = 0; n < subchannels; ++n)
      out[static_cast<std::size_t>(j * subchannels + n)] = std::move(sol.m[k++]);
  }
  return out;
}

namespace {

int count_active(const ProblemInstance& inst) {
  int c = 0;
  for (const auto& l : inst.loads) c += l.active ? 1 : 0;
  return c;
}

void matched_filter_init(const ProblemInstance& inst, BeamformerSet& bf) {
  const ChannelGrid& h = *inst.channel;
  const int users_per_bs = inst.users_per_bs();
  const int streams = static_cast<int>(bf.tx(0, 0).cols());
  for (int b = 0; b < h.num_bs; ++b) {
    int cols = 0;
    for (int j = 0; j < users_per_bs; ++j)
      if (inst.loads[static_cast<std::size_t>(b * users_per_bs + j)].active)
        cols += h.num_subchannels * streams;
    if (cols == 0) continue;
    const double col_power = inst.power_budget[static_cast<std::size_t>(b)] / cols;
    for (int j = 0; j < users_per_bs; ++j) {
      const int u = b * users_per_bs + j;
      if (!inst.loads[static_cast<std::size_t>(u)].active) continue;
      for (int n = 0; n < h.num_subchannels; ++n) {
        CMat m = h.at(b, u, n).adjoint().leftCols(streams);
        for (int s = 0; s < streams; ++s) {
          const double norm = m.col(s).norm();
          if (norm > 0.0) m.col(s) *= std::sqrt(col_power) / norm;
        }
        bf.tx(u, n) = std::move(m);
      }
    }
  }
}

double step_for(const SolverConfig& cfg, int total_inner) {
  if (cfg.step_schedule == StepSchedule::fixed) return cfg.step_size;
  return cfg.step_size / std::sqrt(1.0 + total_inner);
}

IterateSnapshot make_snapshot(int outer, int inner, const std::vector<UeAlgoState>& ues,
                              const std::vector<BsAlgoState>& bss, const BeamformerSet& bf,
                              const ProblemInstance& inst) {
  IterateSnapshot snap;
  snap.outer = outer;
  snap.inner = inner;
  const int num_sub = inst.channel->num_subchannels;
  snap.rhat.assign(static_cast<std::size_t>(ues.size()) * num_sub, 0.0);
  snap.bound_margin = std::numeric_limits<double>::infinity();
  double violation = 0;
  for (const auto& ue : ues) {
    if (!ue.load.active) continue;
    const double rsum = ue.rhat_sum();
    snap.objective += ue.beta * rsum;
    snap.weighted_sum_rate += ue.beta * ue.achievable_rate_sum();
    for (int n = 0; n < num_sub; ++n) {
      const std::size_t sn = static_cast<std::size_t>(n);
      snap.rhat[static_cast<std::size_t>(ue.user * num_sub + n)] = ue.rhat[sn];
      snap.bound_margin = std::min(snap.bound_margin, ue.neg_log_det[sn] - ue.rhat[sn]);
    }
    violation = std::max(violation, ue.load.min_rate - rsum);
    if (std::isfinite(ue.load.rate_cap)) violation = std::max(violation, rsum - ue.load.rate_cap);
  }
  snap.bs_power.resize(bss.size());
  for (std::size_t b = 0; b < bss.size(); ++b) {
    snap.bs_power[b] = bs_power(bf, static_cast<int>(b), inst.users_per_bs());
    violation = std::max(violation, snap.bs_power[b] - inst.power_budget[b]);
  }
  snap.constraint_violation = std::max(violation, 0.0);
  if (!std::isfinite(snap.bound_margin)) snap.bound_margin = 0.0;
  return snap;
}

KktReport final_kkt_report(const std::vector<UeAlgoState>& ues, const std::vector<BsAlgoState>& bss,
                           const BeamformerSet& bf, const ProblemInstance& inst) {
  KktReport kkt;
  kkt.chain_margin = std::numeric_limits<double>::infinity();
  const int num_sub = inst.channel->num_subchannels;
  bool any_active = false;
  for (const auto& ue : ues) {
    if (!ue.load.active) continue;
    any_active = true;
    for (int n = 0; n < num_sub; ++n) {
      const std::size_t sn = static_cast<std::size_t>(n);
      const CMat e_now = mse_from_effective(ue.eff[sn], ue.user, ue.rx[sn], ue.sigma2);
      const double bound = taylor_rate_bound(e_now, ue.e_ref[sn]);
      kkt.surrogate_tightness = std::max(kkt.surrogate_tightness, std::abs(ue.rhat[sn] - bound));
      const double rate = rate_from_effective(ue.eff[sn], ue.user, ue.sigma2);
      kkt.chain_margin = std::min(kkt.chain_margin, rate - ue.rhat[sn]);
    }
  }
  if (!any_active) kkt.chain_margin = 0.0;

  const int users_per_bs = inst.users_per_bs();
  for (const auto& bs : bss) {
    kkt.power_slackness = std::max(
        kkt.power_slackness, bs.nu * (bs.power_budget - bs_power(bf, bs.bs, users_per_bs)));
    for (int n = 0; n < num_sub; ++n) {
      CMat q = CMat::Zero(bs.tx_antennas, bs.tx_antennas);
      for (int i = 0; i < bs.num_users; ++i) {
        if (!bs.active[static_cast<std::size_t>(i)]) continue;
        const CMat& g = bs.ul_eff[static_cast<std::size_t>(i * num_sub + n)];
        q.noalias() += g * bs.theta[static_cast<std::size_t>(i * num_sub + n)] * g.adjoint();
      }
      q += bs.nu * CMat::Identity(bs.tx_antennas, bs.tx_antennas);
      for (int j = 0; j < users_per_bs; ++j) {
        const int u = bs.bs * users_per_bs + j;
        if (!bs.active[static_cast<std::size_t>(u)]) continue;
        const CMat rhs = bs.ul_eff[static_cast<std::size_t>(u * num_sub + n)] *
                         bs.theta[static_cast<std::size_t>(u * num_sub + n)];
        const double resid = (q * bf.tx(u, n) - rhs).cwiseAbs().maxCoeff();
        kkt.stationarity_residual = std::max(kkt.stationarity_residual, resid);
      }
    }
  }
  return kkt;
}

DualState collect_duals(const std::vector<UeAlgoState>& ues, const std::vector<BsAlgoState>& bss) {
  DualState d;
  const int num_sub = ues.empty() ? 0 : ues.front().subchannels;
  d.psi.reserve(ues.size() * static_cast<std::size_t>(num_sub));
  d.theta.reserve(ues.size() * static_cast<std::size_t>(num_sub));
  for (const auto& ue : ues) {
    d.gamma.push_back(ue.gamma);
    d.phi.push_back(ue.phi);
    for (int n = 0; n < num_sub; ++n) {
      d.psi.push_back(ue.psi[static_cast<std::size_t>(n)]);
      d.theta.push_back(ue.theta[static_cast<std::size_t>(n)]);
    }
  }
  for (const auto& bs : bss) d.nu.push_back(bs.nu);
  return d;
}

}  // namespace

void build_algo_states(const ProblemInstance& inst, const SolverConfig& cfg,
                       std::vector<UeAlgoState>& ues, std::vector<BsAlgoState>& bss,
                       BeamformerSet& bf) {
  inst.validate();
  cfg.validate();
  const ChannelGrid& h = *inst.channel;
  const int streams = std::min(h.rx_antennas, h.tx_antennas);
  bf.resize(h.num_users, h.num_subchannels, h.tx_antennas, h.rx_antennas, streams);
  matched_filter_init(inst, bf);

  ues.resize(static_cast<std::size_t>(h.num_users));
  for (int u = 0; u < h.num_users; ++u) {
    const std::size_t su = static_cast<std::size_t>(u);
    const double g0 = inst.warm_gamma.empty() ? 0.0 : inst.warm_gamma[su];
    const double p0 = inst.warm_phi.empty() ? 0.0 : inst.warm_phi[su];
    ues[su].init(u, h.num_users, h.num_subchannels, h.rx_antennas, streams, inst.sigma2,
                 inst.beta[su], inst.loads[su], g0, p0);
  }
  bss.resize(static_cast<std::size_t>(h.num_bs));
  for (int b = 0; b < h.num_bs; ++b) {
    auto& bs = bss[static_cast<std::size_t>(b)];
    bs.init(b, h.num_users, inst.users_per_bs(), h.num_subchannels, h.tx_antennas, streams,
            inst.power_budget[static_cast<std::size_t>(b)], cfg.power_tol);
    for (int u = 0; u < h.num_users; ++u)
      bs.active[static_cast<std::size_t>(u)] = inst.loads[static_cast<std::size_t>(u)].active;
  }
}

SolveResult run_primal_dual(std::vector<UeAlgoState>& ues, std::vector<BsAlgoState>& bss,
                            BeamformerSet& bf, SignalingLayer& sig, const ProblemInstance& inst,
                            const SolverConfig& cfg) {
  SolveResult result;
  result.bf = bf;
  if (count_active(inst) == 0) {
    result.duals = collect_duals(ues, bss);
    result.converged = true;
    return result;
  }

  sig.broadcast_dl_pilots();

  const int users_per_bs = inst.users_per_bs();
  std::vector<double> outer_objectives;
  int total_inner = 0;
  bool converged = false;

  for (int outer = 0; outer < cfg.max_outer && !converged; ++outer) {
    for (auto& ue : ues)
      if (ue.load.active) ue.update_receivers();

    double prev_inner_obj = std::numeric_limits<double>::quiet_NaN();
    for (int inner = 0; inner < cfg.max_inner; ++inner) {
      const double step = step_for(cfg, total_inner);
      for (auto& ue : ues)
        if (ue.load.active) ue.inner_update(step);
      sig.feedback_and_share();
      for (auto& bs : bss) {
        std::vector<CMat> m = bs.solve_tx();
        for (int j = 0; j < users_per_bs; ++j)
          for (int n = 0; n < bf.num_subchannels; ++n)
            bf.tx(bs.bs * users_per_bs + j, n) =
                std::move(m[static_cast<std::size_t>(j * bf.num_subchannels + n)]);
      }
      sig.broadcast_dl_pilots();
      for (auto& ue : ues)
        if (ue.load.active) ue.commit_sca_point();
      sig.end_inner_iteration();
      ++total_inner;

      IterateSnapshot snap = make_snapshot(outer, inner, ues, bss, bf, inst);
      if (!std::isfinite(snap.objective) || !std::isfinite(snap.weighted_sum_rate)) {
        std::ostringstream msg;
        msg << "primal-dual solver diverged at outer " << outer << " inner " << inner
            << ": objective=" << snap.objective << " sum_rate=" << snap.weighted_sum_rate;
        for (const auto& ue : ues)
          if (ue.load.active)
            msg << "\n  user " << ue.user << ": rhat_sum=" << ue.rhat_sum()
                << " gamma=" << ue.gamma << " phi=" << ue.phi;
        throw SolverError(msg.str());
      }
      const double obj = snap.objective;
      result.trace.push_back(std::move(snap));

      if (inner > 0 &&
          std::abs(obj - prev_inner_obj) < cfg.converge_tol * std::max(1.0, std::abs(obj)))
        break;
      prev_inner_obj = obj;
    }

    result.outer_iterations = outer + 1;
    const double outer_obj = result.trace.back().objective;
    outer_objectives.push_back(outer_obj);
    // converged when the last three outer-level changes are all below tol
    const std::size_t m = outer_objectives.size();
    if (m >= 4) {
      converged = true;
      for (std::size_t k = m - 3; k < m; ++k) {
        const double delta = std::abs(outer_objectives[k] - outer_objectives[k - 1]);
        if (delta >= cfg.converge_tol * std::max(1.0, std::abs(outer_objectives[k])))
          converged = false;
      }
    }
  }

  result.inner_iterations = total_inner;
  result.converged = converged;
  result.bf = bf;
  // carry final receive matrices alongside the transmit set
  for (auto& ue : ues)
    for (int n = 0; n < bf.num_subchannels; ++n)
      result.bf.rx(ue.user, n) = ue.rx[static_cast<std::size_t>(n)];
  result.duals = collect_duals(ues, bss);
  result.kkt = final_kkt_report(ues, bss, bf, inst);
  return result;
}

namespace {

/// Signaling layer of the centralized solver: the controller owns global
/// CSI, so pilots collapse to direct reads of the channel grid.
class DirectSignaling final : public SignalingLayer {
 public:
  DirectSignaling(std::vector<UeAlgoState>& ues, std::vector<BsAlgoState>& bss, BeamformerSet& bf,
                  const ChannelGrid& h)
      : ues_(ues), bss_(bss), bf_(bf), h_(h), users_per_bs_(h.num_users / h.num_bs) {}

  void broadcast_dl_pilots() override {
    for (auto& ue : ues_) {
      if (!ue.load.active) continue;
      for (int n = 0; n < h_.num_subchannels; ++n)
        for (int i = 0; i < h_.num_users; ++i)
          ue.eff[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)] =
              h_.at(i / users_per_bs_, ue.user, n) * bf_.tx(i, n);
    }
  }

  void feedback_and_share() override {
    for (auto& bs : bss_) {
      for (int i = 0; i < h_.num_users; ++i) {
        const auto& ue = ues_[static_cast<std::size_t>(i)];
        if (!ue.load.active) continue;
        for (int n = 0; n < h_.num_subchannels; ++n) {
          bs.ul(i, n) = h_.at(bs.bs, i, n).adjoint() * ue.rx[static_cast<std::size_t>(n)];
          bs.th(i, n) = ue.theta[static_cast<std::size_t>(n)];
        }
      }
    }
  }

 private:
  std::vector<UeAlgoState>& ues_;
  std::vector<BsAlgoState>& bss_;
  BeamformerSet& bf_;
  const ChannelGrid& h_;
  int users_per_bs_;
};

}  // namespace

SolveResult run_centralized(const ProblemInstance& inst, const SolverConfig& cfg) {
  std::vector<UeAlgoState> ues;
  std::vector<BsAlgoState> bss;
  BeamformerSet bf;
  build_algo_states(inst, cfg, ues, bss, bf);
  DirectSignaling sig(ues, bss, bf, *inst.channel);
  return run_primal_dual(ues, bss, bf, sig, inst, cfg);
}

SolveResult run_wmmse_baseline(const ProblemInstance& inst, const SolverConfig& cfg) {
  ProblemInstance full = inst;
  full.loads.assign(inst.loads.size(), UserLoad{true, 0.0, std::numeric_limits<double>::infinity()});
  full.warm_gamma.clear();
  full.warm_phi.clear();
  return run_centralized(full, cfg);
}

}  // namespace mcmimo
