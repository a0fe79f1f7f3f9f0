#pragma once

#include <limits>
#include <utility>
#include <vector>

#include "mcmimo/beamforming.hpp"
#include "mcmimo/channel.hpp"
#include "mcmimo/scenario.hpp"

namespace mcmimo {

/// Per-user scheduling state for one solve: whether the buffer is nonempty,
/// the minimum-rate floor and the buffer-imposed rate cap. Rates are in the
/// solver's unit (bits/s/Hz summed over sub-channels per TTI).
struct UserLoad {
  bool active = false;
  double min_rate = 0.0;
  double rate_cap = std::numeric_limits<double>::infinity();
};

/// One weighted sum-rate problem at a fixed TTI.
struct ProblemInstance {
  const ChannelGrid* channel = nullptr;  // CSI the solver designs against
  double sigma2 = 1.0;
  std::vector<double> beta;          // per user, > 0
  std::vector<UserLoad> loads;       // per user
  std::vector<double> power_budget;  // per BS, linear
  std::vector<double> warm_gamma;    // optional warm-started duals, per user
  std::vector<double> warm_phi;

  int users_per_bs() const { return channel->num_users / channel->num_bs; }
  void validate() const;
};

struct DualState {
  std::vector<double> psi;    // (u,n) flattened
  std::vector<CMat> theta;    // (u,n) flattened, S x S
  std::vector<double> gamma;  // per user
  std::vector<double> phi;    // per user
  std::vector<double> nu;     // per BS
};

struct IterateSnapshot {
  int outer = 0;
  int inner = 0;
  double objective = 0;          // weighted sum of surrogate rates
  double weighted_sum_rate = 0;  // weighted sum of achievable rates, current tx
  double constraint_violation = 0;
  std::vector<double> bs_power;
  std::vector<double> rhat;  // (u,n) flattened
  double bound_margin = 0;   // min over active (u,n) of (-log2det(E) - rhat)
};

/// Fixed-point residuals evaluated once after the loop exits.
struct KktReport {
  double stationarity_residual = 0;  // max entry of (Q + nu I) M - rhs
  double power_slackness = 0;        // max_b nu_b * (P_b - power_b)
  double surrogate_tightness = 0;    // max |rhat - bound| at a fresh measurement
  double chain_margin = 0;           // min (achievable rate - rhat), fresh MMSE receivers
};

struct SolveResult {
  BeamformerSet bf;
  std::vector<IterateSnapshot> trace;
  DualState duals;
  KktReport kkt;
  int outer_iterations = 0;
  int inner_iterations = 0;
  bool converged = false;
};

// --------------------------------------------------------------------------
// Closed-form update kernels.
// --------------------------------------------------------------------------

/// Projected multiplier of the surrogate-rate constraint.
inline double update_psi(double beta, double gamma, double phi) {
  const double v = beta + gamma - phi;
  return v > 0.0 ? v : 0.0;
}

/// Moves theta one step along the segment toward psi * e_ref^{-1} / ln 2;
/// the result is re-Hermitized. step must be in (0, 1].
CMat update_theta(const CMat& theta, double psi, const CMat& e_ref, double step);

/// Subgradient steps on the rate-demand and queue multipliers, projected
/// onto the nonnegative orthant.
std::pair<double, double> update_gamma_phi(double gamma, double phi, double rhat_sum, double r_min,
                                           double queue_cap, double step);

/// Per-BS transmit solve: for each right-hand side G_u theta_u on
/// sub-channel n, M = (Q_n + nu I)^{-1} G_u theta_u with a single nu >= 0
/// shared across the BS's users and sub-channels. nu = 0 when the resulting
/// power fits the budget (minimum-norm solution when Q is singular);
/// otherwise nu is found by bisection so the power meets the budget within
/// power_tol from below.
struct TxSolveRequest {
  std::vector<CMat> q;            // per sub-channel, N_T x N_T Hermitian PSD
  std::vector<CMat> rhs;          // per served (user, sub-channel)
  std::vector<int> rhs_subchannel;
  double power_budget = 0;
  double power_tol = 1e-9;
};

struct TxSolveResult {
  std::vector<CMat> m;  // aligned with rhs
  double nu = 0;
  double power = 0;
  std::vector<std::pair<double, double>> bisection_trace;  // (nu, power) probes
};

TxSolveResult solve_tx_beamformers(const TxSolveRequest& req);

// --------------------------------------------------------------------------
// Node-local algorithm state. The centralized solver and the decentralized
// message-passing harness both drive these objects through the same loop,
// so the two paths execute identical arithmetic; only the signaling layer
// differs.
// --------------------------------------------------------------------------

struct UeAlgoState {
  int user = 0;
  int num_users = 0;
  int subchannels = 0;
  double sigma2 = 1;
  double beta = 1;
  UserLoad load;
  double gamma = 0;
  double phi = 0;
  std::vector<std::vector<CMat>> eff;  // [n][i]: effective channel from user i's tx
  std::vector<CMat> rx;                // per n
  std::vector<CMat> e_ref;             // SCA expansion point, per n
  std::vector<CMat> e_meas;            // last measured error covariance, per n
  std::vector<CMat> theta;             // per n
  std::vector<double> rhat;            // per n
  std::vector<double> psi;             // per n
  std::vector<double> neg_log_det;     // -log2 det of e_meas, per n
  bool e_ref_valid = false;

  void init(int user, int num_users, int subchannels, int rx_antennas, int streams, double sigma2,
            double beta, const UserLoad& load, double gamma0, double phi0);
  void update_receivers();
  void inner_update(double step);
  void commit_sca_point();
  double rhat_sum() const;
  double achievable_rate_sum(double* per_subchannel = nullptr) const;
};

struct BsAlgoState {
  int bs = 0;
  int num_users = 0;
  int users_per_bs = 0;
  int subchannels = 0;
  int tx_antennas = 0;
  int streams = 0;
  double power_budget = 0;
  double power_tol = 1e-9;
  std::vector<CMat> ul_eff;       // (i,n) flattened: H^H W toward this BS
  std::vector<CMat> theta;        // (i,n) flattened
  std::vector<std::uint8_t> active;  // per user, global
  double nu = 0;
  double power = 0;
  std::vector<std::pair<double, double>> bisection_trace;

  void init(int bs, int num_users, int users_per_bs, int subchannels, int tx_antennas, int streams,
            double power_budget, double power_tol);
  CMat& ul(int user, int n) { return ul_eff[static_cast<std::size_t>(user * subchannels + n)]; }
  CMat& th(int user, int n) { return theta[static_cast<std::size_t>(user * subchannels + n)]; }
  /// Solves this BS's transmit matrices; output indexed (own user j, n).
  std::vector<CMat> solve_tx();
};

/// How node states exchange data between phases of one iteration. The
/// centralized path reads global state directly; the decentralized path
/// moves the same numbers through explicit messages.
class SignalingLayer {
 public:
  virtual ~SignalingLayer() = default;
  /// Refreshes every UE's effective channels from the current tx set.
  virtual void broadcast_dl_pilots() = 0;
  /// Delivers theta from UEs to all BSs and refreshes BS-side uplink
  /// effective channels from the current receive matrices.
  virtual void feedback_and_share() = 0;
  virtual void end_inner_iteration() {}
};

/// Shared primal-dual loop. Performs receive-beamformer updates in the
/// outer loop and surrogate/dual/transmit updates in the inner loop until
/// convergence or the iteration caps.
SolveResult run_primal_dual(std::vector<UeAlgoState>& ues, std::vector<BsAlgoState>& bss,
                            BeamformerSet& bf, SignalingLayer& sig, const ProblemInstance& inst,
                            const SolverConfig& cfg);

/// Builds node states and the matched-filter initial transmit set.
void build_algo_states(const ProblemInstance& inst, const SolverConfig& cfg,
                       std::vector<UeAlgoState>& ues, std::vector<BsAlgoState>& bss,
                       BeamformerSet& bf);

/// Centralized solve with global CSI.
SolveResult run_centralized(const ProblemInstance& inst, const SolverConfig& cfg);

/// Full-buffer weighted sum-rate baseline: every user active, no rate
/// floors, no queue caps. The rate-demand and queue multipliers stay at
/// zero, so the engine degenerates to weighted MMSE reweighting.
SolveResult run_wmmse_baseline(const ProblemInstance& inst, const SolverConfig& cfg);

}  // namespace mcmimo
