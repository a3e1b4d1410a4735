#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sharp/verifier.hpp"

namespace sharp::rlcore {

/// Per-group rewards and their normalized advantages. When all rewards are
/// equal the group is degenerate and every advantage is zero; otherwise the
/// advantages have mean 0 and population standard deviation 1.
struct RewardGroup {
  std::vector<double> rewards;
  std::vector<double> advantages;
  bool degenerate = false;

  std::size_t size() const { return rewards.size(); }
};

/// Binary accuracy reward: 1 iff the candidate verifies against the
/// reference under the verifier's equality rules.
int accuracy_reward(const verifier::CanonicalAnswer& candidate,
                    const verifier::CanonicalAnswer& reference,
                    verifier::Tolerances tol = {});

/// Group normalization: (r_i - mean) / std with the population standard
/// deviation. Groups whose std is <= std_floor get all-zero advantages and
/// the degenerate flag instead of a floored divisor.
RewardGroup group_advantages(const std::vector<double>& rewards, double std_floor = 0.0);

struct KlEstimate {
  double value = 0.0;
  bool capped = false;
};

/// Per-token KL estimator r - log r - 1 with r = pi_ref / pi_theta, computed
/// from log-probabilities. Nonnegative, zero iff the policies agree. Log
/// ratios above `log_ratio_cap` are clamped (flagged) to avoid exp overflow.
KlEstimate kl_estimate(double logp_new, double logp_ref, double log_ratio_cap = 30.0);

struct TokenLogProbs {
  double logp_new = 0.0;  // current policy
  double logp_old = 0.0;  // behavior policy
  double logp_ref = 0.0;  // reference policy
};

using OutputLogProbs = std::vector<TokenLogProbs>;

struct TrajectoryGroup {
  std::vector<OutputLogProbs> outputs;  // G outputs for one prompt
};

struct GrpoParams {
  double clip_epsilon = 0.2;
  double kl_coefficient = 0.001;
  int group_size = 64;
  double gamma = 1.0;   // carried for config completeness; inert with
  double lambda = 1.0;  // sequence-level rewards and per-output advantages

  void validate() const;  // throws ConfigError
};

/// min(ratio * A, clip(ratio, 1-eps, 1+eps) * A).
double clipped_surrogate(double ratio, double advantage, double epsilon);

struct ObjectiveBreakdown {
  double objective = 0.0;
  std::vector<double> per_group;
  double kl_mean = 0.0;
  double kl_max = 0.0;
  std::size_t kl_capped_tokens = 0;
  std::size_t token_count = 0;
};

/// The clipped-surrogate objective with per-token KL penalty:
/// mean over groups of (1/G) sum_i (1/|o_i|) sum_t
///   [ min(rho_t A_i, clip(rho_t, 1-eps, 1+eps) A_i) - beta * kl_t ]
/// where rho_t = exp(logp_new - logp_old) and A_i is the group-normalized
/// advantage of output i, constant across its tokens.
/// Throws ShapeMismatch on misaligned inputs and NonFiniteInput on invalid
/// log-probabilities.
ObjectiveBreakdown grpo_objective_detailed(const std::vector<TrajectoryGroup>& trajectories,
                                           const std::vector<RewardGroup>& groups,
                                           const GrpoParams& params);
double grpo_objective(const std::vector<TrajectoryGroup>& trajectories,
                      const std::vector<RewardGroup>& groups, const GrpoParams& params);

}  // namespace sharp::rlcore
