#include "sharp/rlcore.hpp"

#include <algorithm>
#include <cmath>

#include "sharp/errors.hpp"

namespace sharp::rlcore {

int accuracy_reward(const verifier::CanonicalAnswer& candidate,
                    const verifier::CanonicalAnswer& reference,
                    verifier::Tolerances tol) {
  return verifier::answers_equal(candidate, reference, tol) ? 1 : 0;
}

RewardGroup group_advantages(const std::vector<double>& rewards, double std_floor) {
  if (rewards.empty()) throw ShapeMismatch("reward group is empty");
  if (std_floor < 0) throw ConfigError("std_floor must be >= 0");
  for (double r : rewards) {
    if (!std::isfinite(r)) throw NonFiniteInput("reward is not finite");
  }

  RewardGroup group;
  group.rewards = rewards;
  const auto n = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= n;
  double variance = 0.0;
  for (double r : rewards) variance += (r - mean) * (r - mean);
  variance /= n;  // population variance, no Bessel correction
  const double stddev = std::sqrt(variance);

  if (stddev <= std_floor) {
    group.advantages.assign(rewards.size(), 0.0);
    group.degenerate = true;
    return group;
  }
  group.advantages.reserve(rewards.size());
  for (double r : rewards) group.advantages.push_back((r - mean) / stddev);
  return group;
}

KlEstimate kl_estimate(double logp_new, double logp_ref, double log_ratio_cap) {
  if (!std::isfinite(logp_new) || !std::isfinite(logp_ref)) {
    throw NonFiniteInput("log-probabilities must be finite");
  }
  if (logp_new > 0 || logp_ref > 0) {
    throw NonFiniteInput("log-probabilities must be <= 0");
  }
  double log_ratio = logp_ref - logp_new;  // log(pi_ref / pi_theta)
  KlEstimate out;
  if (log_ratio > log_ratio_cap) {
    log_ratio = log_ratio_cap;
    out.capped = true;
  }
  out.value = std::exp(log_ratio) - log_ratio - 1.0;
  return out;
}

void GrpoParams::validate() const {
  if (!(clip_epsilon > 0)) throw ConfigError("clip_epsilon must be > 0");
  if (kl_coefficient < 0) throw ConfigError("kl_coefficient must be >= 0");
  if (group_size < 2) throw ConfigError("group_size must be >= 2 for meaningful normalization");
}

double clipped_surrogate(double ratio, double advantage, double epsilon) {
  const double clipped = std::clamp(ratio, 1.0 - epsilon, 1.0 + epsilon);
  return std::min(ratio * advantage, clipped * advantage);
}

ObjectiveBreakdown grpo_objective_detailed(const std::vector<TrajectoryGroup>& trajectories,
                                           const std::vector<RewardGroup>& groups,
                                           const GrpoParams& params) {
  if (!(params.clip_epsilon > 0)) throw ConfigError("clip_epsilon must be > 0");
  if (params.kl_coefficient < 0) throw ConfigError("kl_coefficient must be >= 0");
  if (trajectories.size() != groups.size()) {
    throw ShapeMismatch("trajectory groups (" + std::to_string(trajectories.size()) +
                        ") and reward groups (" + std::to_string(groups.size()) +
                        ") differ");
  }
  if (trajectories.empty()) throw ShapeMismatch("no groups");

  ObjectiveBreakdown out;
  out.per_group.reserve(trajectories.size());
  double kl_sum = 0.0;

  for (std::size_t g = 0; g < trajectories.size(); ++g) {
    const TrajectoryGroup& traj = trajectories[g];
    const RewardGroup& rewards = groups[g];
    if (traj.outputs.size() != rewards.advantages.size() || traj.outputs.empty()) {
      throw ShapeMismatch("group " + std::to_string(g) + ": " +
                          std::to_string(traj.outputs.size()) + " outputs vs " +
                          std::to_string(rewards.advantages.size()) + " advantages");
    }
    double group_sum = 0.0;
    for (std::size_t i = 0; i < traj.outputs.size(); ++i) {
      const OutputLogProbs& output = traj.outputs[i];
      if (output.empty()) {
        throw ShapeMismatch("group " + std::to_string(g) + " output " +
                            std::to_string(i) + " has no tokens");
      }
      const double advantage = rewards.advantages[i];
      double token_sum = 0.0;
      for (const TokenLogProbs& token : output) {
        if (!std::isfinite(token.logp_old)) {
          throw NonFiniteInput("log-probabilities must be finite");
        }
        const double ratio = std::exp(token.logp_new - token.logp_old);
        const KlEstimate kl = kl_estimate(token.logp_new, token.logp_ref);
        token_sum += clipped_surrogate(ratio, advantage, params.clip_epsilon) -
                     params.kl_coefficient * kl.value;
        kl_sum += kl.value;
        out.kl_max = std::max(out.kl_max, kl.value);
        if (kl.capped) ++out.kl_capped_tokens;
        ++out.token_count;
      }
      group_sum += token_sum / static_cast<double>(output.size());
    }
    out.per_group.push_back(group_sum / static_cast<double>(traj.outputs.size()));
  }

  double total = 0.0;
  for (double v : out.per_group) total += v;
  out.objective = total / static_cast<double>(out.per_group.size());
  out.kl_mean = out.token_count > 0 ? kl_sum / static_cast<double>(out.token_count) : 0.0;
  return out;
}

double grpo_objective(const std::vector<TrajectoryGroup>& trajectories,
                      const std::vector<RewardGroup>& groups, const GrpoParams& params) {
  return grpo_objective_detailed(trajectories, groups, params).objective;
}

}  // namespace sharp::rlcore
