#pragma once

#include "vopred/geometry.hpp"
#include "vopred/kinematics.hpp"

#include <vector>

namespace vopred {

enum class Intention { KeepVelocity, KeepAcceleration };

std::string intentionName(Intention intention);
std::optional<Intention> parseIntention(const std::string& name);

// One hypothesis for an agent's hidden behavior: its motion intention, the
// front/rear attention radii, and the linear responsibility law
// alpha(d) = clamp(c1*d + c2, 0, 1).
struct BehaviorConstraints {
  Intention intention = Intention::KeepVelocity;
  double r_front = 4.0;  // m
  double r_rear = 2.0;   // m, <= r_front
  double c1 = 0.0;       // 1/m
  double c2 = 0.5;       // initial responsibility in [0,1]

  bool operator==(const BehaviorConstraints&) const = default;
};

// Discrete posterior over a fixed candidate set; only the weights evolve.
class BehaviorPosterior {
 public:
  explicit BehaviorPosterior(std::vector<BehaviorConstraints> candidates);

  const std::vector<BehaviorConstraints>& candidates() const { return candidates_; }
  // Normalized weights (sum to 1).
  Eigen::VectorXd weights() const;
  const Eigen::VectorXd& logWeights() const { return log_weights_; }

  // Bayes step: add the log-likelihoods and renormalize in log space. If
  // every term underflows the posterior resets to uniform.
  void update(const Eigen::VectorXd& log_likelihoods);

  // Maximum-weight candidate; ties break to the lowest index.
  const BehaviorConstraints& map() const;
  int mapIndex() const;

 private:
  std::vector<BehaviorConstraints> candidates_;
  Eigen::VectorXd log_weights_;
};

// Frame-indexed position history; velocity, acceleration and heading are
// finite differences over the most recent samples.
class AgentHistory {
 public:
  AgentHistory() = default;
  explicit AgentHistory(double frame_period) : frame_period_(frame_period) {}

  void push(long frame, const Vec2& position);
  int size() const { return static_cast<int>(frames_.size()); }
  double framePeriod() const { return frame_period_; }
  long frame(int i) const { return frames_[static_cast<size_t>(i)]; }
  const Vec2& position(int i) const { return positions_[static_cast<size_t>(i)]; }
  const Vec2& currentPosition() const { return positions_.back(); }
  // True when consecutive samples skip frame indices.
  bool hasGaps() const;

  Vec2 velocity() const;      // latest backward difference; zero with < 2 samples
  Vec2 acceleration() const;  // second difference; zero with < 3 samples
  // Direction of the latest nonzero velocity; falls back to `fallback`.
  double heading(double fallback = 0.0) const;

 private:
  std::vector<long> frames_;
  std::vector<Vec2> positions_;
  double frame_period_ = 0.4;
};

// Reference position the current motion reaches after `horizon` seconds
// (constant velocity, or constant acceleration when the history supports it).
Vec2 intentionReference(const AgentHistory& history, Intention intention, double horizon);

// Preferred velocity from the intention: aim at the reference position at the
// current speed. KeepAcceleration falls back to KeepVelocity with fewer than
// 3 samples.
Vec2 preferredVelocity(const AgentHistory& history, Intention intention, double horizon);

// Half-circle attention test: `point` (the other footprint's closest point to
// the reference position) is attended when within r_front in the heading
// half-plane or within r_rear behind; the exact side boundary counts as
// frontal.
bool inAttention(const Vec2& self_position, double heading, const Vec2& point, double r_front,
                 double r_rear);

// Linear responsibility in distance, clamped to [0,1].
double responsibility(double distance, double c1, double c2);

// Scale a responsibility pair to sum to one; (0.5, 0.5) when both vanish.
std::pair<double, double> normalizePair(double alpha_a, double alpha_b);

// Normal density (and its log) of the prediction error norm, Eq-style
// f(|observed - predicted|; 0, sigma^2).
double likelihood(const Vec2& observed, const Vec2& predicted, double sigma);
double logLikelihood(const Vec2& observed, const Vec2& predicted, double sigma);

// One filtering step over the full candidate set.
void bayesUpdate(BehaviorPosterior& posterior, const std::vector<Vec2>& predictions,
                 const Vec2& observed, double sigma);

}  // namespace vopred
