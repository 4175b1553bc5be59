#include "vopred/behavior.hpp"

#include <cmath>
#include <iostream>

namespace vopred {

std::string intentionName(Intention intention) {
  return intention == Intention::KeepVelocity ? "keep_velocity" : "keep_acceleration";
}

std::optional<Intention> parseIntention(const std::string& name) {
  if (name == "keep_velocity") return Intention::KeepVelocity;
  if (name == "keep_acceleration") return Intention::KeepAcceleration;
  return std::nullopt;
}

BehaviorPosterior::BehaviorPosterior(std::vector<BehaviorConstraints> candidates)
    : candidates_(std::move(candidates)) {
  if (candidates_.empty()) throw std::invalid_argument("posterior needs at least one candidate");
  for (const BehaviorConstraints& b : candidates_) {
    if (b.r_rear > b.r_front) throw std::invalid_argument("candidate has r_rear > r_front");
    if (b.c2 < 0.0 || b.c2 > 1.0) throw std::invalid_argument("candidate has c2 outside [0,1]");
  }
  log_weights_ = Eigen::VectorXd::Constant(static_cast<long>(candidates_.size()),
                                           -std::log(static_cast<double>(candidates_.size())));
}

Eigen::VectorXd BehaviorPosterior::weights() const { return log_weights_.array().exp(); }

void BehaviorPosterior::update(const Eigen::VectorXd& log_likelihoods) {
  if (log_likelihoods.size() != log_weights_.size()) {
    throw std::invalid_argument("likelihoods misaligned with candidates");
  }
  Eigen::VectorXd next = log_weights_ + log_likelihoods;
  const double peak = next.maxCoeff();
  if (!std::isfinite(peak)) {
    std::cerr << "vopred: behavior likelihoods underflowed; resetting posterior to uniform\n";
    log_weights_.setConstant(-std::log(static_cast<double>(candidates_.size())));
    return;
  }
  const double log_norm = peak + std::log((next.array() - peak).exp().sum());
  log_weights_ = next.array() - log_norm;
}

int BehaviorPosterior::mapIndex() const {
  int best = 0;
  for (int i = 1; i < log_weights_.size(); ++i) {
    if (log_weights_[i] > log_weights_[best]) best = i;
  }
  return best;
}

const BehaviorConstraints& BehaviorPosterior::map() const {
  return candidates_[static_cast<size_t>(mapIndex())];
}

void AgentHistory::push(long frame, const Vec2& position) {
  if (!frames_.empty() && frame <= frames_.back()) {
    throw std::invalid_argument("history frames must be strictly increasing");
  }
  if (!isFinite(position)) throw std::invalid_argument("history position is not finite");
  frames_.push_back(frame);
  positions_.push_back(position);
}

bool AgentHistory::hasGaps() const {
  for (size_t i = 1; i < frames_.size(); ++i) {
    if (frames_[i] != frames_[i - 1] + 1) return true;
  }
  return false;
}

Vec2 AgentHistory::velocity() const {
  if (size() < 2) return Vec2(0.0, 0.0);
  const size_t n = frames_.size();
  const double dt = static_cast<double>(frames_[n - 1] - frames_[n - 2]) * frame_period_;
  return (positions_[n - 1] - positions_[n - 2]) / dt;
}

Vec2 AgentHistory::acceleration() const {
  if (size() < 3) return Vec2(0.0, 0.0);
  const size_t n = frames_.size();
  const double dt1 = static_cast<double>(frames_[n - 1] - frames_[n - 2]) * frame_period_;
  const double dt0 = static_cast<double>(frames_[n - 2] - frames_[n - 3]) * frame_period_;
  const Vec2 v1 = (positions_[n - 1] - positions_[n - 2]) / dt1;
  const Vec2 v0 = (positions_[n - 2] - positions_[n - 3]) / dt0;
  return (v1 - v0) / (0.5 * (dt0 + dt1));
}

double AgentHistory::heading(double fallback) const {
  for (size_t i = frames_.size(); i-- > 1;) {
    const Vec2 step = positions_[i] - positions_[i - 1];
    if (step.norm() > 1e-9) return std::atan2(step.y(), step.x());
  }
  return fallback;
}

Vec2 intentionReference(const AgentHistory& history, Intention intention, double horizon) {
  Vec2 reference = history.currentPosition() + horizon * history.velocity();
  if (intention == Intention::KeepAcceleration && history.size() >= 3) {
    reference += 0.5 * horizon * horizon * history.acceleration();
  }
  return reference;
}

Vec2 preferredVelocity(const AgentHistory& history, Intention intention, double horizon) {
  if (history.size() < 2) return Vec2(0.0, 0.0);
  const double speed = history.velocity().norm();
  if (speed < 1e-12) return Vec2(0.0, 0.0);

  const Vec2 offset = intentionReference(history, intention, horizon) - history.currentPosition();
  const double len = offset.norm();
  if (len < 1e-12) return Vec2(0.0, 0.0);
  return speed / len * offset;
}

bool inAttention(const Vec2& self_position, double heading, const Vec2& point, double r_front,
                 double r_rear) {
  const Vec2 offset = point - self_position;
  const Vec2 dir(std::cos(heading), std::sin(heading));
  const double radius = dir.dot(offset) >= 0.0 ? r_front : r_rear;
  return offset.norm() <= radius;
}

double responsibility(double distance, double c1, double c2) {
  return std::clamp(c1 * distance + c2, 0.0, 1.0);
}

std::pair<double, double> normalizePair(double alpha_a, double alpha_b) {
  const double sum = alpha_a + alpha_b;
  if (sum <= 0.0) return {0.5, 0.5};
  return {alpha_a / sum, alpha_b / sum};
}

double likelihood(const Vec2& observed, const Vec2& predicted, double sigma) {
  return std::exp(logLikelihood(observed, predicted, sigma));
}

double logLikelihood(const Vec2& observed, const Vec2& predicted, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("likelihood needs sigma > 0");
  const double e = (observed - predicted).norm();
  return -0.5 * e * e / (sigma * sigma) - std::log(sigma * std::sqrt(2.0 * M_PI));
}

void bayesUpdate(BehaviorPosterior& posterior, const std::vector<Vec2>& predictions,
                 const Vec2& observed, double sigma) {
  if (predictions.size() != posterior.candidates().size()) {
    throw std::invalid_argument("predictions misaligned with candidates");
  }
  Eigen::VectorXd ll(static_cast<long>(predictions.size()));
  for (size_t i = 0; i < predictions.size(); ++i) {
    ll[static_cast<long>(i)] = logLikelihood(observed, predictions[i], sigma);
  }
  posterior.update(ll);
}

}  // namespace vopred
