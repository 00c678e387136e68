#include "mono3d/scoring.hpp"

#include <algorithm>
#include <cmath>

#include "mono3d/errors.hpp"

namespace mono3d {

namespace {
constexpr double kProbEps = 1e-12;

double clamp_prob(double p) {
  return std::clamp(p, kProbEps, 1.0 - kProbEps);
}
}  // namespace

double gaussian_centerness(double delta_x, double delta_y, double alpha) {
  return std::exp(-alpha * (delta_x * delta_x + delta_y * delta_y));
}

double fcos_centerness(double l, double r, double t, double b) {
  const double max_lr = std::max(l, r);
  const double max_tb = std::max(t, b);
  if (max_lr == 0.0 || max_tb == 0.0) {
    throw DegenerateBoxError("side distance pair is entirely zero");
  }
  return std::sqrt(std::min(l, r) / max_lr * (std::min(t, b) / max_tb));
}

double focal_loss(double p, bool is_positive, double alpha, double gamma) {
  if (is_positive) {
    const double q = clamp_prob(p);
    return -alpha * std::pow(1.0 - q, gamma) * std::log(q);
  }
  const double q = clamp_prob(1.0 - p);
  return -(1.0 - alpha) * std::pow(1.0 - q, gamma) * std::log(q);
}

double smooth_l1(double delta, double beta) {
  const double a = std::abs(delta);
  return a < beta ? 0.5 * delta * delta / beta : a - 0.5 * beta;
}

double softmax_cross_entropy(std::span<const double> logits, int label) {
  double max_logit = logits[0];
  for (double v : logits) max_logit = std::max(max_logit, v);
  double sum = 0.0;
  for (double v : logits) sum += std::exp(v - max_logit);
  return std::log(sum) - (logits[label] - max_logit);
}

double binary_cross_entropy(double p, double target) {
  const double q = clamp_prob(p);
  return -(target * std::log(q) + (1.0 - target) * std::log(1.0 - q));
}

double location_loss(const RegressionTarget& pred,
                     const RegressionTarget& target, const LossWeights& w) {
  double loss = 0.0;
  loss += w.w_offset * smooth_l1(pred.delta_x - target.delta_x);
  loss += w.w_offset * smooth_l1(pred.delta_y - target.delta_y);

  // Depth regresses in log space but its loss lives in meters.
  loss += w.w_depth *
          smooth_l1(std::exp(pred.depth_log) - std::exp(target.depth_log));

  for (int i = 0; i < 3; ++i) {
    loss += w.w_size * smooth_l1(pred.size_log[i] - target.size_log[i]);
  }

  const double dt = std::abs(pred.theta_bin - target.theta_bin);
  loss += w.w_theta * smooth_l1(std::min(dt, kPi - dt));

  loss += w.w_velocity * smooth_l1(pred.velocity.x() - target.velocity.x());
  loss += w.w_velocity * smooth_l1(pred.velocity.y() - target.velocity.y());
  return loss;
}

double total_loss(const LossComponents& c, int n_pos, const LossWeights& w) {
  const double n = static_cast<double>(std::max(n_pos, 1));
  return (w.beta_cls * c.cls + w.beta_attr * c.attr + w.beta_loc * c.loc +
          w.beta_dir * c.dir + w.beta_ct * c.ct) /
         n;
}

double fuse_confidence(double class_score, double centerness) {
  return class_score * centerness;
}

}  // namespace mono3d
