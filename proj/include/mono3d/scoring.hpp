#ifndef MONO3D_SCORING_HPP_
#define MONO3D_SCORING_HPP_

#include <span>

#include "mono3d/target_codec.hpp"

namespace mono3d {

// Loss weighting profile. The location head weights depth at 0.2 by
// default; `finetune()` switches it to 1.0.
struct LossWeights {
  double beta_cls = 1.0;
  double beta_attr = 1.0;
  double beta_loc = 1.0;
  double beta_dir = 1.0;
  double beta_ct = 1.0;

  double w_offset = 1.0;
  double w_depth = 0.2;
  double w_size = 1.0;
  double w_theta = 1.0;
  double w_velocity = 0.05;

  double focal_alpha = 0.25;
  double focal_gamma = 2.0;
  double gaussian_alpha = 2.5;

  static LossWeights finetune() {
    LossWeights w;
    w.w_depth = 1.0;
    return w;
  }
};

// Center-ness from the offset to the projected center, c = exp(-alpha *
// (dx^2 + dy^2)). Deltas are expected in stride units so the positive disc
// spans the same value range on every level.
double gaussian_centerness(double delta_x, double delta_y, double alpha = 2.5);

// Center-ness from 2D side distances, kept for comparison runs. Throws
// DegenerateBoxError when a side pair is entirely zero.
double fcos_centerness(double l, double r, double t, double b);

// Focal classification loss on one probability. Probabilities are clamped
// to [1e-12, 1 - 1e-12] before the log.
double focal_loss(double p, bool is_positive, double alpha = 0.25,
                  double gamma = 2.0);

double smooth_l1(double delta, double beta = 1.0);

// Softmax cross entropy of `logits` against an integer label.
double softmax_cross_entropy(std::span<const double> logits, int label);

// Binary cross entropy between a predicted probability and a soft target.
double binary_cross_entropy(double p, double target);

// Weighted smooth-L1 sum over the regression channels. All channels are
// compared in their encoded space except depth, which is compared in
// meters; the theta channel uses the period-pi residual.
double location_loss(const RegressionTarget& pred,
                     const RegressionTarget& target, const LossWeights& w);

struct LossComponents {
  double cls = 0.0;
  double attr = 0.0;
  double loc = 0.0;
  double dir = 0.0;
  double ct = 0.0;
};

// Total loss: weighted component sum divided by the positive count
// (clamped to 1 so empty images stay finite).
double total_loss(const LossComponents& components, int n_pos,
                  const LossWeights& w = {});

// Detection confidence: class score * center-ness.
double fuse_confidence(double class_score, double centerness);

}  // namespace mono3d

#endif  // MONO3D_SCORING_HPP_
