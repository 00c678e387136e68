#ifndef MONO3D_METRICS_HPP_
#define MONO3D_METRICS_HPP_

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mono3d/dataset.hpp"
#include "mono3d/geometry.hpp"

namespace mono3d {

// Evaluation configuration. Matching is by ground-plane center distance;
// the precision/recall curve is sampled on a uniform recall grid and both
// AP and the true-positive error means only count recall levels above
// `min_recall`. Classes listed in the omission sets skip the corresponding
// error metric; `yaw_period_overrides` shrinks the orientation period for
// classes whose heading is symmetric (default pi for "barrier").
struct MatchConfig {
  std::vector<double> ap_thresholds{0.5, 1.0, 2.0, 4.0};  // meters
  double tp_threshold = 2.0;                              // meters
  double min_recall = 0.1;
  double min_precision = 0.1;
  int recall_samples = 101;
  std::set<std::string> omit_velocity_classes{"barrier", "traffic_cone"};
  std::set<std::string> omit_attribute_classes{"barrier", "traffic_cone"};
  std::map<std::string, double> yaw_period_overrides{{"barrier", kPi}};
  Frame frame = Frame::kCamera;

  double yaw_period(const std::string& class_name) const {
    auto it = yaw_period_overrides.find(class_name);
    return it == yaw_period_overrides.end() ? 2.0 * kPi : it->second;
  }
};

struct Match {
  int pred_index = 0;
  int gt_index = 0;
  double distance = 0.0;
};

struct MatchResult {
  std::vector<Match> matches;            // in descending score order
  std::vector<int> unmatched_preds;
  std::vector<int> unmatched_gts;
};

// Greedy matching in descending prediction score: each prediction takes the
// nearest not-yet-matched ground truth of its class, and the pair counts
// when the ground-plane distance is strictly below `threshold`.
MatchResult match_by_center_distance(const std::vector<Detection>& preds,
                                     const std::vector<Box3D>& gts,
                                     double threshold, Frame frame);

// Normalized area under the interpolated precision/recall curve for recall
// and precision above their minimums. No ground truths yields 0.
double average_precision(const std::vector<Detection>& preds,
                         const std::vector<Box3D>& gts, double threshold,
                         const MatchConfig& cfg);

// Arithmetic mean over a complete class x threshold AP grid.
double mean_ap(const std::vector<std::vector<double>>& per_class_aps);

struct TpErrors {
  double ate = 0.0;  // translation, meters
  double ase = 0.0;  // 1 - aligned IoU
  double aoe = 0.0;  // yaw residual, radians
  double ave = 0.0;  // velocity, m/s
  double aae = 0.0;  // 1 - attribute accuracy
};

// True-positive error means for one class at the TP threshold: cumulative
// means of the per-match errors in score order, sampled at the recall grid
// levels above min_recall that were actually reached. A class with no true
// positives (or none above min_recall) reports the bounded worst case 1.0
// in every field. `class_name` selects the orientation period.
TpErrors tp_errors(const std::vector<Detection>& preds,
                   const std::vector<Box3D>& gts, const MatchConfig& cfg,
                   const std::string& class_name);

// Composite detection score in [0, 1]; TP means are clipped at 1.
double nds(double map_value, double m_ate, double m_ase, double m_aoe,
           double m_ave, double m_aae);

struct ClassMetrics {
  std::string class_name;
  int class_id = 0;
  int num_gts = 0;
  std::vector<double> ap;  // parallel to cfg.ap_thresholds
  std::optional<double> ate, ase, aoe, ave, aae;  // nullopt when omitted
};

struct EvalReport {
  std::vector<ClassMetrics> per_class;
  double map_value = 0.0;
  std::optional<double> m_ate, m_ase, m_aoe, m_ave, m_aae;
  double nds_value = 0.0;
  int num_scenes = 0;
};

// Mean the per-class metrics into the summary block. Classes without
// ground truths are excluded from every mean; omitted metrics are excluded
// from their mean; a TP mean undefined for every class enters the score
// at the bounded worst case.
EvalReport aggregate_report(const std::vector<ClassMetrics>& per_class,
                            const MatchConfig& cfg);

// Full evaluation of a dataset's detections against its annotations.
// Predictions only match ground truths of the same scene. OpenMP-parallel
// over (class, threshold) tasks; the serial variant is the reference.
EvalReport evaluate(const Dataset& ds, const MatchConfig& cfg);
EvalReport evaluate_serial(const Dataset& ds, const MatchConfig& cfg);

// Stable JSON rendering of a report (schema documented in docs/).
std::string report_to_json(const EvalReport& report, const MatchConfig& cfg);

// Fixed-width table for terminals.
std::string report_to_table(const EvalReport& report, const MatchConfig& cfg);

}  // namespace mono3d

#endif  // MONO3D_METRICS_HPP_
