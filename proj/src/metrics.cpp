#include "mono3d/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "mono3d/errors.hpp"

namespace mono3d {

namespace {

constexpr double kSampleEps = 1e-9;

// Per-match error terms. `attr` is NaN when the ground truth carries no
// attribute; NaN entries are skipped by the cumulative means.
struct MatchErrors {
  double trans = 0.0;
  double scale = 0.0;
  double orient = 0.0;
  double vel = 0.0;
  double attr = 0.0;
};

struct PredRef {
  const Detection* det = nullptr;
  int scene = 0;
};

struct GtRef {
  const Box3D* box = nullptr;
  int scene = 0;
};

// Value-determined prediction order: descending score, then scene and box
// fields, so evaluation does not depend on input order even with tied
// scores.
bool pred_before(const PredRef& a, const PredRef& b, Frame frame) {
  if (a.det->score != b.det->score) return a.det->score > b.det->score;
  if (a.scene != b.scene) return a.scene < b.scene;
  const Box3D& ba = a.det->box;
  const Box3D& bb = b.det->box;
  for (int i = 0; i < 3; ++i) {
    if (ba.center[i] != bb.center[i]) return ba.center[i] < bb.center[i];
    if (ba.size[i] != bb.size[i]) return ba.size[i] < bb.size[i];
  }
  if (ba.yaw != bb.yaw) return ba.yaw < bb.yaw;
  for (int i = 0; i < 2; ++i) {
    if (ba.velocity[i] != bb.velocity[i]) return ba.velocity[i] < bb.velocity[i];
  }
  if (ba.attribute_id != bb.attribute_id) return ba.attribute_id < bb.attribute_id;
  (void)frame;
  return false;
}

std::vector<PredRef> sorted_preds(const std::vector<Detection>& preds,
                                  Frame frame) {
  std::vector<PredRef> out;
  out.reserve(preds.size());
  for (const Detection& d : preds) out.push_back({&d, 0});
  std::stable_sort(out.begin(), out.end(), [&](const auto& a, const auto& b) {
    return pred_before(a, b, frame);
  });
  return out;
}

double yaw_residual(double a, double b, double period) {
  const double raw = std::fmod(std::abs(a - b), period);
  return std::min(raw, period - raw);
}

MatchErrors compute_match_errors(const Detection& pred, const Box3D& gt,
                                 Frame frame, double yaw_period) {
  MatchErrors e;
  e.trans = ground_distance(pred.box, gt, frame);
  e.scale = 1.0 - aligned_iou_3d(pred.box, gt);
  e.orient = yaw_residual(pred.box.yaw, gt.yaw, yaw_period);
  e.vel = (pred.box.velocity - gt.velocity).norm();
  if (gt.attribute_id.has_value()) {
    e.attr = (pred.box.attribute_id.has_value() &&
              *pred.box.attribute_id == *gt.attribute_id)
                 ? 0.0
                 : 1.0;
  } else {
    e.attr = std::numeric_limits<double>::quiet_NaN();
  }
  return e;
}

struct Curve {
  int npos = 0;
  std::vector<char> tp;             // per sorted prediction
  std::vector<MatchErrors> errors;  // per true positive, in score order
  std::vector<int> match_pred;      // original indices, parallel to errors
  std::vector<int> match_gt;
  std::vector<double> match_dist;
};

// Greedy accumulation: each prediction (descending score) takes the
// nearest not-yet-matched same-class ground truth of its scene; the pair
// is a true positive when strictly below the threshold.
Curve accumulate(const std::vector<PredRef>& preds,
                 const std::vector<GtRef>& gts, double threshold, Frame frame,
                 double yaw_period,
                 const std::vector<int>* pred_original = nullptr) {
  Curve curve;
  curve.npos = static_cast<int>(gts.size());
  curve.tp.reserve(preds.size());
  std::vector<char> taken(gts.size(), 0);

  for (std::size_t pi = 0; pi < preds.size(); ++pi) {
    const Detection& det = *preds[pi].det;
    int best = -1;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t gi = 0; gi < gts.size(); ++gi) {
      if (taken[gi] || gts[gi].scene != preds[pi].scene ||
          gts[gi].box->class_id != det.box.class_id) {
        continue;
      }
      const double d = ground_distance(det.box, *gts[gi].box, frame);
      if (d < best_dist) {
        best_dist = d;
        best = static_cast<int>(gi);
      }
    }
    if (best >= 0 && best_dist < threshold) {
      taken[best] = 1;
      curve.tp.push_back(1);
      curve.errors.push_back(
          compute_match_errors(det, *gts[best].box, frame, yaw_period));
      curve.match_pred.push_back(pred_original ? (*pred_original)[pi]
                                               : static_cast<int>(pi));
      curve.match_gt.push_back(best);
      curve.match_dist.push_back(best_dist);
    } else {
      curve.tp.push_back(0);
    }
  }
  return curve;
}

// Piecewise-linear interpolation of y over the non-decreasing grid x,
// extended with y.front() on the left and 0 on the right; an exact hit on
// duplicated x takes the last sample.
double interp_curve(const std::vector<double>& x, const std::vector<double>& y,
                    double q) {
  if (x.empty()) return 0.0;
  if (q > x.back()) return 0.0;
  if (q < x.front()) return y.front();
  const auto it = std::upper_bound(x.begin(), x.end(), q);
  const std::size_t j = static_cast<std::size_t>(it - x.begin()) - 1;
  if (x[j] == q || j + 1 >= x.size()) return y[j];
  const double t = (q - x[j]) / (x[j + 1] - x[j]);
  return y[j] + t * (y[j + 1] - y[j]);
}

double ap_from_curve(const Curve& curve, const MatchConfig& cfg) {
  if (curve.npos == 0 || curve.tp.empty()) return 0.0;

  std::vector<double> rec, prec;
  rec.reserve(curve.tp.size());
  prec.reserve(curve.tp.size());
  int tp = 0;
  int fp = 0;
  for (char flag : curve.tp) {
    flag ? ++tp : ++fp;
    rec.push_back(static_cast<double>(tp) / curve.npos);
    prec.push_back(static_cast<double>(tp) / (tp + fp));
  }

  const int last = cfg.recall_samples - 1;
  const int first = static_cast<int>(std::lround(last * cfg.min_recall)) + 1;
  if (first > last) return 0.0;

  // Normalize each sample before accumulating so a flat curve at
  // precision 1 averages to exactly 1.
  double sum = 0.0;
  for (int i = first; i <= last; ++i) {
    const double r = static_cast<double>(i) / last;
    sum += std::max(0.0, interp_curve(rec, prec, r) - cfg.min_precision) /
           (1.0 - cfg.min_precision);
  }
  return sum / (last - first + 1);
}

// Cumulative means over the matched errors, skipping NaN entries. An
// all-NaN channel reports 1.0 at every prefix.
std::vector<double> nan_cummean(const std::vector<double>& values) {
  const bool all_nan =
      std::all_of(values.begin(), values.end(),
                  [](double v) { return std::isnan(v); });
  std::vector<double> out(values.size(), 0.0);
  if (all_nan) {
    std::fill(out.begin(), out.end(), 1.0);
    return out;
  }
  double sum = 0.0;
  int count = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isnan(values[i])) {
      sum += values[i];
      ++count;
    }
    out[i] = count > 0 ? sum / count : 0.0;
  }
  return out;
}

TpErrors tp_errors_from_curve(const Curve& curve, const MatchConfig& cfg) {
  TpErrors worst{1.0, 1.0, 1.0, 1.0, 1.0};
  const int n_tp = static_cast<int>(curve.errors.size());
  if (curve.npos == 0 || n_tp == 0) return worst;

  std::array<std::vector<double>, 5> channels;
  for (const MatchErrors& e : curve.errors) {
    channels[0].push_back(e.trans);
    channels[1].push_back(e.scale);
    channels[2].push_back(e.orient);
    channels[3].push_back(e.vel);
    channels[4].push_back(e.attr);
  }
  std::array<std::vector<double>, 5> cummeans;
  for (int c = 0; c < 5; ++c) cummeans[c] = nan_cummean(channels[c]);

  // Sample the cumulative means at the recall levels the curve reaches.
  const int last = cfg.recall_samples - 1;
  const int first = static_cast<int>(std::lround(last * cfg.min_recall)) + 1;
  std::array<double, 5> sums{};
  int samples = 0;
  for (int i = first; i <= last; ++i) {
    const double r = static_cast<double>(i) / last;
    const int k = static_cast<int>(std::ceil(r * curve.npos - kSampleEps));
    if (k > n_tp) continue;
    const int at = std::max(k, 1) - 1;
    for (int c = 0; c < 5; ++c) sums[c] += cummeans[c][at];
    ++samples;
  }
  if (samples == 0) return worst;

  TpErrors out;
  out.ate = sums[0] / samples;
  out.ase = sums[1] / samples;
  out.aoe = sums[2] / samples;
  out.ave = sums[3] / samples;
  out.aae = sums[4] / samples;
  return out;
}

std::vector<GtRef> gt_refs(const std::vector<Box3D>& gts) {
  std::vector<GtRef> out;
  out.reserve(gts.size());
  for (const Box3D& g : gts) out.push_back({&g, 0});
  return out;
}

}  // namespace

MatchResult match_by_center_distance(const std::vector<Detection>& preds,
                                     const std::vector<Box3D>& gts,
                                     double threshold, Frame frame) {
  std::vector<PredRef> order = sorted_preds(preds, frame);
  std::vector<int> original(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    original[i] = static_cast<int>(order[i].det - preds.data());
  }
  const Curve curve =
      accumulate(order, gt_refs(gts), threshold, frame, 2.0 * kPi, &original);

  MatchResult result;
  std::vector<char> pred_matched(preds.size(), 0);
  std::vector<char> gt_matched(gts.size(), 0);
  for (std::size_t m = 0; m < curve.match_pred.size(); ++m) {
    result.matches.push_back(
        {curve.match_pred[m], curve.match_gt[m], curve.match_dist[m]});
    pred_matched[curve.match_pred[m]] = 1;
    gt_matched[curve.match_gt[m]] = 1;
  }
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (!pred_matched[i]) result.unmatched_preds.push_back(static_cast<int>(i));
  }
  for (std::size_t i = 0; i < gts.size(); ++i) {
    if (!gt_matched[i]) result.unmatched_gts.push_back(static_cast<int>(i));
  }
  return result;
}

double average_precision(const std::vector<Detection>& preds,
                         const std::vector<Box3D>& gts, double threshold,
                         const MatchConfig& cfg) {
  const Curve curve = accumulate(sorted_preds(preds, cfg.frame), gt_refs(gts),
                                 threshold, cfg.frame, 2.0 * kPi);
  return ap_from_curve(curve, cfg);
}

double mean_ap(const std::vector<std::vector<double>>& per_class_aps) {
  double sum = 0.0;
  int count = 0;
  for (const auto& row : per_class_aps) {
    for (double ap : row) {
      sum += ap;
      ++count;
    }
  }
  return count > 0 ? sum / count : 0.0;
}

TpErrors tp_errors(const std::vector<Detection>& preds,
                   const std::vector<Box3D>& gts, const MatchConfig& cfg,
                   const std::string& class_name) {
  const Curve curve =
      accumulate(sorted_preds(preds, cfg.frame), gt_refs(gts),
                 cfg.tp_threshold, cfg.frame, cfg.yaw_period(class_name));
  return tp_errors_from_curve(curve, cfg);
}

double nds(double map_value, double m_ate, double m_ase, double m_aoe,
           double m_ave, double m_aae) {
  const double tp_score = (1.0 - std::min(1.0, m_ate)) +
                          (1.0 - std::min(1.0, m_ase)) +
                          (1.0 - std::min(1.0, m_aoe)) +
                          (1.0 - std::min(1.0, m_ave)) +
                          (1.0 - std::min(1.0, m_aae));
  return (5.0 * map_value + tp_score) / 10.0;
}

EvalReport aggregate_report(const std::vector<ClassMetrics>& per_class,
                            const MatchConfig& cfg) {
  (void)cfg;
  EvalReport report;
  report.per_class = per_class;

  double ap_sum = 0.0;
  int ap_count = 0;
  std::array<double, 5> tp_sum{};
  std::array<int, 5> tp_count{};
  for (const ClassMetrics& cm : per_class) {
    if (cm.num_gts == 0) continue;
    for (double ap : cm.ap) {
      ap_sum += ap;
      ++ap_count;
    }
    const std::array<const std::optional<double>*, 5> fields = {
        &cm.ate, &cm.ase, &cm.aoe, &cm.ave, &cm.aae};
    for (int i = 0; i < 5; ++i) {
      if (fields[i]->has_value()) {
        tp_sum[i] += **fields[i];
        ++tp_count[i];
      }
    }
  }
  report.map_value = ap_count > 0 ? ap_sum / ap_count : 0.0;

  std::array<std::optional<double>*, 5> means = {
      &report.m_ate, &report.m_ase, &report.m_aoe, &report.m_ave,
      &report.m_aae};
  std::array<double, 5> for_nds;
  for (int i = 0; i < 5; ++i) {
    if (tp_count[i] > 0) {
      *means[i] = tp_sum[i] / tp_count[i];
      for_nds[i] = **means[i];
    } else {
      *means[i] = std::nullopt;
      for_nds[i] = 1.0;  // undefined everywhere: bounded worst case
    }
  }
  report.nds_value = nds(report.map_value, for_nds[0], for_nds[1], for_nds[2],
                         for_nds[3], for_nds[4]);
  return report;
}

namespace {

struct ClassData {
  std::vector<PredRef> preds;  // canonical order
  std::vector<GtRef> gts;
};

std::vector<ClassData> split_by_class(const Dataset& ds,
                                      const MatchConfig& cfg) {
  std::vector<ClassData> per_class(ds.classes.size());
  for (std::size_t si = 0; si < ds.scenes.size(); ++si) {
    const Scene& scene = ds.scenes[si];
    for (const Box3D& gt : scene.annotations) {
      if (gt.class_id < 0 ||
          static_cast<std::size_t>(gt.class_id) >= per_class.size()) {
        throw Error("annotation class id outside the dataset label map");
      }
      per_class[gt.class_id].gts.push_back({&gt, static_cast<int>(si)});
    }
    for (const Detection& det : scene.detections) {
      if (det.source_camera >= 0) {
        throw Error(
            "detections are in per-camera frames; fuse them into the "
            "dataset frame before evaluating");
      }
      if (det.box.class_id < 0 ||
          static_cast<std::size_t>(det.box.class_id) >= per_class.size()) {
        throw Error("detection class id outside the dataset label map");
      }
      per_class[det.box.class_id].preds.push_back({&det, static_cast<int>(si)});
    }
  }
  for (ClassData& cd : per_class) {
    std::stable_sort(cd.preds.begin(), cd.preds.end(),
                     [&](const auto& a, const auto& b) {
                       return pred_before(a, b, cfg.frame);
                     });
  }
  return per_class;
}

ClassMetrics init_class_metrics(const Dataset& ds, std::size_t cls,
                                const MatchConfig& cfg,
                                const ClassData& data) {
  ClassMetrics cm;
  cm.class_name = ds.classes[cls];
  cm.class_id = static_cast<int>(cls);
  cm.num_gts = static_cast<int>(data.gts.size());
  cm.ap.assign(cfg.ap_thresholds.size(), 0.0);
  return cm;
}

void fill_tp_metrics(ClassMetrics& cm, const TpErrors& errors,
                     const MatchConfig& cfg) {
  cm.ate = errors.ate;
  cm.ase = errors.ase;
  cm.aoe = errors.aoe;
  cm.ave = cfg.omit_velocity_classes.count(cm.class_name)
               ? std::nullopt
               : std::optional<double>(errors.ave);
  cm.aae = cfg.omit_attribute_classes.count(cm.class_name)
               ? std::nullopt
               : std::optional<double>(errors.aae);
}

}  // namespace

EvalReport evaluate(const Dataset& ds, const MatchConfig& cfg) {
  const std::vector<ClassData> per_class = split_by_class(ds, cfg);
  std::vector<ClassMetrics> metrics(per_class.size());
  for (std::size_t c = 0; c < per_class.size(); ++c) {
    metrics[c] = init_class_metrics(ds, c, cfg, per_class[c]);
  }

  // One task per (class, threshold) AP cell plus one per class for the
  // TP errors; every task writes its own slot.
  struct Task {
    int cls;
    int threshold_index;  // -1: TP errors
  };
  std::vector<Task> tasks;
  for (std::size_t c = 0; c < per_class.size(); ++c) {
    if (per_class[c].gts.empty()) continue;
    for (std::size_t t = 0; t < cfg.ap_thresholds.size(); ++t) {
      tasks.push_back({static_cast<int>(c), static_cast<int>(t)});
    }
    tasks.push_back({static_cast<int>(c), -1});
  }

#pragma omp parallel for schedule(dynamic)
  for (std::size_t ti = 0; ti < tasks.size(); ++ti) {
    const Task& task = tasks[ti];
    const ClassData& data = per_class[task.cls];
    if (task.threshold_index >= 0) {
      const Curve curve =
          accumulate(data.preds, data.gts, cfg.ap_thresholds[task.threshold_index],
                     cfg.frame, 2.0 * kPi);
      metrics[task.cls].ap[task.threshold_index] = ap_from_curve(curve, cfg);
    } else {
      const Curve curve =
          accumulate(data.preds, data.gts, cfg.tp_threshold, cfg.frame,
                     cfg.yaw_period(metrics[task.cls].class_name));
      fill_tp_metrics(metrics[task.cls], tp_errors_from_curve(curve, cfg), cfg);
    }
  }

  EvalReport report = aggregate_report(metrics, cfg);
  report.num_scenes = static_cast<int>(ds.scenes.size());
  return report;
}

EvalReport evaluate_serial(const Dataset& ds, const MatchConfig& cfg) {
  const std::vector<ClassData> per_class = split_by_class(ds, cfg);
  std::vector<ClassMetrics> metrics(per_class.size());

  for (std::size_t c = 0; c < per_class.size(); ++c) {
    const ClassData& data = per_class[c];
    metrics[c] = init_class_metrics(ds, c, cfg, data);
    if (data.gts.empty()) continue;
    for (std::size_t t = 0; t < cfg.ap_thresholds.size(); ++t) {
      const Curve curve = accumulate(data.preds, data.gts,
                                     cfg.ap_thresholds[t], cfg.frame, 2.0 * kPi);
      metrics[c].ap[t] = ap_from_curve(curve, cfg);
    }
    const Curve curve =
        accumulate(data.preds, data.gts, cfg.tp_threshold, cfg.frame,
                   cfg.yaw_period(metrics[c].class_name));
    fill_tp_metrics(metrics[c], tp_errors_from_curve(curve, cfg), cfg);
  }

  EvalReport report = aggregate_report(metrics, cfg);
  report.num_scenes = static_cast<int>(ds.scenes.size());
  return report;
}

namespace {

std::string format_threshold(double t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", t);
  return buf;
}

nlohmann::json opt_to_json(const std::optional<double>& v) {
  return v.has_value() ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

std::string report_to_json(const EvalReport& report, const MatchConfig& cfg) {
  nlohmann::json root;
  root["version"] = "mono3d-report-v1";
  root["config"] = {{"ap_thresholds", cfg.ap_thresholds},
                    {"tp_threshold", cfg.tp_threshold},
                    {"min_recall", cfg.min_recall},
                    {"min_precision", cfg.min_precision},
                    {"recall_samples", cfg.recall_samples}};
  root["num_scenes"] = report.num_scenes;

  nlohmann::json classes;
  for (const ClassMetrics& cm : report.per_class) {
    nlohmann::json jc;
    jc["num_gts"] = cm.num_gts;
    if (cm.num_gts > 0) {
      nlohmann::json ap;
      for (std::size_t t = 0; t < cfg.ap_thresholds.size(); ++t) {
        ap[format_threshold(cfg.ap_thresholds[t])] = cm.ap[t];
      }
      jc["ap"] = std::move(ap);
      jc["ate"] = opt_to_json(cm.ate);
      jc["ase"] = opt_to_json(cm.ase);
      jc["aoe"] = opt_to_json(cm.aoe);
      jc["ave"] = opt_to_json(cm.ave);
      jc["aae"] = opt_to_json(cm.aae);
    } else {
      jc["ap"] = nullptr;
      jc["ate"] = nullptr;
      jc["ase"] = nullptr;
      jc["aoe"] = nullptr;
      jc["ave"] = nullptr;
      jc["aae"] = nullptr;
    }
    classes[cm.class_name] = std::move(jc);
  }
  root["classes"] = std::move(classes);
  root["mAP"] = report.map_value;
  root["mATE"] = opt_to_json(report.m_ate);
  root["mASE"] = opt_to_json(report.m_ase);
  root["mAOE"] = opt_to_json(report.m_aoe);
  root["mAVE"] = opt_to_json(report.m_ave);
  root["mAAE"] = opt_to_json(report.m_aae);
  root["NDS"] = report.nds_value;
  return root.dump(2) + "\n";
}

std::string report_to_table(const EvalReport& report, const MatchConfig& cfg) {
  std::ostringstream out;
  char line[256];

  std::snprintf(line, sizeof(line), "%-22s %6s", "class", "gts");
  out << line;
  for (double t : cfg.ap_thresholds) {
    std::snprintf(line, sizeof(line), "  AP@%-4s", format_threshold(t).c_str());
    out << line;
  }
  out << "     ATE     ASE     AOE     AVE     AAE\n";

  auto cell = [&](const std::optional<double>& v) {
    char buf[16];
    if (v.has_value()) {
      std::snprintf(buf, sizeof(buf), "%7.3f", *v);
    } else {
      std::snprintf(buf, sizeof(buf), "%7s", "-");
    }
    return std::string(" ") + buf;
  };

  for (const ClassMetrics& cm : report.per_class) {
    std::snprintf(line, sizeof(line), "%-22s %6d", cm.class_name.c_str(),
                  cm.num_gts);
    out << line;
    for (std::size_t t = 0; t < cfg.ap_thresholds.size(); ++t) {
      if (cm.num_gts > 0) {
        std::snprintf(line, sizeof(line), "  %6.3f", cm.ap[t]);
      } else {
        std::snprintf(line, sizeof(line), "  %6s", "-");
      }
      out << line;
    }
    out << cell(cm.ate) << cell(cm.ase) << cell(cm.aoe) << cell(cm.ave)
        << cell(cm.aae) << "\n";
  }

  out << "\n";
  std::snprintf(line, sizeof(line), "mAP:  %.4f\n", report.map_value);
  out << line;
  auto mean_line = [&](const char* name, const std::optional<double>& v) {
    if (v.has_value()) {
      std::snprintf(line, sizeof(line), "%s: %.4f\n", name, *v);
    } else {
      std::snprintf(line, sizeof(line), "%s: -\n", name);
    }
    out << line;
  };
  mean_line("mATE", report.m_ate);
  mean_line("mASE", report.m_ase);
  mean_line("mAOE", report.m_aoe);
  mean_line("mAVE", report.m_ave);
  mean_line("mAAE", report.m_aae);
  std::snprintf(line, sizeof(line), "NDS:  %.4f\n", report.nds_value);
  out << line;
  return out.str();
}

}  // namespace mono3d
