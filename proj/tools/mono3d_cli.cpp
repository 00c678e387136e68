// Command-line front end: synthetic scene generation, target encode/decode
// checks, assignment BPR reports, NMS and full evaluation.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mono3d/assignment.hpp"
#include "mono3d/dataset.hpp"
#include "mono3d/errors.hpp"
#include "mono3d/metrics.hpp"
#include "mono3d/nms.hpp"
#include "mono3d/runtime.hpp"
#include "mono3d/target_codec.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSchema = 2;
constexpr int kExitValidation = 3;
constexpr int kExitUsage = 64;

struct ValidationFailure : mono3d::Error {
  using Error::Error;
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw mono3d::Error("cannot write file: " + path);
  out << text;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  std::string output;
  int scenes = 10;
  int objects = 20;
  int views = 1;
  std::uint64_t seed = 1;
  mono3d::PerturbConfig perturb;
  bool overlapping_scores = false;
};

int run_simulate(const SimulateArgs& args) {
  mono3d::SyntheticConfig cfg;
  cfg.num_scenes = args.scenes;
  cfg.objects_per_scene = args.objects;
  cfg.num_views = args.views;
  mono3d::PerturbConfig perturb = args.perturb;
  if (args.overlapping_scores) {
    perturb.score_model = mono3d::PerturbConfig::ScoreModel::kOverlapping;
  }
  const mono3d::Dataset ds = mono3d::generate_synthetic(cfg, perturb, args.seed);
  mono3d::save_dataset(ds, args.output);

  int num_dets = 0;
  for (const auto& s : ds.scenes) num_dets += static_cast<int>(s.detections.size());
  std::printf("wrote %d scene(s), %d annotation(s), %d detection(s) to %s\n",
              static_cast<int>(ds.scenes.size()),
              args.scenes * args.objects, num_dets, args.output.c_str());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// encode

int run_encode(const std::string& input, bool check, double tolerance) {
  const mono3d::Dataset ds = mono3d::load_dataset(input);
  if (ds.frame != mono3d::Frame::kCamera) {
    throw ValidationFailure("encode requires a camera-frame dataset");
  }

  double max_err = 0.0;
  int encoded = 0;
  int skipped = 0;
  for (const auto& scene : ds.scenes) {
    if (scene.cameras.empty()) continue;
    const mono3d::CameraIntrinsics& K = scene.cameras.front().intrinsics;
    for (const auto& gt : scene.annotations) {
      if (gt.center.z() <= 0.0) {
        ++skipped;
        continue;
      }
      const mono3d::ProjectedCenter pc = mono3d::project_center(gt, K);
      const Eigen::Vector2d location(pc.u - 7.5, pc.v + 5.25);
      const mono3d::RegressionTarget t =
          mono3d::encode_targets(gt, K, location);
      const mono3d::Box3D decoded = mono3d::decode_prediction(t, location, K);

      double err = (decoded.center - gt.center).cwiseAbs().maxCoeff();
      err = std::max(err, (decoded.size - gt.size).cwiseAbs().maxCoeff());
      err = std::max(err, std::abs(mono3d::wrap_pi(decoded.yaw - gt.yaw)));
      err = std::max(err,
                     (decoded.velocity - gt.velocity).cwiseAbs().maxCoeff());
      max_err = std::max(max_err, err);
      ++encoded;
    }
  }

  std::printf("encoded %d box(es), skipped %d behind camera\n", encoded, skipped);
  std::printf("max roundtrip error: %.3e\n", max_err);
  if (check && max_err >= tolerance) {
    std::fprintf(stderr, "roundtrip error exceeds tolerance %.3e\n", tolerance);
    return kExitValidation;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// assign

int run_assign(const std::string& input, const std::string& mode,
               double radius, const std::string& output) {
  const mono3d::Dataset ds = mono3d::load_dataset(input);
  if (ds.frame != mono3d::Frame::kCamera) {
    throw ValidationFailure("assign requires a camera-frame dataset");
  }

  std::vector<mono3d::AssignMode> modes;
  if (mode == "distance") {
    modes = {mono3d::AssignMode::kDistance};
  } else if (mode == "area") {
    modes = {mono3d::AssignMode::kArea};
  } else {
    modes = {mono3d::AssignMode::kDistance, mono3d::AssignMode::kArea};
  }

  nlohmann::json jout;
  for (const mono3d::AssignMode m : modes) {
    mono3d::BprReport total;
    int behind_camera = 0;
    int outside_image = 0;
    for (const auto& scene : ds.scenes) {
      if (scene.cameras.empty()) continue;
      mono3d::AssignConfig cfg;
      cfg.mode = m;
      cfg.radius = radius;
      const mono3d::AssignmentResult result =
          mono3d::assign(scene.annotations, scene.cameras.front().intrinsics, cfg);
      behind_camera += result.num_behind_camera;
      outside_image += result.num_outside_image;
      const mono3d::BprReport bpr = mono3d::compute_bpr(scene.annotations, result);
      total.overall.total += bpr.overall.total;
      total.overall.recalled += bpr.overall.recalled;
      for (const auto& [cls, count] : bpr.per_class) {
        total.per_class[cls].total += count.total;
        total.per_class[cls].recalled += count.recalled;
      }
    }

    const char* mode_name = m == mono3d::AssignMode::kDistance ? "distance" : "area";
    std::printf("BPR (%s mode, radius %.2f):\n", mode_name, radius);
    nlohmann::json jmode;
    for (const auto& [cls, count] : total.per_class) {
      const std::string name =
          cls >= 0 && cls < static_cast<int>(ds.classes.size())
              ? ds.classes[cls]
              : std::to_string(cls);
      std::printf("  %-22s %6.4f  (%d/%d)\n", name.c_str(), count.fraction(),
                  count.recalled, count.total);
      jmode[name] = count.fraction();
    }
    std::printf("  %-22s %6.4f  (%d/%d)\n", "overall", total.overall.fraction(),
                total.overall.recalled, total.overall.total);
    if (behind_camera > 0 || outside_image > 0) {
      std::printf("  skipped: %d behind camera, %d projecting off image\n",
                  behind_camera, outside_image);
    }
    jmode["overall"] = total.overall.fraction();
    jout[mode_name] = std::move(jmode);
  }

  if (!output.empty()) write_text(output, jout.dump(2) + "\n");
  return kExitOk;
}

// ---------------------------------------------------------------------------
// evaluate

int run_evaluate(const std::string& input, const std::string& output,
                 int jobs) {
  const mono3d::Dataset ds = mono3d::load_dataset(input);
  if (!ds.has_detections()) {
    throw ValidationFailure("dataset has no detections to evaluate");
  }
  for (const auto& scene : ds.scenes) {
    for (const auto& det : scene.detections) {
      if (det.source_camera >= 0) {
        throw ValidationFailure(
            "detections are per-camera; run 'nms --multiview' first");
      }
    }
  }
  if (jobs > 0) mono3d::set_threads(jobs);

  mono3d::MatchConfig cfg;
  cfg.frame = ds.frame;
  const mono3d::EvalReport report = mono3d::evaluate(ds, cfg);
  std::cout << mono3d::report_to_table(report, cfg);
  if (!output.empty()) write_text(output, mono3d::report_to_json(report, cfg));
  return kExitOk;
}

// ---------------------------------------------------------------------------
// nms

int run_nms(const std::string& input, const std::string& output, double iou,
            bool multiview) {
  mono3d::Dataset ds = mono3d::load_dataset(input);
  if (!ds.has_detections()) {
    throw ValidationFailure("dataset has no detections");
  }

  int before = 0;
  int after = 0;
  for (auto& scene : ds.scenes) {
    before += static_cast<int>(scene.detections.size());
    if (multiview) {
      if (ds.frame != mono3d::Frame::kEgo) {
        throw ValidationFailure("--multiview requires an ego-frame dataset");
      }
      std::vector<mono3d::CameraDetections> per_camera(scene.cameras.size());
      for (std::size_t c = 0; c < scene.cameras.size(); ++c) {
        per_camera[c].extrinsics = scene.cameras[c].extrinsics;
      }
      for (const auto& det : scene.detections) {
        if (det.source_camera < 0) {
          throw ValidationFailure(
              "--multiview requires per-camera detections ('camera' set)");
        }
        per_camera[det.source_camera].detections.push_back(det);
      }
      scene.detections = mono3d::multiview_merge(per_camera, iou);
      // Fused detections live in the scene ego frame from here on.
      for (auto& det : scene.detections) det.source_camera = -1;
    } else {
      for (const auto& det : scene.detections) {
        if (det.source_camera >= 0) {
          throw ValidationFailure(
              "per-camera detections need --multiview to be fused");
        }
      }
      scene.detections = mono3d::bev_nms(scene.detections, iou,
                                         ds.frame == mono3d::Frame::kCamera
                                             ? mono3d::Frame::kCamera
                                             : mono3d::Frame::kEgo);
    }
    after += static_cast<int>(scene.detections.size());
  }

  mono3d::save_dataset(ds, output);
  std::printf("kept %d of %d detection(s); wrote %s\n", after, before,
              output.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monocular 3D detection toolkit"};
  app.require_subcommand(1);

  // simulate
  SimulateArgs sim;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "Generate synthetic scenes with perturbed detections");
  simulate->add_option("--output", sim.output, "Output dataset path")->required();
  simulate->add_option("--scenes", sim.scenes, "Number of scenes");
  simulate->add_option("--objects", sim.objects, "Objects per scene");
  simulate->add_option("--views", sim.views,
                       "Camera views (>1 switches to an ego-frame ring)");
  simulate->add_option("--seed", sim.seed, "RNG seed");
  simulate->add_option("--translation-offset", sim.perturb.translation_offset,
                       "Exact in-plane detection shift, meters");
  simulate->add_option("--translation-sigma", sim.perturb.translation_sigma,
                       "Gaussian in-plane noise, meters");
  simulate->add_option("--size-scale", sim.perturb.size_scale,
                       "Exact multiplier on detection sizes");
  simulate->add_option("--yaw-sigma", sim.perturb.yaw_sigma,
                       "Gaussian yaw noise, radians");
  simulate->add_option("--velocity-sigma", sim.perturb.velocity_sigma,
                       "Gaussian velocity noise, m/s");
  simulate->add_option("--attribute-flip", sim.perturb.attribute_flip_prob,
                       "Attribute flip probability");
  simulate->add_option("--drop", sim.perturb.drop_prob,
                       "Probability a ground truth gets no detection");
  simulate->add_option("--clutter", sim.perturb.clutter_rate,
                       "Expected false positives per ground truth");
  simulate->add_flag("--overlapping-scores", sim.overlapping_scores,
                     "Draw all scores from (0,1) instead of separated bands");

  // encode
  std::string encode_input;
  bool encode_check = false;
  double encode_tolerance = 1e-9;
  CLI::App* encode = app.add_subcommand(
      "encode", "Round-trip annotations through the target codec");
  encode->add_option("--input", encode_input, "Dataset path")->required();
  encode->add_flag("--check", encode_check,
                   "Fail (exit 3) when the max error exceeds the tolerance");
  encode->add_option("--tolerance", encode_tolerance, "Check tolerance");

  // assign
  std::string assign_input, assign_mode = "both", assign_output;
  double assign_radius = 1.5;
  CLI::App* assign = app.add_subcommand(
      "assign", "Run target assignment and report best possible recall");
  assign->add_option("--input", assign_input, "Dataset path")->required();
  assign->add_option("--mode", assign_mode, "distance | area | both")
      ->check(CLI::IsMember({"distance", "area", "both"}));
  assign->add_option("--radius", assign_radius, "Center sampling radius");
  assign->add_option("--output", assign_output, "Optional JSON output path");

  // evaluate
  std::string eval_input, eval_output;
  int eval_jobs = 0;
  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "Score detections against annotations");
  evaluate->add_option("--input", eval_input, "Dataset path")->required();
  evaluate->add_option("--output", eval_output, "Report JSON output path");
  evaluate->add_option("--jobs", eval_jobs, "Worker threads (0 = default)");

  // nms
  std::string nms_input, nms_output;
  double nms_iou = 0.5;
  bool nms_multiview = false;
  CLI::App* nms = app.add_subcommand(
      "nms", "Suppress overlapping detections in the bird's-eye view");
  nms->add_option("--input", nms_input, "Dataset path")->required();
  nms->add_option("--output", nms_output, "Output dataset path")->required();
  nms->add_option("--iou", nms_iou, "Suppression IoU threshold")
      ->check(CLI::Range(0.0, 1.0));
  nms->add_flag("--multiview", nms_multiview,
                "Fuse per-camera detections into the ego frame first");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << "\n" << app.help();
    return kExitUsage;
  }

  try {
    if (simulate->parsed()) return run_simulate(sim);
    if (encode->parsed())
      return run_encode(encode_input, encode_check, encode_tolerance);
    if (assign->parsed())
      return run_assign(assign_input, assign_mode, assign_radius, assign_output);
    if (evaluate->parsed())
      return run_evaluate(eval_input, eval_output, eval_jobs);
    if (nms->parsed()) return run_nms(nms_input, nms_output, nms_iou, nms_multiview);
  } catch (const mono3d::VersionMismatchError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitSchema;
  } catch (const mono3d::SchemaError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitSchema;
  } catch (const ValidationFailure& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return kExitUsage;
}
