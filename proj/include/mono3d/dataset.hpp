#ifndef MONO3D_DATASET_HPP_
#define MONO3D_DATASET_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "mono3d/geometry.hpp"

namespace mono3d {

inline constexpr const char* kDatasetVersion = "mono3d-dataset-v1";

struct CameraModel {
  CameraIntrinsics intrinsics;
  CameraExtrinsics extrinsics;  // camera-local frame -> scene ego frame
};

// One capture: cameras, ground-truth boxes and (optionally) detections.
// Annotation and detection boxes live in the frame declared by the
// enclosing dataset, except that a detection with source_camera >= 0 lives
// in that camera's local frame (multi-view files only).
struct Scene {
  std::string id;
  std::vector<CameraModel> cameras;
  std::vector<Box3D> annotations;
  std::vector<Detection> detections;
};

struct Dataset {
  std::string version = kDatasetVersion;
  Frame frame = Frame::kCamera;
  std::vector<std::string> classes;
  std::vector<std::string> attributes;
  std::vector<Scene> scenes;

  bool has_detections() const;
};

// Serialization is canonical: keys are emitted sorted, doubles use the
// shortest representation that round-trips, so save -> load -> save is
// byte-identical. Loading validates the schema (SchemaError) and the
// version field (VersionMismatchError); yaw values are normalized to
// (-pi, pi] on the way in.
Dataset load_dataset(const std::string& path);
void save_dataset(const Dataset& ds, const std::string& path);
std::string serialize_dataset(const Dataset& ds);
Dataset parse_dataset(const std::string& text, const std::string& origin = "");

// Knobs for perturbing ground truths into synthetic detections. Offsets
// and the size scale are exact (analytic metric expectations); sigmas add
// gaussian noise on top.
struct PerturbConfig {
  double translation_offset = 0.0;  // exact in-plane shift magnitude, meters
  double translation_sigma = 0.0;   // per-axis ground-plane noise, meters
  double size_scale = 1.0;          // exact multiplier on all three sizes
  double yaw_sigma = 0.0;           // radians
  double velocity_sigma = 0.0;      // m/s per component
  double attribute_flip_prob = 0.0;
  double drop_prob = 0.0;    // chance a ground truth gets no detection
  double clutter_rate = 0.0; // expected false positives per ground truth
  // True detections score in [0.7, 1), clutter in (0, 0.3]; kOverlapping
  // draws both from (0, 1).
  enum class ScoreModel { kSeparated, kOverlapping };
  ScoreModel score_model = ScoreModel::kSeparated;
};

struct SyntheticConfig {
  int num_scenes = 10;
  int objects_per_scene = 20;
  int num_views = 1;  // 1: camera-frame scenes; >1: ego frame, one ring
  CameraIntrinsics intrinsics{1000.0, 1000.0, 800.0, 450.0, 1600, 900};
  double min_depth = 6.0;
  double max_depth = 40.0;
};

// Deterministic synthetic scenes with detections derived from the ground
// truths per `perturb`. The same (config, perturb, seed) triple always
// produces the same dataset, byte for byte.
Dataset generate_synthetic(const SyntheticConfig& config,
                           const PerturbConfig& perturb, std::uint64_t seed);

// The ten default categories used by the synthetic generator.
std::vector<std::string> default_class_names();

}  // namespace mono3d

#endif  // MONO3D_DATASET_HPP_
