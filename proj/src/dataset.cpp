#include "mono3d/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mono3d/errors.hpp"
#include "mono3d/rng.hpp"

namespace mono3d {

using nlohmann::json;

bool Dataset::has_detections() const {
  return std::any_of(scenes.begin(), scenes.end(),
                     [](const Scene& s) { return !s.detections.empty(); });
}

std::vector<std::string> default_class_names() {
  return {"car",        "truck",      "bus",          "trailer",
          "construction_vehicle", "pedestrian", "motorcycle", "bicycle",
          "traffic_cone", "barrier"};
}

namespace {

std::string idx(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

const json& require_field(const json& obj, const char* key,
                          const std::string& path) {
  if (!obj.is_object()) throw SchemaError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw SchemaError(path, std::string("missing field '") + key + "'");
  }
  return *it;
}

double as_double(const json& v, const std::string& path) {
  if (!v.is_number()) throw SchemaError(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw SchemaError(path, "expected a finite number");
  return d;
}

int as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw SchemaError(path, "expected an integer");
  return v.get<int>();
}

Eigen::Vector3d as_vec3(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 3) {
    throw SchemaError(path, "expected an array of 3 numbers");
  }
  return {as_double(v[0], idx(path, 0)), as_double(v[1], idx(path, 1)),
          as_double(v[2], idx(path, 2))};
}

Eigen::Vector2d as_vec2(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2) {
    throw SchemaError(path, "expected an array of 2 numbers");
  }
  return {as_double(v[0], idx(path, 0)), as_double(v[1], idx(path, 1))};
}

json vec_to_json(const Eigen::Vector3d& v) { return json{v.x(), v.y(), v.z()}; }
json vec_to_json(const Eigen::Vector2d& v) { return json{v.x(), v.y()}; }

Box3D parse_box(const json& j, const std::string& path, int num_classes,
                int num_attributes) {
  Box3D box;
  box.center = as_vec3(require_field(j, "center", path), path + ".center");
  box.size = as_vec3(require_field(j, "size", path), path + ".size");
  if (box.size.minCoeff() <= 0.0) {
    throw SchemaError(path + ".size", "size components must be positive");
  }
  box.yaw = wrap_pi(as_double(require_field(j, "yaw", path), path + ".yaw"));
  box.velocity =
      as_vec2(require_field(j, "velocity", path), path + ".velocity");
  box.class_id =
      as_int(require_field(j, "class_id", path), path + ".class_id");
  if (box.class_id < 0 || box.class_id >= num_classes) {
    throw SchemaError(path + ".class_id", "unknown class id");
  }
  const json& attr = require_field(j, "attribute_id", path);
  if (!attr.is_null()) {
    const int a = as_int(attr, path + ".attribute_id");
    if (a < 0 || a >= num_attributes) {
      throw SchemaError(path + ".attribute_id", "unknown attribute id");
    }
    box.attribute_id = a;
  }
  return box;
}

json box_to_json(const Box3D& box) {
  json j;
  j["center"] = vec_to_json(box.center);
  j["size"] = vec_to_json(box.size);
  j["yaw"] = box.yaw;
  j["velocity"] = vec_to_json(box.velocity);
  j["class_id"] = box.class_id;
  j["attribute_id"] =
      box.attribute_id.has_value() ? json(*box.attribute_id) : json(nullptr);
  return j;
}

CameraModel parse_camera(const json& j, const std::string& path) {
  CameraModel cam;
  const json& intr = require_field(j, "intrinsics", path);
  const std::string ipath = path + ".intrinsics";
  cam.intrinsics.fx = as_double(require_field(intr, "fx", ipath), ipath + ".fx");
  cam.intrinsics.fy = as_double(require_field(intr, "fy", ipath), ipath + ".fy");
  cam.intrinsics.cx = as_double(require_field(intr, "cx", ipath), ipath + ".cx");
  cam.intrinsics.cy = as_double(require_field(intr, "cy", ipath), ipath + ".cy");
  cam.intrinsics.image_width =
      as_int(require_field(intr, "width", ipath), ipath + ".width");
  cam.intrinsics.image_height =
      as_int(require_field(intr, "height", ipath), ipath + ".height");
  if (cam.intrinsics.fx <= 0.0 || cam.intrinsics.fy <= 0.0) {
    throw SchemaError(ipath, "focal lengths must be positive");
  }
  if (cam.intrinsics.image_width <= 0 || cam.intrinsics.image_height <= 0) {
    throw SchemaError(ipath, "image dimensions must be positive");
  }

  const json& extr = require_field(j, "extrinsics", path);
  const std::string epath = path + ".extrinsics";
  const json& rot = require_field(extr, "rotation", epath);
  if (!rot.is_array() || rot.size() != 3) {
    throw SchemaError(epath + ".rotation", "expected a 3x3 matrix");
  }
  for (int r = 0; r < 3; ++r) {
    const json& row = rot[r];
    if (!row.is_array() || row.size() != 3) {
      throw SchemaError(idx(epath + ".rotation", r), "expected a row of 3");
    }
    for (int c = 0; c < 3; ++c) {
      cam.extrinsics.rotation(r, c) =
          as_double(row[c], idx(idx(epath + ".rotation", r), c));
    }
  }
  cam.extrinsics.translation = as_vec3(require_field(extr, "translation", epath),
                                       epath + ".translation");
  if (!cam.extrinsics.is_valid_rotation()) {
    throw SchemaError(epath + ".rotation",
                      "rotation is not orthonormal with determinant +1");
  }
  return cam;
}

json camera_to_json(const CameraModel& cam) {
  json j;
  j["intrinsics"] = {{"fx", cam.intrinsics.fx},
                     {"fy", cam.intrinsics.fy},
                     {"cx", cam.intrinsics.cx},
                     {"cy", cam.intrinsics.cy},
                     {"width", cam.intrinsics.image_width},
                     {"height", cam.intrinsics.image_height}};
  json rot = json::array();
  for (int r = 0; r < 3; ++r) {
    rot.push_back({cam.extrinsics.rotation(r, 0), cam.extrinsics.rotation(r, 1),
                   cam.extrinsics.rotation(r, 2)});
  }
  j["extrinsics"] = {{"rotation", rot},
                     {"translation", vec_to_json(cam.extrinsics.translation)}};
  return j;
}

}  // namespace

namespace {
Dataset parse_dataset_impl(const json& root);
}  // namespace

Dataset parse_dataset(const std::string& text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(origin.empty() ? "<input>" : origin,
                      std::string("invalid JSON: ") + e.what());
  }
  try {
    return parse_dataset_impl(root);
  } catch (const json::exception& e) {
    // Stray type errors from the walk surface as schema violations.
    throw SchemaError(origin.empty() ? "<input>" : origin, e.what());
  }
}

namespace {

Dataset parse_dataset_impl(const json& root) {
  if (!root.is_object()) throw SchemaError("$", "expected a JSON object");

  const json& version = require_field(root, "version", "$");
  if (!version.is_string()) throw SchemaError("$.version", "expected a string");
  if (version.get<std::string>() != kDatasetVersion) {
    throw VersionMismatchError("unsupported dataset version '" +
                               version.get<std::string>() + "', expected '" +
                               kDatasetVersion + "'");
  }

  Dataset ds;
  const json& frame = require_field(root, "frame", "$");
  if (frame == "camera") {
    ds.frame = Frame::kCamera;
  } else if (frame == "ego") {
    ds.frame = Frame::kEgo;
  } else {
    throw SchemaError("$.frame", "expected \"camera\" or \"ego\"");
  }

  for (const json& c : require_field(root, "classes", "$")) {
    ds.classes.push_back(c.get<std::string>());
  }
  for (const json& a : require_field(root, "attributes", "$")) {
    ds.attributes.push_back(a.get<std::string>());
  }

  const json& scenes = require_field(root, "scenes", "$");
  if (!scenes.is_array()) throw SchemaError("$.scenes", "expected an array");
  for (std::size_t si = 0; si < scenes.size(); ++si) {
    const std::string spath = idx("scenes", si);
    const json& js = scenes[si];
    Scene scene;
    scene.id = require_field(js, "id", spath).get<std::string>();

    const json& cams = require_field(js, "cameras", spath);
    for (std::size_t ci = 0; ci < cams.size(); ++ci) {
      scene.cameras.push_back(parse_camera(cams[ci], idx(spath + ".cameras", ci)));
    }

    const json& anns = require_field(js, "annotations", spath);
    for (std::size_t ai = 0; ai < anns.size(); ++ai) {
      scene.annotations.push_back(
          parse_box(anns[ai], idx(spath + ".annotations", ai),
                    static_cast<int>(ds.classes.size()),
                    static_cast<int>(ds.attributes.size())));
    }

    if (js.contains("detections") && !js["detections"].is_null()) {
      const json& dets = js["detections"];
      for (std::size_t di = 0; di < dets.size(); ++di) {
        const std::string dpath = idx(spath + ".detections", di);
        Detection det;
        det.box = parse_box(dets[di], dpath,
                            static_cast<int>(ds.classes.size()),
                            static_cast<int>(ds.attributes.size()));
        det.score = as_double(require_field(dets[di], "score", dpath),
                              dpath + ".score");
        if (det.score < 0.0 || det.score > 1.0) {
          throw SchemaError(dpath + ".score", "score must be in [0, 1]");
        }
        const json& cam = require_field(dets[di], "camera", dpath);
        if (cam.is_null()) {
          det.source_camera = -1;
        } else {
          det.source_camera = as_int(cam, dpath + ".camera");
          if (det.source_camera < 0 ||
              static_cast<std::size_t>(det.source_camera) >=
                  scene.cameras.size()) {
            throw SchemaError(dpath + ".camera", "unknown camera index");
          }
        }
        scene.detections.push_back(std::move(det));
      }
    }
    ds.scenes.push_back(std::move(scene));
  }
  return ds;
}

}  // namespace

std::string serialize_dataset(const Dataset& ds) {
  json root;
  root["version"] = ds.version;
  root["frame"] = ds.frame == Frame::kCamera ? "camera" : "ego";
  root["classes"] = ds.classes;
  root["attributes"] = ds.attributes;
  json scenes = json::array();
  for (const Scene& s : ds.scenes) {
    json js;
    js["id"] = s.id;
    json cams = json::array();
    for (const CameraModel& c : s.cameras) cams.push_back(camera_to_json(c));
    js["cameras"] = std::move(cams);
    json anns = json::array();
    for (const Box3D& b : s.annotations) anns.push_back(box_to_json(b));
    js["annotations"] = std::move(anns);
    json dets = json::array();
    for (const Detection& d : s.detections) {
      json jd = box_to_json(d.box);
      jd["score"] = d.score;
      jd["camera"] =
          d.source_camera >= 0 ? json(d.source_camera) : json(nullptr);
      dets.push_back(std::move(jd));
    }
    js["detections"] = std::move(dets);
    scenes.push_back(std::move(js));
  }
  root["scenes"] = std::move(scenes);
  return root.dump(2) + "\n";
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError(path, "cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_dataset(buf.str(), path);
}

void save_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write file: " + path);
  out << serialize_dataset(ds);
}

namespace {

struct ClassPrior {
  double w, l, h;
  bool moves;
};

// Rough mean extents per category; only used to shape synthetic scenes.
const ClassPrior kPriors[] = {
    {1.95, 4.62, 1.73, true},   // car
    {2.50, 6.90, 2.80, true},   // truck
    {2.90, 11.0, 3.50, true},   // bus
    {2.90, 12.3, 3.90, true},   // trailer
    {2.80, 6.40, 3.20, true},   // construction_vehicle
    {0.67, 0.73, 1.77, true},   // pedestrian
    {0.77, 2.11, 1.46, true},   // motorcycle
    {0.60, 1.70, 1.30, true},   // bicycle
    {0.41, 0.41, 1.07, false},  // traffic_cone
    {2.50, 0.50, 0.98, false},  // barrier
};

Box3D sample_camera_frame_box(Rng& rng, const SyntheticConfig& cfg,
                              int num_attributes) {
  const int cls = rng.uniform_int(0, 9);
  const ClassPrior& prior = kPriors[cls];

  Box3D box;
  box.class_id = cls;
  const double z = rng.uniform(cfg.min_depth, cfg.max_depth);
  const double u =
      rng.uniform(0.12 * cfg.intrinsics.image_width, 0.88 * cfg.intrinsics.image_width);
  const double v =
      rng.uniform(0.30 * cfg.intrinsics.image_height, 0.70 * cfg.intrinsics.image_height);
  box.center = back_project(u, v, z, cfg.intrinsics);
  box.size = {prior.w * rng.uniform(0.85, 1.15), prior.l * rng.uniform(0.85, 1.15),
              prior.h * rng.uniform(0.85, 1.15)};
  box.yaw = rng.uniform(-kPi, kPi);
  if (prior.moves) {
    box.velocity = {rng.normal(0.0, 2.0), rng.normal(0.0, 2.0)};
  }
  box.attribute_id = rng.uniform_int(0, num_attributes - 1);
  return box;
}

Box3D sample_ego_frame_box(Rng& rng, int num_attributes) {
  const int cls = rng.uniform_int(0, 9);
  const ClassPrior& prior = kPriors[cls];

  Box3D box;
  box.class_id = cls;
  const double range = rng.uniform(8.0, 35.0);
  const double bearing = rng.uniform(-kPi, kPi);
  box.size = {prior.w * rng.uniform(0.85, 1.15), prior.l * rng.uniform(0.85, 1.15),
              prior.h * rng.uniform(0.85, 1.15)};
  box.center = {range * std::cos(bearing), range * std::sin(bearing),
                0.5 * box.size.z()};
  box.yaw = rng.uniform(-kPi, kPi);
  if (prior.moves) {
    box.velocity = {rng.normal(0.0, 2.0), rng.normal(0.0, 2.0)};
  }
  box.attribute_id = rng.uniform_int(0, num_attributes - 1);
  return box;
}

Detection perturb_into_detection(Rng& rng, const Box3D& gt, Frame frame,
                                 const PerturbConfig& p, int num_attributes) {
  Detection det;
  det.box = gt;

  double ox = 0.0;
  double oy = 0.0;
  if (p.translation_offset != 0.0) {
    const double phi = rng.uniform(0.0, 2.0 * kPi);
    ox += p.translation_offset * std::cos(phi);
    oy += p.translation_offset * std::sin(phi);
  }
  if (p.translation_sigma > 0.0) {
    ox += rng.normal(0.0, p.translation_sigma);
    oy += rng.normal(0.0, p.translation_sigma);
  }
  if (frame == Frame::kCamera) {
    det.box.center.x() += ox;
    det.box.center.z() += oy;
    det.box.center.z() = std::max(det.box.center.z(), 0.1);
  } else {
    det.box.center.x() += ox;
    det.box.center.y() += oy;
  }

  det.box.size *= p.size_scale;
  if (p.yaw_sigma > 0.0) {
    det.box.yaw = wrap_pi(det.box.yaw + rng.normal(0.0, p.yaw_sigma));
  }
  if (p.velocity_sigma > 0.0) {
    det.box.velocity.x() += rng.normal(0.0, p.velocity_sigma);
    det.box.velocity.y() += rng.normal(0.0, p.velocity_sigma);
  }
  if (p.attribute_flip_prob > 0.0 && det.box.attribute_id.has_value() &&
      num_attributes > 1 && rng.bernoulli(p.attribute_flip_prob)) {
    int a = *det.box.attribute_id;
    while (a == *det.box.attribute_id) a = rng.uniform_int(0, num_attributes - 1);
    det.box.attribute_id = a;
  }

  det.score = p.score_model == PerturbConfig::ScoreModel::kSeparated
                  ? rng.uniform(0.7, 1.0)
                  : rng.uniform(0.0, 1.0);
  return det;
}

}  // namespace

Dataset generate_synthetic(const SyntheticConfig& config,
                           const PerturbConfig& perturb, std::uint64_t seed) {
  Dataset ds;
  ds.frame = config.num_views > 1 ? Frame::kEgo : Frame::kCamera;
  ds.classes = default_class_names();
  ds.attributes = {"moving", "stopped", "parked", "with_rider",
                   "without_rider", "standing", "sitting"};
  Rng rng(seed);

  for (int si = 0; si < config.num_scenes; ++si) {
    Scene scene;
    {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "synthetic-%04d", si);
      scene.id = buf;
    }

    if (config.num_views <= 1) {
      CameraModel cam;
      cam.intrinsics = config.intrinsics;
      scene.cameras.push_back(cam);
    } else {
      // A ring of views around the ego origin, one every 2*pi/N of heading.
      for (int k = 0; k < config.num_views; ++k) {
        CameraModel cam;
        cam.intrinsics = config.intrinsics;
        const double a = 2.0 * kPi * k / config.num_views;
        cam.extrinsics.rotation =
            Eigen::AngleAxisd(a, Eigen::Vector3d::UnitZ()).toRotationMatrix();
        cam.extrinsics.translation = {0.3 * std::cos(a), 0.3 * std::sin(a), 0.0};
        scene.cameras.push_back(cam);
      }
    }

    const int num_attrs = static_cast<int>(ds.attributes.size());
    for (int oi = 0; oi < config.objects_per_scene; ++oi) {
      scene.annotations.push_back(
          config.num_views > 1 ? sample_ego_frame_box(rng, num_attrs)
                               : sample_camera_frame_box(rng, config, num_attrs));
    }

    for (std::size_t gi = 0; gi < scene.annotations.size(); ++gi) {
      const Box3D& gt = scene.annotations[gi];
      if (perturb.drop_prob > 0.0 && rng.bernoulli(perturb.drop_prob)) continue;
      const Detection det =
          perturb_into_detection(rng, gt, ds.frame, perturb, num_attrs);
      if (config.num_views > 1) {
        for (std::size_t cam = 0; cam < scene.cameras.size(); ++cam) {
          Detection local = det;
          local.box = transform_to_ego(det.box,
                                       scene.cameras[cam].extrinsics.inverse());
          local.source_camera = static_cast<int>(cam);
          scene.detections.push_back(std::move(local));
        }
      } else {
        scene.detections.push_back(det);
      }
    }

    if (perturb.clutter_rate > 0.0 && config.num_views <= 1) {
      for (int oi = 0; oi < config.objects_per_scene; ++oi) {
        if (!rng.bernoulli(perturb.clutter_rate)) continue;
        // A spurious detection far from every same-class ground truth, so
        // it can never match.
        for (int attempt = 0; attempt < 100; ++attempt) {
          Box3D fp = sample_camera_frame_box(rng, config, num_attrs);
          bool far = true;
          for (const Box3D& gt : scene.annotations) {
            if (gt.class_id == fp.class_id &&
                ground_distance(fp, gt, ds.frame) < 6.0) {
              far = false;
              break;
            }
          }
          if (!far) continue;
          Detection det;
          det.box = fp;
          det.score = perturb.score_model == PerturbConfig::ScoreModel::kSeparated
                          ? rng.uniform(0.0, 0.3)
                          : rng.uniform(0.0, 1.0);
          scene.detections.push_back(std::move(det));
          break;
        }
      }
    }
    ds.scenes.push_back(std::move(scene));
  }
  return ds;
}

}  // namespace mono3d
