// Timing harness comparing the OpenMP kernels against their serial
// references on synthetic workloads.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "mono3d/assignment.hpp"
#include "mono3d/dataset.hpp"
#include "mono3d/metrics.hpp"
#include "mono3d/nms.hpp"
#include "mono3d/rng.hpp"
#include "mono3d/runtime.hpp"

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

template <typename F>
double time_best_of(int reps, F&& fn) {
  double best = 1e30;
  for (int i = 0; i < reps; ++i) {
    const double t0 = now_seconds();
    fn();
    best = std::min(best, now_seconds() - t0);
  }
  return best;
}

void print_row(const char* name, double serial_s, double parallel_s) {
  std::printf("%-28s %10.2f ms %10.2f ms %8.2fx\n", name, serial_s * 1e3,
              parallel_s * 1e3, serial_s / parallel_s);
}

}  // namespace

int main(int argc, char** argv) {
  int threads = 0;
  int scale = 1;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--threads" && i + 1 < argc) {
      threads = std::atoi(argv[++i]);
    } else if (arg == "--scale" && i + 1 < argc) {
      scale = std::max(1, std::atoi(argv[++i]));
    } else {
      std::printf("usage: %s [--threads N] [--scale K]\n", argv[0]);
      return 64;
    }
  }
  if (threads > 0) mono3d::set_threads(threads);
  std::printf("threads: %d\n\n", mono3d::max_threads());
  std::printf("%-28s %13s %13s %9s\n", "kernel", "serial", "parallel",
              "speedup");

  const int reps = 3;

  // Target assignment: one dense scene.
  {
    mono3d::SyntheticConfig cfg;
    cfg.num_scenes = 1;
    cfg.objects_per_scene = 60 * scale;
    const mono3d::Dataset ds =
        mono3d::generate_synthetic(cfg, mono3d::PerturbConfig{}, 11);
    const auto& scene = ds.scenes.front();
    const mono3d::AssignConfig acfg;
    mono3d::AssignmentResult sink;
    const double serial_s = time_best_of(reps, [&] {
      sink = mono3d::assign_serial(scene.annotations,
                                   scene.cameras.front().intrinsics, acfg);
    });
    const double parallel_s = time_best_of(reps, [&] {
      sink = mono3d::assign(scene.annotations,
                            scene.cameras.front().intrinsics, acfg);
    });
    print_row("assignment", serial_s, parallel_s);
  }

  // Evaluation: many scenes, noisy detections.
  {
    mono3d::SyntheticConfig cfg;
    cfg.num_scenes = 60 * scale;
    cfg.objects_per_scene = 40;
    mono3d::PerturbConfig perturb;
    perturb.translation_sigma = 0.6;
    perturb.drop_prob = 0.15;
    perturb.clutter_rate = 0.4;
    const mono3d::Dataset ds = mono3d::generate_synthetic(cfg, perturb, 12);
    mono3d::MatchConfig mcfg;
    mcfg.frame = ds.frame;
    mono3d::EvalReport sink;
    const double serial_s =
        time_best_of(reps, [&] { sink = mono3d::evaluate_serial(ds, mcfg); });
    const double parallel_s =
        time_best_of(reps, [&] { sink = mono3d::evaluate(ds, mcfg); });
    print_row("evaluation", serial_s, parallel_s);
  }

  // NMS: one crowded ego-frame scene.
  {
    mono3d::Rng rng(13);
    std::vector<mono3d::Detection> dets;
    const int n = 1500 * scale;
    for (int i = 0; i < n; ++i) {
      mono3d::Detection d;
      d.box.center = {rng.uniform(-40.0, 40.0), rng.uniform(-40.0, 40.0), 1.0};
      d.box.size = {rng.uniform(1.5, 2.5), rng.uniform(3.5, 5.5), 1.7};
      d.box.yaw = rng.uniform(-3.1, 3.1);
      d.box.class_id = rng.uniform_int(0, 3);
      d.score = rng.uniform(0.0, 1.0);
      dets.push_back(d);
    }
    std::vector<mono3d::Detection> sink;
    const double serial_s =
        time_best_of(reps, [&] { sink = mono3d::bev_nms_serial(dets, 0.3); });
    const double parallel_s =
        time_best_of(reps, [&] { sink = mono3d::bev_nms(dets, 0.3); });
    print_row("bev_nms", serial_s, parallel_s);
  }

  return 0;
}
