// Kernel benchmark: OpenMP production paths vs the serial reference
// implementations, on synthetic workloads. Verifies agreement while timing.

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#include "CLI11.hpp"
#include "worldmark/geometry.hpp"
#include "worldmark/metrics.hpp"
#include "worldmark/plucker.hpp"
#include "worldmark/reference.hpp"

using namespace worldmark;

namespace {

geom::Trajectory random_trajectory(size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, 2.0);
    std::uniform_real_distribution<double> angle(-3.0, 3.0);
    geom::Trajectory traj;
    traj.frame_rate = 16.0;
    for (size_t i = 0; i < n; ++i) {
        geom::Rotation rot = geom::Rotation::from_axis_angle(
            {dist(rng), dist(rng) + 1e-3, dist(rng)}, angle(rng));
        traj.poses.push_back(geom::Pose(
            rot, {dist(rng), dist(rng), dist(rng)}, static_cast<double>(i)));
    }
    return traj;
}

template <typename Fn>
double time_best_of(int reps, Fn&& fn) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        auto start = std::chrono::steady_clock::now();
        fn();
        double elapsed = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - start)
                             .count();
        best = std::min(best, elapsed);
    }
    return best;
}

void print_row(const char* name, double serial_s, double parallel_s,
               double max_abs_diff) {
    std::printf("%-22s %12.3f ms %12.3f ms %8.2fx   max|diff| %.3e\n", name,
                serial_s * 1e3, parallel_s * 1e3,
                parallel_s > 0 ? serial_s / parallel_s : 0.0, max_abs_diff);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"worldmark kernel benchmark (serial reference vs OpenMP)"};
    size_t poses = 200000;
    size_t observations = 500000;
    int width = 640, height = 480;
    int reps = 5;
    int threads = 0;
    app.add_option("--poses", poses, "trajectory length for the metric kernels");
    app.add_option("--observations", observations, "reprojection observations");
    app.add_option("--width", width, "ray-map width");
    app.add_option("--height", height, "ray-map height");
    app.add_option("--reps", reps, "repetitions (best-of timing)");
    app.add_option("--threads", threads, "OpenMP threads (0 = default)");
    CLI11_PARSE(app, argc, argv);

    if (threads > 0) omp_set_num_threads(threads);
    std::printf("threads: %d\n\n", omp_get_max_threads());
    std::printf("%-22s %15s %15s %9s\n", "kernel", "serial", "openmp",
                "speedup");

    std::mt19937_64 rng(7);
    geom::Trajectory gt = random_trajectory(poses, rng);
    geom::Trajectory est = random_trajectory(poses, rng);

    {
        double serial_value = 0.0, parallel_value = 0.0;
        double serial_t = time_best_of(
            reps, [&] { serial_value = ref::translation_error(gt, est); });
        double parallel_t = time_best_of(
            reps, [&] { parallel_value = metrics::translation_error(gt, est); });
        print_row("translation_error", serial_t, parallel_t,
                  std::abs(serial_value - parallel_value));
    }
    {
        double serial_value = 0.0, parallel_value = 0.0;
        double serial_t = time_best_of(
            reps, [&] { serial_value = ref::rotation_error(gt, est); });
        double parallel_t = time_best_of(
            reps, [&] { parallel_value = metrics::rotation_error(gt, est); });
        print_row("rotation_error", serial_t, parallel_t,
                  std::abs(serial_value - parallel_value));
    }
    {
        geom::CameraIntrinsics intr{500.0, 500.0, 320.0, 240.0, 640, 480};
        std::uniform_real_distribution<double> px(0.0, 639.0);
        std::uniform_real_distribution<double> py(0.0, 479.0);
        std::uniform_real_distribution<double> depth(0.5, 20.0);
        std::normal_distribution<double> lateral(0.0, 2.0);
        std::vector<metrics::ReprojectionObservation> obs(observations);
        for (auto& o : obs) {
            o.px = px(rng);
            o.py = py(rng);
            o.point = {lateral(rng), lateral(rng), depth(rng)};
        }
        double serial_value = 0.0, parallel_value = 0.0;
        double serial_t = time_best_of(
            reps, [&] { serial_value = ref::reprojection_error(obs, intr); });
        double parallel_t = time_best_of(reps, [&] {
            parallel_value = metrics::reprojection_error(obs, intr);
        });
        print_row("reprojection_error", serial_t, parallel_t,
                  std::abs(serial_value - parallel_value));
    }
    {
        geom::CameraIntrinsics intr{0.9 * width, 0.9 * width, width / 2.0,
                                    height / 2.0, width, height};
        geom::Pose pose(geom::Rotation::from_axis_angle({0.2, 1.0, 0.1}, 0.7),
                        {1.5, -0.5, 2.0}, 0.0);
        std::vector<double> serial_map, parallel_map;
        double serial_t =
            time_best_of(reps, [&] { serial_map = ref::expand_frame(pose, intr); });
        double parallel_t = time_best_of(
            reps, [&] { parallel_map = plucker::expand_frame(pose, intr); });
        double max_diff = 0.0;
        for (size_t i = 0; i < serial_map.size(); ++i)
            max_diff = std::max(max_diff,
                                std::abs(serial_map[i] - parallel_map[i]));
        print_row("plucker_expand", serial_t, parallel_t, max_diff);
    }
    return 0;
}
