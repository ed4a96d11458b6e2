// Compares the OpenMP batch kernels against their serial reference
// implementations and the bounded-variable weight solver against the dense
// tableau route. Results must agree bit for bit where stated; the point of
// the binary is the timing table.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <vector>

#include "ddalpha/depth.hpp"
#include "ddalpha/lp.hpp"
#include "ddalpha/parallel.hpp"
#include "ddalpha/rng.hpp"

using namespace ddalpha;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

depth::LabeledDataset make_classes(RandomStream& stream, std::size_t per_class, std::size_t d) {
  Matrix pts(2 * per_class, d);
  std::vector<int> labels(2 * per_class);
  for (std::size_t i = 0; i < 2 * per_class; ++i) {
    const bool second = i >= per_class;
    for (std::size_t k = 0; k < d; ++k) pts(i, k) = stream.normal() + (second && k == 0 ? 1.0 : 0.0);
    labels[i] = second ? 1 : 0;
  }
  return depth::LabeledDataset::make(std::move(pts), std::move(labels));
}

void bench_depth_batch(std::size_t per_class, std::size_t d, std::size_t queries) {
  RandomStream stream(911);
  const auto ds = make_classes(stream, per_class, d);
  const auto ctx = depth::make_depth_context(ds, depth::DepthKind::Zonoid, 0);
  Matrix probes(queries, d);
  for (auto& v : probes.data) v = stream.normal();

  auto t0 = std::chrono::steady_clock::now();
  const auto serial = depth::depth_transform_batch_serial(probes, ctx);
  const double t_serial = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  const auto parallel = depth::depth_transform_batch(probes, ctx);
  const double t_parallel = seconds_since(t0);

  bool identical = serial.size() == parallel.size();
  for (std::size_t i = 0; identical && i < serial.size(); ++i)
    identical = serial[i].values == parallel[i].values;

  std::printf("depth batch  n=%4zu/class d=%2zu q=%5zu  serial %8.3fs  openmp %8.3fs  x%.1f  %s\n",
              per_class, d, queries, t_serial, t_parallel, t_serial / t_parallel,
              identical ? "identical" : "MISMATCH");
}

void bench_weight_solver(std::size_t n, std::size_t d, int reps) {
  RandomStream stream(913);
  Matrix pts(n, d);
  for (auto& v : pts.data) v = stream.normal();
  std::vector<std::vector<double>> targets;
  for (int r = 0; r < reps; ++r) {
    std::vector<double> t(d);
    for (auto& v : t) v = 0.5 * stream.normal();
    targets.push_back(std::move(t));
  }

  auto t0 = std::chrono::steady_clock::now();
  double acc_fast = 0.0;
  for (const auto& t : targets) {
    const auto r = lp::solve_min_max_weight(pts, t);
    if (r.status == lp::MinMaxStatus::Optimal) acc_fast += r.t_star;
  }
  const double t_fast = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  double acc_ref = 0.0;
  for (const auto& t : targets) {
    const auto r = lp::solve_min_max_weight_reference(pts, t);
    if (r.status == lp::MinMaxStatus::Optimal) acc_ref += r.t_star;
  }
  const double t_ref = seconds_since(t0);

  std::printf("weight LP    n=%4zu d=%2zu reps=%3d      bounded %8.4fs  tableau %8.3fs  x%.0f  |dt*|=%.2e\n",
              n, d, reps, t_fast, t_ref, t_ref / t_fast, std::abs(acc_fast - acc_ref));
}

}  // namespace

int main(int argc, char** argv) {
  bool quick = false;
  for (int i = 1; i < argc; ++i)
    if (std::strcmp(argv[i], "--quick") == 0) quick = true;

  std::printf("threads available: %d\n\n", parallel::max_threads());

  if (quick) {
    bench_depth_batch(100, 2, 200);
    bench_weight_solver(60, 2, 20);
    return 0;
  }

  bench_depth_batch(200, 2, 1000);
  bench_depth_batch(500, 5, 2000);
  bench_depth_batch(1000, 10, 2000);
  std::printf("\n");
  bench_weight_solver(60, 2, 40);
  bench_weight_solver(120, 3, 40);
  bench_weight_solver(250, 5, 20);
  return 0;
}
