#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>

#include "ddalpha/classifier.hpp"
#include "ddalpha/depth.hpp"
#include "ddalpha/parallel.hpp"
#include "ddalpha/rng.hpp"

using namespace ddalpha;

namespace {

depth::LabeledDataset make_ds(RandomStream& stream, std::size_t per_class) {
  Matrix pts(2 * per_class, 2);
  std::vector<int> labels(2 * per_class);
  for (std::size_t i = 0; i < 2 * per_class; ++i) {
    const bool second = i >= per_class;
    pts(i, 0) = stream.normal() + (second ? 1.5 : 0.0);
    pts(i, 1) = stream.normal();
    labels[i] = second ? 1 : 0;
  }
  return depth::LabeledDataset::make(std::move(pts), std::move(labels));
}

struct EnvGuard {
  explicit EnvGuard(const char* value) {
    if (value)
      setenv("DDALPHA_THREADS", value, 1);
    else
      unsetenv("DDALPHA_THREADS");
  }
  ~EnvGuard() { unsetenv("DDALPHA_THREADS"); }
};

}  // namespace

TEST_CASE("DDALPHA_THREADS caps the thread budget") {
  {
    EnvGuard env("0");
    CHECK(parallel::max_threads() == 1);
  }
  {
    EnvGuard env("1");
    CHECK(parallel::max_threads() == 1);
  }
  {
    EnvGuard env("16");
    CHECK(parallel::max_threads() >= 1);
    CHECK(parallel::max_threads() <= 16);
  }
  {
    EnvGuard env("not-a-number");
    CHECK(parallel::max_threads() >= 1);
  }
  {
    EnvGuard env(nullptr);
    CHECK(parallel::max_threads() >= 1);
  }
}

TEST_CASE("ScopedSerial forces a single thread") {
  EnvGuard env("8");
  parallel::ScopedSerial guard;
  CHECK(parallel::max_threads() == 1);
}

TEST_CASE("OpenMP depth batch equals the serial reference bit for bit") {
  RandomStream stream(71);
  const auto ds = make_ds(stream, 60);
  const auto ctx = depth::make_depth_context(ds, depth::DepthKind::Zonoid, 0);
  Matrix probes(150, 2);
  for (auto& v : probes.data) v = stream.uniform(-3.0, 4.0);

  const auto serial = depth::depth_transform_batch_serial(probes, ctx);
  const auto parallel_default = depth::depth_transform_batch(probes, ctx);
  REQUIRE(serial.size() == parallel_default.size());
  for (std::size_t i = 0; i < serial.size(); ++i)
    CHECK(serial[i].values == parallel_default[i].values);

  EnvGuard env("4");
  const auto parallel_capped = depth::depth_transform_batch(probes, ctx);
  for (std::size_t i = 0; i < serial.size(); ++i)
    CHECK(serial[i].values == parallel_capped[i].values);
}

TEST_CASE("batch prediction is independent of the thread budget") {
  RandomStream stream(72);
  const auto ds = make_ds(stream, 50);
  classify::TrainConfig cfg;
  cfg.seed = 3;
  const auto model = classify::train(ds, cfg);

  Matrix probes(120, 2);
  for (auto& v : probes.data) v = stream.uniform(-5.0, 6.0);

  const auto serial = classify::predict_batch_serial(model, probes);
  std::vector<classify::Prediction> capped;
  {
    EnvGuard env("4");
    capped = classify::predict_batch(model, probes);
  }
  std::vector<classify::Prediction> forced_serial;
  {
    EnvGuard env("0");
    forced_serial = classify::predict_batch(model, probes);
  }
  REQUIRE(serial.size() == capped.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].label == capped[i].label);
    CHECK(serial[i].label == forced_serial[i].label);
    CHECK(serial[i].votes == capped[i].votes);
    CHECK(serial[i].outsider == capped[i].outsider);
    CHECK(serial[i].depth_vector.values == capped[i].depth_vector.values);
  }
}

TEST_CASE("MCD estimation does not depend on the thread budget") {
  RandomStream stream(73);
  Matrix pts(80, 3);
  for (auto& v : pts.data) v = stream.normal();

  depth::LocationScatter serial, capped;
  {
    EnvGuard env("0");
    serial = depth::estimate_mcd(pts, 99);
  }
  {
    EnvGuard env("8");
    capped = depth::estimate_mcd(pts, 99);
  }
  CHECK(serial.mu == capped.mu);
  CHECK(serial.sigma.data == capped.sigma.data);
}
