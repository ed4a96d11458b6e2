#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "ddalpha/errors.hpp"
#include "ddalpha/evaluation.hpp"
#include "ddalpha/rng.hpp"

using namespace ddalpha;
using namespace ddalpha::eval;

namespace {

depth::LabeledDataset two_clusters(RandomStream& stream, std::size_t per_class, double shift) {
  Matrix pts(2 * per_class, 2);
  std::vector<int> labels(2 * per_class);
  for (std::size_t i = 0; i < 2 * per_class; ++i) {
    const bool second = i >= per_class;
    pts(i, 0) = stream.normal() + (second ? shift : 0.0);
    pts(i, 1) = stream.normal();
    labels[i] = second ? 1 : 0;
  }
  return depth::LabeledDataset::make(std::move(pts), std::move(labels));
}

}  // namespace

TEST_CASE("amr: examples and error paths") {
  const std::vector<int> a = {0, 1, 1, 0};
  CHECK(amr(a, a) == 0.0);
  const std::vector<int> b = {1, 0, 0, 1};
  CHECK(amr(a, b) == 1.0);
  const std::vector<int> c = {0, 1, 1, 1};
  CHECK(amr(a, c) == doctest::Approx(0.25));
  const std::vector<int> shorter = {0, 1};
  CHECK_THROWS_AS(amr(a, shorter), LengthMismatch);
  CHECK_THROWS_AS(amr(std::vector<int>{}, std::vector<int>{}), EmptyInput);
}

TEST_CASE("boxplot_stats: median-of-halves convention") {
  const std::vector<double> five = {1, 2, 3, 4, 5};
  const auto s = boxplot_stats(five);
  CHECK(s.min == 1.0);
  CHECK(s.q1 == doctest::Approx(1.5));
  CHECK(s.median == 3.0);
  CHECK(s.q3 == doctest::Approx(4.5));
  CHECK(s.max == 5.0);

  const std::vector<double> constant = {2.5, 2.5, 2.5};
  const auto c = boxplot_stats(constant);
  CHECK(c.min == 2.5);
  CHECK(c.q1 == 2.5);
  CHECK(c.median == 2.5);
  CHECK(c.q3 == 2.5);
  CHECK(c.max == 2.5);

  const std::vector<double> pair = {0.0, 1.0};
  const auto p = boxplot_stats(pair);
  CHECK(p.min == 0.0);
  CHECK(p.q1 == 0.0);
  CHECK(p.median == doctest::Approx(0.5));
  CHECK(p.q3 == 1.0);
  CHECK(p.max == 1.0);

  CHECK_THROWS_AS(boxplot_stats(std::vector<double>{}), EmptyInput);
}

TEST_CASE("evaluate: leave-one-out runs one fold per point") {
  RandomStream stream(301);
  const auto ds = two_clusters(stream, 15, 6.0);
  const auto report = evaluate(ds, LeaveOneOut{}, {});
  CHECK(report.test_count == ds.size());
  std::size_t conf_total = 0;
  for (const auto& row : report.confusion)
    for (auto v : row) conf_total += v;
  CHECK(conf_total == ds.size());
  CHECK(report.amr <= 0.2);  // far-apart clusters classify cleanly
}

TEST_CASE("evaluate: outsider rate is zero when one hull covers everything") {
  RandomStream stream(302);
  // class 0 repeats ten wide ring anchors four times, so every split keeps a
  // twin of each anchor in training and the hull always covers the inside
  const std::size_t anchors = 10, copies = 4, inner = 12;
  const std::size_t ring = anchors * copies;
  Matrix pts(ring + inner, 2);
  std::vector<int> labels(ring + inner);
  for (std::size_t i = 0; i < ring; ++i) {
    const double a = 2.0 * 3.14159265 * double(i % anchors) / double(anchors);
    pts(i, 0) = 100.0 * std::cos(a);
    pts(i, 1) = 100.0 * std::sin(a);
    labels[i] = 0;
  }
  for (std::size_t i = ring; i < ring + inner; ++i) {
    pts(i, 0) = stream.uniform(-2.0, 2.0);
    pts(i, 1) = stream.uniform(-2.0, 2.0);
    labels[i] = 1;
  }
  const auto ds = depth::LabeledDataset::make(std::move(pts), std::move(labels));
  classify::TrainConfig cfg;
  cfg.degree = 1;
  const auto report = evaluate(ds, TrainTest{{30, 8}, 303}, cfg);
  CHECK(report.outsider_rate == 0.0);
}

TEST_CASE("evaluate: train/test split follows the documented seeded shuffle") {
  RandomStream stream(304);
  const auto ds = two_clusters(stream, 20, 2.0);
  classify::TrainConfig cfg;
  cfg.seed = 5;
  const std::uint64_t split_seed = 305;
  const auto report = evaluate(ds, TrainTest{{12}, split_seed}, cfg);

  // reproduce the split: per class, shuffle indices with substream(seed, j)
  std::vector<std::size_t> train_idx, test_idx;
  for (int j = 0; j < ds.q; ++j) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < ds.size(); ++i)
      if (ds.labels[i] == j) idx.push_back(i);
    RandomStream s = RandomStream::substream(split_seed, std::uint64_t(j));
    for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[s.below(i)]);
    for (std::size_t i = 0; i < idx.size(); ++i) (i < 12 ? train_idx : test_idx).push_back(idx[i]);
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());

  std::vector<int> train_labels, test_labels;
  for (auto i : train_idx) train_labels.push_back(ds.labels[i]);
  for (auto i : test_idx) test_labels.push_back(ds.labels[i]);
  const auto model =
      classify::train(depth::LabeledDataset::make(gather_rows(ds.points, train_idx), train_labels), cfg);
  const auto preds = classify::predict_batch(model, gather_rows(ds.points, test_idx));
  std::vector<int> predicted;
  for (const auto& p : preds) predicted.push_back(p.label);

  CHECK(report.test_count == test_idx.size());
  CHECK(report.amr == doctest::Approx(amr(predicted, test_labels)));

  // the reported outsider rate equals the all-zero depth fraction computed
  // against depth-core directly
  const auto train_ds =
      depth::LabeledDataset::make(gather_rows(ds.points, train_idx), train_labels);
  const auto ctx = depth::make_depth_context(train_ds, depth::DepthKind::Zonoid, cfg.seed);
  const auto depths = depth::depth_transform_batch(gather_rows(ds.points, test_idx), ctx);
  std::size_t zero = 0;
  for (const auto& dv : depths)
    if (dv.is_outsider()) ++zero;
  CHECK(report.outsider_rate == doctest::Approx(double(zero) / double(test_idx.size())));
}

TEST_CASE("evaluate: outsider rate does not drop when columns are appended") {
  // same 146 draws widened from 2 to 5 to 9 feature columns
  RandomStream stream(313);
  const std::size_t n = 146;
  Matrix wide(n, 9);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = i % 2;
    for (std::size_t k = 0; k < 9; ++k)
      wide(i, k) = stream.normal() + (labels[i] == 1 && k == 0 ? 1.0 : 0.0);
  }
  double previous = -1.0;
  for (std::size_t d : {std::size_t(2), std::size_t(5), std::size_t(9)}) {
    Matrix pts(n, d);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < d; ++k) pts(i, k) = wide(i, k);
    const auto ds = depth::LabeledDataset::make(pts, labels);
    const auto report = evaluate(ds, TrainTest{{50}, 314}, {});
    CHECK(report.outsider_rate >= previous);
    previous = report.outsider_rate;
  }
}

TEST_CASE("report_summary: contains the headline figures") {
  EvalReport report;
  report.amr = 0.25;
  report.outsider_rate = 0.5;
  report.test_count = 8;
  report.train_seconds = 0.1;
  report.test_seconds_per_point = 0.001;
  report.confusion = {{3, 1}, {1, 3}};
  const std::string text = report_summary(report, {"a", "b"});
  CHECK(text.find("0.250000") != std::string::npos);
  CHECK(text.find("0.500000") != std::string::npos);
  CHECK(text.find("a: 3 1") != std::string::npos);
  CHECK(text.find("b: 1 3") != std::string::npos);
}

TEST_CASE("evaluate: k-fold is seed-reproducible and covers every point once") {
  RandomStream stream(306);
  const auto ds = two_clusters(stream, 25, 4.0);
  const auto r1 = evaluate(ds, KFold{5, 307}, {});
  const auto r2 = evaluate(ds, KFold{5, 307}, {});
  CHECK(r1.amr == r2.amr);
  CHECK(r1.outsider_rate == r2.outsider_rate);
  CHECK(r1.confusion == r2.confusion);
  CHECK(r1.test_count == ds.size());

  const auto r3 = evaluate(ds, KFold{5, 308}, {});
  CHECK(r3.test_count == ds.size());  // different seed, still a partition
}

TEST_CASE("evaluate: timings are populated") {
  RandomStream stream(309);
  const auto ds = two_clusters(stream, 20, 3.0);
  const auto report = evaluate(ds, TrainTest{{14}, 310}, {});
  CHECK(report.train_seconds > 0.0);
  CHECK(report.test_seconds_per_point > 0.0);
}

TEST_CASE("evaluate: scheme validation") {
  RandomStream stream(311);
  const auto ds = two_clusters(stream, 10, 3.0);
  CHECK_THROWS_AS(evaluate(ds, TrainTest{{10}, 0}, {}), std::invalid_argument);   // no test left
  CHECK_THROWS_AS(evaluate(ds, TrainTest{{3, 3, 3}, 0}, {}), std::invalid_argument);
  CHECK_THROWS_AS(evaluate(ds, KFold{1, 0}, {}), std::invalid_argument);
}

TEST_CASE("cross-validated selection stays within the candidate set") {
  RandomStream stream(312);
  const auto ds = two_clusters(stream, 25, 3.0);
  const std::vector<int> degrees = {1, 2};
  const int p = select_degree_cv(ds, {}, degrees, 4);
  CHECK((p == 1 || p == 2));

  classify::TrainConfig cfg;
  cfg.outsiders.kind = classify::OutsiderRule::Kind::KnnEuclid;
  const std::vector<int> ks = {1, 3};
  const int k = select_k_cv(ds, cfg, ks, 4);
  CHECK((k == 1 || k == 3));
}
