#include "ddalpha/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ddalpha/errors.hpp"
#include "ddalpha/parallel.hpp"
#include "ddalpha/rng.hpp"

namespace ddalpha::eval {

double amr(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.empty() || truth.empty()) throw EmptyInput("amr: empty label vector");
  if (predicted.size() != truth.size()) throw LengthMismatch("amr: label vectors differ in length");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < truth.size(); ++i)
    if (predicted[i] != truth[i]) ++wrong;
  return double(wrong) / double(truth.size());
}

BoxplotStats boxplot_stats(std::span<const double> values) {
  if (values.empty()) throw EmptyInput("boxplot_stats: empty input");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();

  auto median_range = [&](std::size_t lo, std::size_t hi) {  // [lo, hi)
    const std::size_t len = hi - lo;
    return len % 2 == 1 ? v[lo + len / 2] : 0.5 * (v[lo + len / 2 - 1] + v[lo + len / 2]);
  };

  BoxplotStats s;
  s.min = v.front();
  s.max = v.back();
  s.median = median_range(0, n);
  if (n == 1) {
    s.q1 = s.q3 = v[0];
    return s;
  }
  const std::size_t half = n / 2;
  s.q1 = median_range(0, half);
  s.q3 = median_range(n % 2 == 1 ? half + 1 : half, n);
  return s;
}

namespace {

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

std::vector<Fold> build_folds(const depth::LabeledDataset& ds, const SplitScheme& scheme) {
  const std::size_t n = ds.size();
  std::vector<Fold> folds;

  if (const auto* tt = std::get_if<TrainTest>(&scheme)) {
    std::vector<std::size_t> counts = tt->per_class_train;
    if (counts.size() == 1) counts.assign(std::size_t(ds.q), counts[0]);
    if (counts.size() != std::size_t(ds.q))
      throw std::invalid_argument("evaluate: train counts must match the class count");
    Fold fold;
    for (int j = 0; j < ds.q; ++j) {
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < n; ++i)
        if (ds.labels[i] == j) idx.push_back(i);
      if (counts[std::size_t(j)] == 0 || counts[std::size_t(j)] >= idx.size())
        throw std::invalid_argument("evaluate: train count leaves no test points for class " +
                                    std::to_string(j));
      RandomStream stream = RandomStream::substream(tt->seed, std::uint64_t(j));
      for (std::size_t i = idx.size(); i > 1; --i)
        std::swap(idx[i - 1], idx[stream.below(i)]);
      for (std::size_t i = 0; i < idx.size(); ++i)
        (i < counts[std::size_t(j)] ? fold.train : fold.test).push_back(idx[i]);
    }
    std::sort(fold.train.begin(), fold.train.end());
    std::sort(fold.test.begin(), fold.test.end());
    folds.push_back(std::move(fold));
    return folds;
  }

  if (const auto* kf = std::get_if<KFold>(&scheme)) {
    if (kf->k < 2 || std::size_t(kf->k) > n)
      throw std::invalid_argument("evaluate: fold count out of range");
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t(0));
    RandomStream stream(kf->seed);
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[stream.below(i)]);
    folds.resize(std::size_t(kf->k));
    for (std::size_t i = 0; i < n; ++i)
      folds[i % std::size_t(kf->k)].test.push_back(perm[i]);
    for (auto& fold : folds) {
      std::sort(fold.test.begin(), fold.test.end());
      std::vector<char> in_test(n, 0);
      for (auto i : fold.test) in_test[i] = 1;
      for (std::size_t i = 0; i < n; ++i)
        if (!in_test[i]) fold.train.push_back(i);
    }
    return folds;
  }

  // leave-one-out
  folds.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    folds[i].test.push_back(i);
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) folds[i].train.push_back(j);
  }
  return folds;
}

struct FoldOutcome {
  std::size_t wrong = 0;
  std::size_t outsiders = 0;
  std::vector<std::vector<std::size_t>> confusion;
  double train_seconds = 0.0;
  double test_seconds = 0.0;
  std::size_t tested = 0;
};

FoldOutcome run_fold(const depth::LabeledDataset& ds, const Fold& fold,
                     const classify::TrainConfig& config) {
  using clock = std::chrono::steady_clock;
  FoldOutcome out;
  out.confusion.assign(std::size_t(ds.q), std::vector<std::size_t>(std::size_t(ds.q), 0));

  const Matrix train_pts = gather_rows(ds.points, fold.train);
  std::vector<int> train_labels;
  train_labels.reserve(fold.train.size());
  for (auto i : fold.train) train_labels.push_back(ds.labels[i]);
  // folds must keep every class alive; LabeledDataset::make enforces it
  auto sub = depth::LabeledDataset::make(train_pts, train_labels);
  if (sub.q != ds.q) throw TooFewPoints("fold lost a class entirely");

  const auto t0 = clock::now();
  const auto model = classify::train(sub, config);
  const auto t1 = clock::now();

  const Matrix test_pts = gather_rows(ds.points, fold.test);
  const auto preds = classify::predict_batch(model, test_pts);
  const auto t2 = clock::now();

  out.train_seconds = std::chrono::duration<double>(t1 - t0).count();
  out.test_seconds = std::chrono::duration<double>(t2 - t1).count();
  out.tested = fold.test.size();
  for (std::size_t i = 0; i < fold.test.size(); ++i) {
    const int truth = ds.labels[fold.test[i]];
    const int pred = preds[i].label;
    ++out.confusion[std::size_t(truth)][std::size_t(pred)];
    if (pred != truth) ++out.wrong;
    if (preds[i].outsider) ++out.outsiders;
  }
  return out;
}

}  // namespace

EvalReport evaluate(const depth::LabeledDataset& ds, const SplitScheme& scheme,
                    const classify::TrainConfig& config) {
  const auto folds = build_folds(ds, scheme);
  std::vector<FoldOutcome> outcomes(folds.size());

  const int nt = parallel::max_threads();
  std::atomic<bool> failed{false};
  std::exception_ptr err;
  std::atomic<long> failed_fold{-1};
#pragma omp parallel for schedule(dynamic) num_threads(nt) if (nt > 1 && folds.size() > 1)
  for (std::ptrdiff_t f = 0; f < std::ptrdiff_t(folds.size()); ++f) {
    if (failed.load(std::memory_order_relaxed)) continue;
    try {
      outcomes[std::size_t(f)] = run_fold(ds, folds[std::size_t(f)], config);
    } catch (...) {
#pragma omp critical
      if (!failed.exchange(true)) {
        err = std::current_exception();
        failed_fold.store(long(f));
      }
    }
  }
  if (failed.load()) {
    try {
      std::rethrow_exception(err);
    } catch (const std::exception& e) {
      throw std::runtime_error("evaluate: fold " + std::to_string(failed_fold.load()) +
                               " failed: " + e.what());
    }
  }

  EvalReport report;
  report.confusion.assign(std::size_t(ds.q), std::vector<std::size_t>(std::size_t(ds.q), 0));
  std::size_t wrong = 0, outsiders = 0, tested = 0;
  double test_seconds = 0.0;
  for (const auto& o : outcomes) {
    wrong += o.wrong;
    outsiders += o.outsiders;
    tested += o.tested;
    report.train_seconds += o.train_seconds;
    test_seconds += o.test_seconds;
    for (int a = 0; a < ds.q; ++a)
      for (int b = 0; b < ds.q; ++b)
        report.confusion[std::size_t(a)][std::size_t(b)] += o.confusion[std::size_t(a)][std::size_t(b)];
  }
  report.amr = double(wrong) / double(tested);
  report.outsider_rate = double(outsiders) / double(tested);
  report.test_seconds_per_point = test_seconds / double(tested);
  report.test_count = tested;
  return report;
}

std::string report_summary(const EvalReport& report, const std::vector<std::string>& class_names) {
  char buf[160];
  std::string out = "evaluation summary\n";
  std::snprintf(buf, sizeof buf, "  test points:     %zu\n", report.test_count);
  out += buf;
  std::snprintf(buf, sizeof buf, "  AMR:             %.6f\n", report.amr);
  out += buf;
  std::snprintf(buf, sizeof buf, "  outsider rate:   %.6f\n", report.outsider_rate);
  out += buf;
  std::snprintf(buf, sizeof buf, "  train time:      %.4f s\n", report.train_seconds);
  out += buf;
  std::snprintf(buf, sizeof buf, "  test time/point: %.6f s\n", report.test_seconds_per_point);
  out += buf;
  out += "  confusion (rows: truth, cols: predicted)\n";
  for (std::size_t a = 0; a < report.confusion.size(); ++a) {
    out += "    " + (a < class_names.size() ? class_names[a] : std::to_string(a)) + ":";
    for (std::size_t b = 0; b < report.confusion[a].size(); ++b)
      out += " " + std::to_string(report.confusion[a][b]);
    out += "\n";
  }
  return out;
}

namespace {

int select_cv(const depth::LabeledDataset& ds, classify::TrainConfig config,
              std::span<const int> candidates, int folds, bool over_degree) {
  if (candidates.empty()) throw std::invalid_argument("select_cv: no candidates");
  int best = candidates[0];
  double best_amr = std::numeric_limits<double>::infinity();
  for (int c : candidates) {
    classify::TrainConfig cfg = config;
    (over_degree ? cfg.degree : cfg.outsiders.k) = c;
    const auto report = evaluate(ds, KFold{folds, config.seed}, cfg);
    if (report.amr < best_amr) {
      best_amr = report.amr;
      best = c;
    }
  }
  return best;
}

}  // namespace

int select_degree_cv(const depth::LabeledDataset& ds, classify::TrainConfig config,
                     std::span<const int> candidates, int folds) {
  return select_cv(ds, config, candidates, folds, true);
}

int select_k_cv(const depth::LabeledDataset& ds, classify::TrainConfig config,
                std::span<const int> candidates, int folds) {
  return select_cv(ds, config, candidates, folds, false);
}

}  // namespace ddalpha::eval
