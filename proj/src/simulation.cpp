#include "ddalpha/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ddalpha/errors.hpp"
#include "ddalpha/evaluation.hpp"
#include "ddalpha/lp.hpp"
#include "ddalpha/parallel.hpp"

namespace ddalpha::sim {

namespace {

Matrix sample_normal(const NormalSpec& spec, std::size_t n, RandomStream& stream) {
  const std::size_t d = spec.mean.size();
  const Matrix L = lp::cholesky_lower(spec.cov);
  Matrix out(n, d);
  std::vector<double> z(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : z) v = stream.normal();
    for (std::size_t a = 0; a < d; ++a) {
      double v = spec.mean[a];
      for (std::size_t b = 0; b <= a; ++b) v += L(a, b) * z[b];
      out(i, a) = v;
    }
  }
  return out;
}

Matrix sample_cauchy(const CauchySpec& spec, std::size_t n, RandomStream& stream) {
  const std::size_t d = spec.loc.size();
  const Matrix L = lp::cholesky_lower(spec.scatter);
  Matrix out(n, d);
  std::vector<double> z(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : z) v = stream.normal();
    double w = stream.normal();
    if (w == 0.0) w = 1e-300;
    const double inv = 1.0 / std::abs(w);
    for (std::size_t a = 0; a < d; ++a) {
      double v = 0.0;
      for (std::size_t b = 0; b <= a; ++b) v += L(a, b) * z[b];
      out(i, a) = spec.loc[a] + v * inv;
    }
  }
  return out;
}

Matrix sample_exp(const ExpPairSpec& spec, std::size_t n, RandomStream& stream) {
  const std::size_t d = spec.rates.size();
  Matrix out(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < d; ++a)
      out(i, a) = spec.shifts[a] + stream.exponential(spec.rates[a]);
  return out;
}

Matrix sample_mixn(const MixNSpec& spec, std::size_t n, RandomStream& stream) {
  const std::size_t d = spec.coords.size();
  Matrix out(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < d; ++a) {
      const auto& c = spec.coords[a];
      const bool left = stream.uniform01() < 0.5;
      const double z = std::abs(stream.normal());
      out(i, a) = c.mu + (left ? -c.sigma1 : c.sigma2) * z;
    }
  return out;
}

}  // namespace

Matrix sample(const DistributionSpec& spec, std::size_t n, RandomStream& stream) {
  if (n == 0) throw std::invalid_argument("sample: n must be positive");
  return std::visit(
      [&](const auto& s) -> Matrix {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, NormalSpec>) {
          return sample_normal(s, n, stream);
        } else if constexpr (std::is_same_v<T, CauchySpec>) {
          return sample_cauchy(s, n, stream);
        } else if constexpr (std::is_same_v<T, ExpPairSpec>) {
          return sample_exp(s, n, stream);
        } else if constexpr (std::is_same_v<T, MixNSpec>) {
          return sample_mixn(s, n, stream);
        } else {
          // contaminated training sample: exact counts, contaminant rows last
          const std::size_t n_cont = std::size_t(std::llround(s.rate * double(n)));
          const std::size_t n_base = n - n_cont;
          Matrix out(n, s.base.mean.size());
          if (n_base > 0) {
            const Matrix base = sample_normal(s.base, n_base, stream);
            std::copy(base.data.begin(), base.data.end(), out.data.begin());
          }
          if (n_cont > 0) {
            const Matrix cont = sample_normal(s.contaminant, n_cont, stream);
            std::copy(cont.data.begin(), cont.data.end(), out.data.begin() + long(n_base * out.cols));
          }
          return out;
        }
      },
      spec);
}

Matrix sample_testing(const DistributionSpec& spec, std::size_t n, RandomStream& stream) {
  if (const auto* cont = std::get_if<ContaminatedNormalSpec>(&spec))
    return sample_normal(cont->base, n, stream);
  return sample(spec, n, stream);
}

namespace {

Matrix cov2(double a, double b, double c, double d) { return Matrix(2, 2, {a, b, c, d}); }

const Matrix kSigma = cov2(1, 1, 1, 4);
const Matrix kSigmaWide = cov2(4, 4, 4, 16);

}  // namespace

Setting simulation_setting(int id) {
  switch (id) {
    case 1:
      return {NormalSpec{{0, 0}, kSigma}, NormalSpec{{1, 1}, kSigma}};
    case 2:
      return {NormalSpec{{0, 0}, kSigma}, NormalSpec{{1, 1}, kSigmaWide}};
    case 3:
      return {CauchySpec{{0, 0}, kSigma}, CauchySpec{{1, 1}, kSigma}};
    case 4:
      return {CauchySpec{{0, 0}, kSigma}, CauchySpec{{1, 1}, kSigmaWide}};
    case 5:
      return {ContaminatedNormalSpec{{{0, 0}, kSigma}, {{10, 10}, kSigma}, 0.1},
              NormalSpec{{1, 1}, kSigma}};
    case 6:
      return {ContaminatedNormalSpec{{{0, 0}, kSigma}, {{10, 10}, kSigma}, 0.1},
              NormalSpec{{1, 1}, kSigmaWide}};
    case 7:
      return {ExpPairSpec{{1, 1}, {0, 0}}, ExpPairSpec{{1, 1}, {1, 1}}};
    case 8:
      return {ExpPairSpec{{1, 0.5}, {0, 0}}, ExpPairSpec{{0.5, 1}, {1, 1}}};
    case 9:
      return {MixNSpec{{{0, 1, 2}, {0, 1, 4}}}, MixNSpec{{{1, 1, 2}, {1, 1, 4}}}};
    case 10:
      return {NormalSpec{{0, 0}, cov2(1, 0, 0, 1)}, ExpPairSpec{{1, 1}, {0, 0}}};
    default:
      throw std::invalid_argument("simulation_setting: id must be in 1..10");
  }
}

Setting timing_setting(int id, std::size_t d) {
  if (d == 0) throw std::invalid_argument("timing_setting: d must be positive");
  NormalSpec base;
  base.mean.assign(d, 0.0);
  base.cov = Matrix(d, d);
  for (std::size_t k = 0; k < d; ++k) base.cov(k, k) = 1.0;

  NormalSpec other = base;
  if (id == 1) {
    other.mean.assign(d, 0.25);
  } else if (id == 2) {
    other.mean.assign(d, 0.0);
    other.mean[0] = 0.25;
    for (std::size_t k = 0; k < d; ++k) other.cov(k, k) = 5.0;
  } else {
    throw std::invalid_argument("timing_setting: id must be 1 or 2");
  }
  return {std::move(base), std::move(other)};
}

AmrSample run_experiment(const Setting& setting, const ExperimentPlan& plan,
                         const classify::TrainConfig& config) {
  if (plan.n_train_per_class == 0 || plan.n_test_per_class == 0 || plan.replications <= 0)
    throw std::invalid_argument("run_experiment: invalid plan");

  AmrSample result;
  result.values.assign(std::size_t(plan.replications), 0.0);

  const int nt = parallel::max_threads();
  std::atomic<bool> failed{false};
  std::exception_ptr err;
  std::atomic<long> failed_rep{-1};
#pragma omp parallel for schedule(dynamic) num_threads(nt) if (nt > 1 && plan.replications > 1)
  for (int rep = 0; rep < plan.replications; ++rep) {
    if (failed.load(std::memory_order_relaxed)) continue;
    try {
      RandomStream stream = RandomStream::substream(plan.seed, std::uint64_t(rep));

      const Matrix train1 = sample(setting.class1, plan.n_train_per_class, stream);
      const Matrix train2 = sample(setting.class2, plan.n_train_per_class, stream);
      Matrix train_pts(2 * plan.n_train_per_class, train1.cols);
      std::copy(train1.data.begin(), train1.data.end(), train_pts.data.begin());
      std::copy(train2.data.begin(), train2.data.end(),
                train_pts.data.begin() + long(train1.data.size()));
      std::vector<int> labels(2 * plan.n_train_per_class, 0);
      std::fill(labels.begin() + long(plan.n_train_per_class), labels.end(), 1);

      classify::TrainConfig cfg = config;
      cfg.seed = plan.seed ^ (0x9E3779B97F4A7C15ULL * std::uint64_t(rep + 1));
      const auto model = classify::train(depth::LabeledDataset::make(train_pts, labels), cfg);

      const Matrix test1 = sample_testing(setting.class1, plan.n_test_per_class, stream);
      const Matrix test2 = sample_testing(setting.class2, plan.n_test_per_class, stream);
      std::size_t wrong = 0;
      for (const auto& p : classify::predict_batch(model, test1))
        if (p.label != 0) ++wrong;
      for (const auto& p : classify::predict_batch(model, test2))
        if (p.label != 1) ++wrong;
      result.values[std::size_t(rep)] = double(wrong) / double(2 * plan.n_test_per_class);
    } catch (...) {
#pragma omp critical
      if (!failed.exchange(true)) {
        err = std::current_exception();
        failed_rep.store(rep);
      }
    }
  }
  if (failed.load()) {
    try {
      std::rethrow_exception(err);
    } catch (const std::exception& e) {
      throw ReplicationFailure(int(failed_rep.load()), e.what());
    }
  }

  const auto box = eval::boxplot_stats(result.values);
  result.min = box.min;
  result.q1 = box.q1;
  result.median = box.median;
  result.q3 = box.q3;
  result.max = box.max;
  double mean = 0.0;
  for (double v : result.values) mean += v;
  mean /= double(result.values.size());
  double var = 0.0;
  for (double v : result.values) var += (v - mean) * (v - mean);
  result.mean = mean;
  result.sd = result.values.size() > 1 ? std::sqrt(var / double(result.values.size() - 1)) : 0.0;
  return result;
}

AmrSample run_experiment(const ExperimentPlan& plan, const classify::TrainConfig& config) {
  return run_experiment(simulation_setting(plan.setting_id), plan, config);
}

std::vector<TimingRow> run_timing(const std::vector<std::size_t>& dims,
                                  const std::vector<std::size_t>& sizes, int setting,
                                  int repetitions, std::uint64_t seed) {
  if (dims.empty() || sizes.empty()) throw std::invalid_argument("run_timing: empty grid");
  if (repetitions <= 0) throw std::invalid_argument("run_timing: repetitions must be positive");

  parallel::ScopedSerial serial;  // timings are single-threaded
  using clock = std::chrono::steady_clock;
  constexpr std::size_t kEvalPoints = 1250;  // per class

  std::vector<TimingRow> rows;
  std::size_t cell = 0;
  for (const std::size_t d : dims) {
    for (const std::size_t n : sizes) {
      const Setting pair = timing_setting(setting, d);
      std::vector<double> seconds(std::size_t(repetitions), 0.0);
      for (int rep = 0; rep < repetitions; ++rep) {
        RandomStream stream = RandomStream::substream(seed, cell * 1000 + std::uint64_t(rep));
        const std::size_t per_class = n / 2;
        const Matrix train1 = sample(pair.class1, per_class, stream);
        const Matrix train2 = sample(pair.class2, per_class, stream);
        Matrix train_pts(2 * per_class, d);
        std::copy(train1.data.begin(), train1.data.end(), train_pts.data.begin());
        std::copy(train2.data.begin(), train2.data.end(),
                  train_pts.data.begin() + long(train1.data.size()));
        std::vector<int> labels(2 * per_class, 0);
        std::fill(labels.begin() + long(per_class), labels.end(), 1);
        const auto ds = depth::LabeledDataset::make(std::move(train_pts), std::move(labels));
        const Matrix eval1 = sample_testing(pair.class1, kEvalPoints, stream);
        const Matrix eval2 = sample_testing(pair.class2, kEvalPoints, stream);

        classify::TrainConfig cfg;
        cfg.seed = seed + cell;
        const auto t0 = clock::now();
        const auto model = classify::train(ds, cfg);
        const auto preds1 = classify::predict_batch(model, eval1);
        const auto preds2 = classify::predict_batch(model, eval2);
        const auto t1 = clock::now();
        seconds[std::size_t(rep)] = std::chrono::duration<double>(t1 - t0).count();
      }
      TimingRow row;
      row.d = d;
      row.n = n;
      for (double s : seconds) row.mean_s += s;
      row.mean_s /= double(repetitions);
      double var = 0.0;
      for (double s : seconds) var += (s - row.mean_s) * (s - row.mean_s);
      row.sd_s = repetitions > 1 ? std::sqrt(var / double(repetitions - 1)) : 0.0;
      rows.push_back(row);
      ++cell;
    }
  }
  return rows;
}

}  // namespace ddalpha::sim
