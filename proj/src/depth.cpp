#include "ddalpha/depth.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>

#include "ddalpha/errors.hpp"
#include "ddalpha/lp.hpp"
#include "ddalpha/parallel.hpp"
#include "ddalpha/rng.hpp"

namespace ddalpha::depth {

LabeledDataset LabeledDataset::make(Matrix points, std::vector<int> labels) {
  if (points.rows != labels.size())
    throw std::invalid_argument("LabeledDataset: label count != row count");
  if (points.rows == 0) throw std::invalid_argument("LabeledDataset: empty dataset");
  if (!points.finite()) throw std::invalid_argument("LabeledDataset: non-finite point entry");
  int q = 0;
  for (int l : labels) {
    if (l < 0) throw std::invalid_argument("LabeledDataset: negative label");
    q = std::max(q, l + 1);
  }
  std::vector<std::size_t> sizes(std::size_t(q), 0);
  for (int l : labels) ++sizes[std::size_t(l)];
  for (std::size_t j = 0; j < sizes.size(); ++j)
    if (sizes[j] == 0)
      throw std::invalid_argument("LabeledDataset: class " + std::to_string(j) + " is empty");

  LabeledDataset ds;
  ds.points = std::move(points);
  ds.labels = std::move(labels);
  ds.q = q;
  ds.class_sizes = std::move(sizes);
  return ds;
}

Matrix LabeledDataset::class_points(int j) const {
  std::vector<std::size_t> idx;
  idx.reserve(class_sizes[std::size_t(j)]);
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == j) idx.push_back(i);
  return gather_rows(points, idx);
}

double zonoid_depth(std::span<const double> x, const Matrix& data) {
  const auto r = lp::solve_min_max_weight(data, x);
  if (r.status == lp::MinMaxStatus::Infeasible) return 0.0;
  double value = 1.0 / (double(data.rows) * r.t_star);
  if (value < 0.0 && value >= -1e-9) value = 0.0;
  if (value > 1.0 && value <= 1.0 + 1e-9) value = 1.0;
  return std::clamp(value, 0.0, 1.0);
}

double mahalanobis_depth(std::span<const double> x, const LocationScatter& ls,
                         const Matrix& sigma_inverse) {
  const std::size_t d = ls.mu.size();
  if (x.size() != d) throw std::invalid_argument("mahalanobis_depth: dimension mismatch");
  std::vector<double> diff(d);
  for (std::size_t k = 0; k < d; ++k) diff[k] = x[k] - ls.mu[k];
  double q = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < d; ++j) row += sigma_inverse(i, j) * diff[j];
    q += diff[i] * row;
  }
  return 1.0 / (1.0 + q);
}

double mahalanobis_depth(std::span<const double> x, const LocationScatter& ls) {
  return mahalanobis_depth(x, ls, lp::spd_inverse(ls.sigma));
}

LocationScatter estimate_moments(const Matrix& data) {
  const std::size_t n = data.rows;
  const std::size_t d = data.cols;
  if (n < 2) throw std::invalid_argument("estimate_moments: need at least two points");

  LocationScatter ls;
  ls.mu.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < d; ++k) ls.mu[k] += data(i, k);
  for (auto& v : ls.mu) v /= double(n);

  ls.sigma = Matrix(d, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < d; ++a) {
      const double da = data(i, a) - ls.mu[a];
      for (std::size_t b = a; b < d; ++b) ls.sigma(a, b) += da * (data(i, b) - ls.mu[b]);
    }
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = a; b < d; ++b) {
      ls.sigma(a, b) /= double(n - 1);
      ls.sigma(b, a) = ls.sigma(a, b);
    }

  double scale = 0.0;
  for (std::size_t a = 0; a < d; ++a) scale = std::max(scale, std::abs(ls.sigma(a, a)));
  for (std::size_t a = 0; a < d; ++a) {
    if (ls.sigma(a, a) < -1e-10 * (1.0 + scale))
      throw DegenerateData("estimate_moments: covariance not positive semi-definite");
    if (ls.sigma(a, a) < 0.0) ls.sigma(a, a) = 0.0;
  }
  return ls;
}

namespace {

struct SubsetEstimate {
  std::vector<double> mu;
  Matrix sigma;
  double log_det = std::numeric_limits<double>::quiet_NaN();
  bool singular = false;
};

SubsetEstimate subset_estimate(const Matrix& data, const std::vector<std::size_t>& idx) {
  SubsetEstimate est;
  const Matrix sub = gather_rows(data, idx);
  const LocationScatter ls = estimate_moments(sub);
  est.mu = ls.mu;
  est.sigma = ls.sigma;
  try {
    const Matrix L = lp::cholesky_lower(est.sigma);
    est.log_det = 0.0;
    for (std::size_t k = 0; k < L.rows; ++k) est.log_det += 2.0 * std::log(L(k, k));
  } catch (const NotPositiveDefinite&) {
    est.singular = true;
    est.log_det = -std::numeric_limits<double>::infinity();
  }
  return est;
}

std::vector<double> squared_distances(const Matrix& data, const std::vector<double>& mu,
                                      const Matrix& sigma_inv) {
  std::vector<double> out(data.rows);
  const std::size_t d = data.cols;
  std::vector<double> diff(d);
  for (std::size_t i = 0; i < data.rows; ++i) {
    for (std::size_t k = 0; k < d; ++k) diff[k] = data(i, k) - mu[k];
    double q = 0.0;
    for (std::size_t a = 0; a < d; ++a) {
      double row = 0.0;
      for (std::size_t b = 0; b < d; ++b) row += sigma_inv(a, b) * diff[b];
      q += diff[a] * row;
    }
    out[i] = q;
  }
  return out;
}

std::vector<std::size_t> smallest_h(const std::vector<double>& dist, std::size_t h) {
  std::vector<std::size_t> order(dist.size());
  std::iota(order.begin(), order.end(), std::size_t(0));
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dist[a] != dist[b] ? dist[a] < dist[b] : a < b;
  });
  order.resize(h);
  std::sort(order.begin(), order.end());
  return order;
}

struct McdCandidate {
  std::vector<std::size_t> subset;
  double log_det = std::numeric_limits<double>::infinity();
  bool valid = false;
  bool singular = false;
};

// One random start refined by C-steps to convergence.
McdCandidate mcd_restart(const Matrix& data, std::size_t h, std::uint64_t seed, std::uint64_t id) {
  const std::size_t n = data.rows;
  const std::size_t d = data.cols;
  RandomStream stream = RandomStream::substream(seed, id);
  McdCandidate cand;

  // random (d+1)-subset, extended until its covariance factors
  std::vector<char> used(n, 0);
  std::vector<std::size_t> subset;
  auto add_random = [&]() {
    std::size_t pick = stream.below(n - subset.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (used[i]) continue;
      if (pick == 0) {
        used[i] = 1;
        subset.push_back(i);
        return;
      }
      --pick;
    }
  };
  for (std::size_t i = 0; i < d + 1; ++i) add_random();
  SubsetEstimate est = subset_estimate(data, subset);
  while (est.singular && subset.size() < n) {
    add_random();
    est = subset_estimate(data, subset);
  }
  if (est.singular) {
    cand.valid = true;
    cand.singular = true;
    cand.log_det = -std::numeric_limits<double>::infinity();
    return cand;
  }

  std::vector<std::size_t> current =
      smallest_h(squared_distances(data, est.mu, lp::spd_inverse(est.sigma)), h);
  double log_det = std::numeric_limits<double>::infinity();
  for (int step = 0; step < 200; ++step) {
    const SubsetEstimate e = subset_estimate(data, current);
    if (e.singular) {
      cand.subset = current;
      cand.valid = true;
      cand.singular = true;
      cand.log_det = -std::numeric_limits<double>::infinity();
      return cand;
    }
    const bool converged = std::isfinite(log_det) && log_det - e.log_det < 1e-12;
    log_det = e.log_det;
    if (converged) break;
    const auto next = smallest_h(squared_distances(data, e.mu, lp::spd_inverse(e.sigma)), h);
    if (next == current) break;
    current = next;
  }
  cand.subset = std::move(current);
  cand.log_det = log_det;
  cand.valid = true;
  return cand;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

LocationScatter estimate_mcd(const Matrix& data, std::uint64_t seed) {
  const std::size_t n = data.rows;
  const std::size_t d = data.cols;
  if (n < d + 1) throw std::invalid_argument("estimate_mcd: need at least d+1 points");
  const std::size_t h = (n + d + 1) / 2;

  constexpr int kRestarts = 500;
  std::vector<McdCandidate> candidates;
  if (h >= n) {
    // the h-subset is forced to be the whole sample
    McdCandidate all;
    all.subset.resize(n);
    std::iota(all.subset.begin(), all.subset.end(), std::size_t(0));
    const SubsetEstimate est = subset_estimate(data, all.subset);
    all.log_det = est.log_det;
    all.singular = est.singular;
    all.valid = true;
    candidates.push_back(std::move(all));
  } else {
    candidates.resize(kRestarts);
    const int nt = parallel::max_threads();
    std::atomic<bool> failed{false};
    std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 4) num_threads(nt) if (nt > 1)
    for (int r = 0; r < kRestarts; ++r) {
      if (failed.load(std::memory_order_relaxed)) continue;
      try {
        candidates[std::size_t(r)] = mcd_restart(data, h, seed, std::uint64_t(r));
      } catch (...) {
#pragma omp critical
        if (!failed.exchange(true)) err = std::current_exception();
      }
    }
    if (failed.load()) std::rethrow_exception(err);
  }

  int best = -1;
  for (int r = 0; r < int(candidates.size()); ++r) {
    if (!candidates[std::size_t(r)].valid) continue;
    if (best < 0 || candidates[std::size_t(r)].log_det < candidates[std::size_t(best)].log_det)
      best = r;
  }
  if (best < 0 || candidates[std::size_t(best)].singular)
    throw DegenerateData("estimate_mcd: best subset has singular covariance");

  const SubsetEstimate est = subset_estimate(data, candidates[std::size_t(best)].subset);
  LocationScatter ls;
  ls.mu = est.mu;
  ls.sigma = est.sigma;

  // consistency rescaling for normal data: median squared distance over the
  // chi-square median
  const auto dist = squared_distances(data, ls.mu, lp::spd_inverse(ls.sigma));
  const double med = median_of(dist);
  if (med <= 0.0) throw DegenerateData("estimate_mcd: degenerate distance distribution");
  const boost::math::chi_squared_distribution<double> chi2{double(d)};
  const double factor = med / boost::math::quantile(chi2, 0.5);
  for (auto& v : ls.sigma.data) v *= factor;
  return ls;
}

namespace {

Matrix ridge_inverse(const Matrix& sigma, const char* who) {
  try {
    return lp::spd_inverse(sigma);
  } catch (const NotPositiveDefinite&) {
  }
  const std::size_t d = sigma.rows;
  double trace = 0.0;
  for (std::size_t k = 0; k < d; ++k) trace += sigma(k, k);
  Matrix ridged = sigma;
  const double ridge = 1e-8 * trace / double(d);
  for (std::size_t k = 0; k < d; ++k) ridged(k, k) += ridge;
  try {
    return lp::spd_inverse(ridged);
  } catch (const NotPositiveDefinite&) {
    throw DegenerateData(std::string(who) + ": class covariance is singular");
  }
}

}  // namespace

DepthContext make_depth_context(const LabeledDataset& ds, DepthKind kind, std::uint64_t seed) {
  DepthContext ctx;
  ctx.kind = kind;
  ctx.classes.resize(std::size_t(ds.q));
  for (int j = 0; j < ds.q; ++j) {
    auto& cls = ctx.classes[std::size_t(j)];
    cls.points = ds.class_points(j);
    if (kind == DepthKind::Zonoid) continue;
    cls.location_scatter = kind == DepthKind::MahalanobisMoment
                               ? estimate_moments(cls.points)
                               : estimate_mcd(cls.points, seed + std::uint64_t(j));
    cls.sigma_inverse = ridge_inverse(cls.location_scatter.sigma, "make_depth_context");
  }
  return ctx;
}

DepthVector depth_transform(std::span<const double> x, const DepthContext& ctx) {
  DepthVector dv;
  dv.values.resize(ctx.classes.size());
  for (std::size_t j = 0; j < ctx.classes.size(); ++j) {
    const auto& cls = ctx.classes[j];
    dv.values[j] = ctx.kind == DepthKind::Zonoid
                       ? zonoid_depth(x, cls.points)
                       : mahalanobis_depth(x, cls.location_scatter, cls.sigma_inverse);
  }
  return dv;
}

DepthVector depth_transform(std::span<const double> x, const LabeledDataset& ds, DepthKind kind,
                            std::uint64_t seed) {
  return depth_transform(x, make_depth_context(ds, kind, seed));
}

std::vector<DepthVector> depth_transform_batch_serial(const Matrix& points, const DepthContext& ctx) {
  std::vector<DepthVector> out(points.rows);
  for (std::size_t i = 0; i < points.rows; ++i) out[i] = depth_transform(points.row(i), ctx);
  return out;
}

std::vector<DepthVector> depth_transform_batch(const Matrix& points, const DepthContext& ctx) {
  const int nt = parallel::max_threads();
  if (nt <= 1) return depth_transform_batch_serial(points, ctx);

  std::vector<DepthVector> out(points.rows);
  std::atomic<bool> failed{false};
  std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 8) num_threads(nt)
  for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(points.rows); ++i) {
    if (failed.load(std::memory_order_relaxed)) continue;
    try {
      out[std::size_t(i)] = depth_transform(points.row(std::size_t(i)), ctx);
    } catch (...) {
#pragma omp critical
      if (!failed.exchange(true)) err = std::current_exception();
    }
  }
  if (failed.load()) std::rethrow_exception(err);
  return out;
}

}  // namespace ddalpha::depth
