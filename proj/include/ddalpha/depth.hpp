#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ddalpha/matrix.hpp"

namespace ddalpha::depth {

enum class DepthKind { Zonoid, MahalanobisMoment, MahalanobisMcd };

struct LabeledDataset {
  Matrix points;                        // n x d
  std::vector<int> labels;              // class index per row, 0..q-1
  int q = 0;
  std::vector<std::size_t> class_sizes;

  // Validates label range, requires every class 0..q-1 to be non-empty.
  static LabeledDataset make(Matrix points, std::vector<int> labels);

  std::size_t size() const { return points.rows; }
  std::size_t dimension() const { return points.cols; }
  Matrix class_points(int j) const;
};

// Per-class depth values in [0,1]. The all-zero vector marks an outsider.
struct DepthVector {
  std::vector<double> values;

  bool is_outsider() const {
    for (double v : values)
      if (v != 0.0) return false;
    return true;
  }
};

struct LocationScatter {
  std::vector<double> mu;
  Matrix sigma;
};

// Zonoid depth of x w.r.t. the rows of data: 1/(n t*) with t* the minimal
// max-weight convex representation, 0 outside the convex hull. LP round-off
// within 1e-9 of the [0,1] borders is clamped onto them.
double zonoid_depth(std::span<const double> x, const Matrix& data);

// 1 / (1 + squared Mahalanobis distance); equals 1 iff x = mu, never 0.
double mahalanobis_depth(std::span<const double> x, const LocationScatter& ls);
double mahalanobis_depth(std::span<const double> x, const LocationScatter& ls,
                         const Matrix& sigma_inverse);

// Sample mean and covariance (divisor n-1).
LocationScatter estimate_moments(const Matrix& data);

// Minimum covariance determinant location/scatter: 500 random (d+1)-subset
// starts, each refined by C-steps until the covariance determinant stops
// decreasing; the winning h-subset (h = floor((n+d+1)/2)) supplies the
// estimate and the scatter is rescaled by the chi-square consistency factor.
// Deterministic given the seed.
LocationScatter estimate_mcd(const Matrix& data, std::uint64_t seed);

// Precomputed per-class state for repeated depth transforms.
struct ClassSummary {
  Matrix points;
  LocationScatter location_scatter;  // Mahalanobis kinds only
  Matrix sigma_inverse;              // Mahalanobis kinds only
};

struct DepthContext {
  DepthKind kind = DepthKind::Zonoid;
  std::vector<ClassSummary> classes;
};

// Builds the per-class summaries. For Mahalanobis kinds a class covariance
// that fails to factor gets the ridge 1e-8*trace/d added before inversion;
// if it still fails, DegenerateData is thrown.
DepthContext make_depth_context(const LabeledDataset& ds, DepthKind kind, std::uint64_t seed);

// Component j is the depth of x w.r.t. class j's training points only.
DepthVector depth_transform(std::span<const double> x, const DepthContext& ctx);
DepthVector depth_transform(std::span<const double> x, const LabeledDataset& ds, DepthKind kind,
                            std::uint64_t seed = 0);

// OpenMP kernel over query points, and the serial reference it is tested
// against. Results are identical for any thread count.
std::vector<DepthVector> depth_transform_batch(const Matrix& points, const DepthContext& ctx);
std::vector<DepthVector> depth_transform_batch_serial(const Matrix& points, const DepthContext& ctx);

}  // namespace ddalpha::depth
