#pragma once

#include <span>
#include <vector>

#include "ddalpha/depth.hpp"

namespace ddalpha::alpha {

// Exponent tuple of a basic feature: one exponent per class depth,
// 1 <= total degree <= p.
struct Monomial {
  std::vector<int> exponents;

  int total_degree() const {
    int s = 0;
    for (int e : exponents) s += e;
    return s;
  }
  bool operator==(const Monomial&) const = default;
};

// All monomials in q depth values with total degree in [1, p], ordered by
// ascending total degree, then lexicographically on the exponent tuple.
// Their count is C(p+q, q) - 1.
std::vector<Monomial> basic_monomials(int q, int degree);

// Extended representation of the depth-transformed points for one class pair.
// Column nu holds prod_m d_m^{e_{nu,m}}; first_class tags rows belonging to
// the first class of the pair.
struct FeatureMatrix {
  std::vector<std::vector<double>> columns;  // r columns of length m
  std::vector<Monomial> monomials;
  std::vector<char> first_class;
  int degree = 0;
  int class_a = 0;
  int class_b = 0;

  std::size_t rows() const { return first_class.size(); }
  std::size_t feature_count() const { return columns.size(); }
};

// Rows with an all-zero depth vector must be excluded by the caller.
FeatureMatrix extend_features(const std::vector<depth::DepthVector>& depth_vectors,
                              const std::vector<char>& first_class, int degree, int class_a,
                              int class_b);

struct AngleResult {
  double alpha = 0.0;        // midpoint of the longest minimizing arc
  double amr = 0.0;          // error fraction on that arc
  double arc_start = 0.0;    // [0, 2pi)
  double arc_end = 0.0;      // arc_start + length, may exceed 2pi when it wraps
  std::size_t error_count = 0;
};

// Exact minimizer of the misclassification count of the origin line
// z1 cos(a) + z2 sin(a) over a in [0, 2pi): the count is piecewise constant
// with breakpoints perpendicular to each point direction, so every open arc
// is evaluated at its midpoint. Adjacent minimal arcs are merged; the longest
// merged arc wins, ties by its smallest start angle. First-class points err
// on projections < 0, second-class points on projections > 0; points at the
// plane origin never err.
AngleResult best_angle(std::span<const double> z1, std::span<const double> z2,
                       std::span<const char> first_class);

// One accepted step: feature_a == -1 stands for the synthesized feature of
// the previous step.
struct TrainStep {
  int feature_a = 0;
  int feature_b = 0;
  double angle = 0.0;
  double amr = 0.0;
};

// Polynomial separator through the origin: one weight per basic monomial.
// Positive evaluation votes for class_a, negative for class_b.
struct Separator {
  std::vector<double> weights;
  std::vector<Monomial> monomials;
  std::vector<TrainStep> steps;
  int degree = 0;
  int class_a = 0;
  int class_b = 0;
};

// Stepwise synthesis: step 1 scans all admissible basic-feature pairs (the
// summed exponents of both pair classes must be positive across the pair,
// ties by smallest total degree then smallest indices); each later step
// couples the synthesized feature with every unused basic feature and accepts
// the best pairing only while the error strictly decreases.
Separator alpha_train(const FeatureMatrix& fm);

double separator_eval(const Separator& s, const depth::DepthVector& dv);

}  // namespace ddalpha::alpha
