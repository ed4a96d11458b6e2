#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "ddalpha/alpha.hpp"
#include "ddalpha/errors.hpp"
#include "ddalpha/rng.hpp"

using namespace ddalpha;
using namespace ddalpha::alpha;

namespace {

constexpr double kPi = 3.14159265358979323846;

long binom(int n, int k) {
  long v = 1;
  for (int i = 1; i <= k; ++i) v = v * (n - k + i) / i;
  return v;
}

depth::DepthVector dv2(double a, double b) { return depth::DepthVector{{a, b}}; }

FeatureMatrix feature_matrix_from_columns(std::vector<std::vector<double>> cols,
                                          std::vector<char> labels, int q, int p) {
  FeatureMatrix fm;
  fm.monomials = basic_monomials(q, p);
  fm.columns = std::move(cols);
  fm.first_class = std::move(labels);
  fm.degree = p;
  fm.class_a = 0;
  fm.class_b = 1;
  return fm;
}

double direct_amr(std::span<const double> z1, std::span<const double> z2,
                  std::span<const char> first, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  long errs = 0;
  for (std::size_t i = 0; i < first.size(); ++i) {
    const double proj = z1[i] * c + z2[i] * s;
    if (first[i] ? proj < 0.0 : proj > 0.0) ++errs;
  }
  return double(errs) / double(first.size());
}

}  // namespace

TEST_CASE("basic_monomials: counts and ordering") {
  auto m1 = basic_monomials(2, 1);
  REQUIRE(m1.size() == 2);
  CHECK(m1[0].exponents == std::vector<int>{0, 1});
  CHECK(m1[1].exponents == std::vector<int>{1, 0});

  auto m2 = basic_monomials(2, 2);
  REQUIRE(m2.size() == 5);
  CHECK(m2[0].exponents == std::vector<int>{0, 1});
  CHECK(m2[1].exponents == std::vector<int>{1, 0});
  CHECK(m2[2].exponents == std::vector<int>{0, 2});
  CHECK(m2[3].exponents == std::vector<int>{1, 1});
  CHECK(m2[4].exponents == std::vector<int>{2, 0});

  CHECK(basic_monomials(3, 2).size() == 9);

  for (int q = 1; q <= 4; ++q)
    for (int p = 1; p <= 4; ++p)
      CHECK(long(basic_monomials(q, p).size()) == binom(p + q, q) - 1);
}

TEST_CASE("extend_features: columns hold the depth products") {
  const std::vector<depth::DepthVector> dvs = {dv2(0.6, 0.2), dv2(0.3, 0.9)};
  const std::vector<char> labels = {1, 0};
  const auto fm = extend_features(dvs, labels, 2, 0, 1);
  REQUIRE(fm.feature_count() == 5);
  REQUIRE(fm.rows() == 2);
  // graded-lex order: d1, d0, d1^2, d0*d1, d0^2
  CHECK(fm.columns[0][0] == doctest::Approx(0.2));
  CHECK(fm.columns[1][0] == doctest::Approx(0.6));
  CHECK(fm.columns[2][0] == doctest::Approx(0.04));
  CHECK(fm.columns[3][0] == doctest::Approx(0.12));
  CHECK(fm.columns[4][0] == doctest::Approx(0.36));
  for (const auto& col : fm.columns)
    for (double v : col) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
}

TEST_CASE("extend_features: feature count law across q and p") {
  RandomStream stream(23);
  for (int q = 2; q <= 4; ++q) {
    for (int p = 1; p <= 4; ++p) {
      std::vector<depth::DepthVector> dvs(6);
      std::vector<char> labels(6);
      for (std::size_t i = 0; i < dvs.size(); ++i) {
        dvs[i].values.resize(std::size_t(q));
        for (auto& v : dvs[i].values) v = stream.uniform01();
        labels[i] = i % 2 == 0;
      }
      const auto fm = extend_features(dvs, labels, p, 0, 1);
      CHECK(long(fm.feature_count()) == binom(p + q, q) - 1);
    }
  }
}

TEST_CASE("best_angle: orthogonal pair has a zero-error fourth-quadrant arc") {
  const std::vector<double> z1 = {1.0, 0.0};
  const std::vector<double> z2 = {0.0, 1.0};
  const std::vector<char> first = {1, 0};
  const auto r = best_angle(z1, z2, first);
  CHECK(r.amr == 0.0);
  CHECK(r.arc_start == doctest::Approx(3.0 * kPi / 2.0).epsilon(1e-12));
  CHECK(r.arc_end == doctest::Approx(2.0 * kPi).epsilon(1e-12));
  CHECK(r.alpha == doctest::Approx(7.0 * kPi / 4.0).epsilon(1e-12));
}

TEST_CASE("best_angle: coincident opposite-label points cannot beat one half") {
  const std::vector<double> z1 = {1.0, 1.0};
  const std::vector<double> z2 = {1.0, 1.0};
  const std::vector<char> first = {1, 0};
  const auto r = best_angle(z1, z2, first);
  CHECK(r.amr == doctest::Approx(0.5));
  CHECK(r.arc_end - r.arc_start == doctest::Approx(2.0 * kPi));
}

TEST_CASE("best_angle: opposed points and rotation of the result") {
  const std::vector<double> z1 = {1.0, -1.0};
  const std::vector<double> z2 = {0.0, 0.0};
  const std::vector<char> first = {1, 0};
  const auto r = best_angle(z1, z2, first);
  CHECK(r.amr == 0.0);
  CHECK(r.alpha == doctest::Approx(0.0).epsilon(1e-12));

  // exact quarter-turn: (x, y) -> (-y, x) shifts the minimizing arc by pi/2
  const std::vector<double> w1 = {0.0, 0.0};
  const std::vector<double> w2 = {1.0, -1.0};
  const auto rr = best_angle(w1, w2, first);
  CHECK(rr.amr == 0.0);
  CHECK(rr.alpha == doctest::Approx(kPi / 2.0).epsilon(1e-12));
}

TEST_CASE("best_angle: points at the plane origin carry no error") {
  const std::vector<double> z1 = {0.0, 1.0, 0.0};
  const std::vector<double> z2 = {0.0, 0.0, 1.0};
  const std::vector<char> first = {0, 1, 0};
  const auto r = best_angle(z1, z2, first);
  CHECK(r.amr == 0.0);

  const std::vector<double> o = {0.0, 0.0};
  const std::vector<char> lab = {1, 0};
  CHECK_THROWS_AS(best_angle(o, o, lab), DegenerateProjection);
}

TEST_CASE("best_angle: never beaten by a dense angle grid") {
  RandomStream stream(31);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = 2 + stream.below(49);
    std::vector<double> z1(m), z2(m);
    std::vector<char> first(m);
    bool both = false;
    for (std::size_t i = 0; i < m; ++i) {
      z1[i] = stream.uniform(-1.0, 1.0);
      z2[i] = stream.uniform(-1.0, 1.0);
      first[i] = stream.uniform01() < 0.5;
      if (i > 0 && first[i] != first[0]) both = true;
    }
    if (!both) first[0] = !first[0];
    const auto r = best_angle(z1, z2, first);
    // the sweep value is attained at its own alpha
    CHECK(direct_amr(z1, z2, first, r.alpha) == doctest::Approx(r.amr));
    for (int g = 0; g < 2000; ++g) {
      const double angle = 2.0 * kPi * double(g) / 2000.0;
      CHECK(r.amr <= direct_amr(z1, z2, first, angle) + 1e-15);
    }
  }
}

TEST_CASE("best_angle: rotation equivariance on generic data") {
  RandomStream stream(37);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t m = 3 + stream.below(20);
    std::vector<double> z1(m), z2(m), w1(m), w2(m);
    std::vector<char> first(m);
    const double theta = stream.uniform(0.0, 2.0 * kPi);
    const double c = std::cos(theta), s = std::sin(theta);
    for (std::size_t i = 0; i < m; ++i) {
      z1[i] = stream.uniform(-1.0, 1.0);
      z2[i] = stream.uniform(-1.0, 1.0);
      first[i] = i % 2 == 0;
      w1[i] = c * z1[i] - s * z2[i];
      w2[i] = s * z1[i] + c * z2[i];
    }
    const auto a = best_angle(z1, z2, first);
    const auto b = best_angle(w1, w2, first);
    CHECK(a.error_count == b.error_count);
    const double shifted = std::fmod(a.alpha + theta + 2.0 * kPi, 2.0 * kPi);
    const double diff = std::abs(shifted - b.alpha);
    CHECK(std::min(diff, 2.0 * kPi - diff) <= 1e-6);
  }
}

TEST_CASE("alpha_train: bisector-separable plot trains to zero error") {
  std::vector<depth::DepthVector> dvs;
  std::vector<char> labels;
  for (double base : {0.5, 0.6, 0.7, 0.8}) {
    dvs.push_back(dv2(base, base - 0.3));  // class 0 strictly below the bisector
    labels.push_back(1);
    dvs.push_back(dv2(base - 0.3, base));  // class 1 strictly above
    labels.push_back(0);
  }
  const auto fm = extend_features(dvs, labels, 2, 0, 1);
  const auto sep = alpha_train(fm);
  CHECK(sep.steps.back().amr == 0.0);
  for (std::size_t i = 0; i < dvs.size(); ++i) {
    const double score = separator_eval(sep, dvs[i]);
    const double diff = dvs[i].values[0] - dvs[i].values[1];
    CHECK(score * diff > 0.0);
    CHECK((score > 0.0) == bool(labels[i]));
  }
}

TEST_CASE("alpha_train: information-free features stop after one step") {
  std::vector<depth::DepthVector> dvs(8, dv2(0.4, 0.4));
  std::vector<char> labels = {1, 1, 1, 0, 0, 0, 0, 0};
  const auto fm = extend_features(dvs, labels, 2, 0, 1);
  const auto sep = alpha_train(fm);
  REQUIRE(sep.steps.size() == 1);
  CHECK(sep.steps[0].amr == doctest::Approx(3.0 / 8.0));
}

TEST_CASE("alpha_train: error is non-increasing and weights recompose the step log") {
  RandomStream stream(41);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t m = 12 + stream.below(30);
    std::vector<depth::DepthVector> dvs(m);
    std::vector<char> labels(m);
    for (std::size_t i = 0; i < m; ++i) {
      labels[i] = i < m / 2;
      const double dx = labels[i] ? stream.uniform(0.2, 1.0) : stream.uniform(0.0, 0.7);
      const double dy = labels[i] ? stream.uniform(0.0, 0.7) : stream.uniform(0.2, 1.0);
      dvs[i] = dv2(dx, dy);
    }
    const auto fm = extend_features(dvs, labels, 2, 0, 1);
    const auto sep = alpha_train(fm);
    REQUIRE(!sep.steps.empty());
    for (std::size_t t = 1; t < sep.steps.size(); ++t)
      CHECK(sep.steps[t].amr < sep.steps[t - 1].amr);

    // replay the synthesis from the log
    std::vector<double> weights(fm.feature_count(), 0.0);
    for (const auto& st : sep.steps) {
      const double c = std::cos(st.angle), s = std::sin(st.angle);
      if (st.feature_a >= 0) {
        weights[std::size_t(st.feature_a)] = c;
        weights[std::size_t(st.feature_b)] = s;
      } else {
        for (auto& w : weights) w *= c;
        weights[std::size_t(st.feature_b)] += s;
      }
    }
    for (std::size_t nu = 0; nu < weights.size(); ++nu)
      CHECK(sep.weights[nu] == doctest::Approx(weights[nu]).epsilon(1e-12));

    // training error of the signed rule equals the final logged rate
    long errs = 0;
    for (std::size_t i = 0; i < m; ++i) {
      const double score = separator_eval(sep, dvs[i]);
      if (labels[i] ? score < 0.0 : score > 0.0) ++errs;
    }
    CHECK(double(errs) / double(m) == doctest::Approx(sep.steps.back().amr));
  }
}

TEST_CASE("alpha_train: a walked instance synthesizing d0, d1^2, d0*d1, d0^2") {
  // engineered columns (fixed stream) whose step log picks feature 1 with 2,
  // then 3, then 4 -- the final polynomial is supported exactly on
  // {d0, d1^2, d0*d1, d0^2} while the plain d1 column is never absorbed
  RandomStream stream(116534);
  const int m = 8;
  std::vector<std::vector<double>> cols(5, std::vector<double>(m));
  for (auto& col : cols)
    for (auto& v : col) v = stream.uniform01();
  std::vector<char> labels(m);
  for (int i = 0; i < m; ++i) labels[std::size_t(i)] = i < m / 2;

  const auto fm = feature_matrix_from_columns(cols, labels, 2, 2);
  const auto sep = alpha_train(fm);
  REQUIRE(sep.steps.size() == 3);
  CHECK(sep.steps[0].feature_a == 1);
  CHECK(sep.steps[0].feature_b == 2);
  CHECK(sep.steps[1].feature_a == -1);
  CHECK(sep.steps[1].feature_b == 3);
  CHECK(sep.steps[2].feature_a == -1);
  CHECK(sep.steps[2].feature_b == 4);
  CHECK(sep.steps[2].amr == 0.0);

  CHECK(sep.weights[0] == 0.0);  // d1 never entered
  for (int nu : {1, 2, 3, 4}) CHECK(sep.weights[std::size_t(nu)] != 0.0);
}

TEST_CASE("alpha_train: admissibility guard") {
  // degree-1 pair for q=2 is always admissible
  std::vector<depth::DepthVector> dvs = {dv2(0.9, 0.1), dv2(0.1, 0.9)};
  std::vector<char> labels = {1, 0};
  const auto fm = extend_features(dvs, labels, 1, 0, 1);
  const auto sep = alpha_train(fm);
  CHECK(sep.steps[0].feature_a == 0);
  CHECK(sep.steps[0].feature_b == 1);
  CHECK(sep.steps[0].amr == 0.0);
}

TEST_CASE("alpha_train: all-degenerate planes raise NoAdmissiblePair") {
  std::vector<std::vector<double>> zero_cols(5, std::vector<double>(4, 0.0));
  const auto fm = feature_matrix_from_columns(zero_cols, {1, 1, 0, 0}, 2, 2);
  CHECK_THROWS_AS(alpha_train(fm), NoAdmissiblePair);
}

TEST_CASE("separator_eval: origin and linear rule") {
  std::vector<depth::DepthVector> dvs = {dv2(0.9, 0.1), dv2(0.1, 0.9)};
  std::vector<char> labels = {1, 0};
  const auto sep = alpha_train(extend_features(dvs, labels, 2, 0, 1));
  CHECK(separator_eval(sep, dv2(0.0, 0.0)) == 0.0);

  Separator manual;
  manual.monomials = basic_monomials(2, 1);  // {d1, d0}
  manual.weights = {-1.0, 1.0};
  manual.degree = 1;
  CHECK(separator_eval(manual, dv2(0.6, 0.2)) == doctest::Approx(0.4).epsilon(1e-12));

  // trained on bisector-separable data, a point above the bisector scores negative
  std::vector<depth::DepthVector> sepdata;
  std::vector<char> seplab;
  for (double base : {0.5, 0.7, 0.9}) {
    sepdata.push_back(dv2(base, base - 0.4));
    seplab.push_back(1);
    sepdata.push_back(dv2(base - 0.4, base));
    seplab.push_back(0);
  }
  const auto bisector = alpha_train(extend_features(sepdata, seplab, 2, 0, 1));
  CHECK(separator_eval(bisector, dv2(0.2, 0.6)) < 0.0);
}
