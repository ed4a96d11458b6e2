#include "ddalpha/alpha.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ddalpha/errors.hpp"
#include "ddalpha/parallel.hpp"

namespace ddalpha::alpha {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double ipow(double base, int exp) {
  double v = 1.0;
  for (int i = 0; i < exp; ++i) v *= base;
  return v;
}

void enumerate_exponents(int q, int remaining, std::vector<int>& current,
                         std::vector<Monomial>& out) {
  if (int(current.size()) == q) {
    out.push_back(Monomial{current});
    return;
  }
  for (int e = 0; e <= remaining; ++e) {
    current.push_back(e);
    enumerate_exponents(q, remaining - e, current, out);
    current.pop_back();
  }
}

}  // namespace

std::vector<Monomial> basic_monomials(int q, int degree) {
  if (q < 1 || degree < 1) throw std::invalid_argument("basic_monomials: q >= 1 and degree >= 1");
  std::vector<Monomial> all;
  std::vector<int> current;
  enumerate_exponents(q, degree, current, all);
  std::erase_if(all, [](const Monomial& m) { return m.total_degree() == 0; });
  std::sort(all.begin(), all.end(), [](const Monomial& a, const Monomial& b) {
    const int da = a.total_degree(), db = b.total_degree();
    if (da != db) return da < db;
    return std::lexicographical_compare(a.exponents.begin(), a.exponents.end(),
                                        b.exponents.begin(), b.exponents.end());
  });
  return all;
}

FeatureMatrix extend_features(const std::vector<depth::DepthVector>& depth_vectors,
                              const std::vector<char>& first_class, int degree, int class_a,
                              int class_b) {
  if (depth_vectors.size() != first_class.size())
    throw std::invalid_argument("extend_features: label count != point count");
  if (depth_vectors.empty()) throw std::invalid_argument("extend_features: no points");
  const int q = int(depth_vectors.front().values.size());

  FeatureMatrix fm;
  fm.monomials = basic_monomials(q, degree);
  fm.first_class = first_class;
  fm.degree = degree;
  fm.class_a = class_a;
  fm.class_b = class_b;
  fm.columns.assign(fm.monomials.size(), std::vector<double>(depth_vectors.size()));
  for (std::size_t nu = 0; nu < fm.monomials.size(); ++nu) {
    const auto& ex = fm.monomials[nu].exponents;
    auto& col = fm.columns[nu];
    for (std::size_t i = 0; i < depth_vectors.size(); ++i) {
      double v = 1.0;
      for (int m = 0; m < q; ++m) v *= ipow(depth_vectors[i].values[std::size_t(m)], ex[std::size_t(m)]);
      col[i] = v;
    }
  }
  return fm;
}

AngleResult best_angle(std::span<const double> z1, std::span<const double> z2,
                       std::span<const char> first_class) {
  const std::size_t m = first_class.size();
  if (z1.size() != m || z2.size() != m)
    throw std::invalid_argument("best_angle: column lengths differ from label count");

  // breakpoints perpendicular to each point direction, with the error-count
  // delta applied when the sweep enters the arc starting there
  std::vector<std::pair<double, int>> events;
  events.reserve(2 * m);
  auto wrap = [](double a) {
    a = std::fmod(a, kTwoPi);
    return a < 0.0 ? a + kTwoPi : a;
  };
  std::size_t at_origin = 0;
  for (std::size_t i = 0; i < m; ++i) {
    if (z1[i] == 0.0 && z2[i] == 0.0) {
      ++at_origin;
      continue;
    }
    const double phi = std::atan2(z2[i], z1[i]);
    // first class errs where the projection is negative, i.e. on
    // (phi + pi/2, phi + 3pi/2); second class errs on the complement arc
    const double start = wrap(first_class[i] ? phi + kTwoPi / 4.0 : phi - kTwoPi / 4.0);
    const double end = wrap(first_class[i] ? phi + 3.0 * kTwoPi / 4.0 : phi + kTwoPi / 4.0);
    events.emplace_back(start, +1);
    events.emplace_back(end, -1);
  }
  if (at_origin == m) throw DegenerateProjection("best_angle: all points at the plane origin");

  std::vector<double> breakpoints;
  breakpoints.reserve(events.size());
  for (const auto& e : events) breakpoints.push_back(e.first);
  std::sort(breakpoints.begin(), breakpoints.end());
  breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()), breakpoints.end());
  const std::size_t K = breakpoints.size();

  auto arc_end_angle = [&](std::size_t i) {
    return i + 1 < K ? breakpoints[i + 1] : breakpoints[0] + kTwoPi;
  };

  // direct count on the first arc, then walk the event deltas
  std::vector<long> delta(K, 0);
  for (const auto& e : events) {
    const auto it = std::lower_bound(breakpoints.begin(), breakpoints.end(), e.first);
    delta[std::size_t(it - breakpoints.begin())] += e.second;
  }
  std::vector<long> count(K, 0);
  {
    const double mid = 0.5 * (breakpoints[0] + arc_end_angle(0));
    const double c = std::cos(mid), s = std::sin(mid);
    long errs = 0;
    for (std::size_t i = 0; i < m; ++i) {
      const double proj = z1[i] * c + z2[i] * s;
      if (first_class[i] ? proj < 0.0 : proj > 0.0) ++errs;
    }
    count[0] = errs;
  }
  for (std::size_t i = 1; i < K; ++i) count[i] = count[i - 1] + delta[i];

  const long best = *std::min_element(count.begin(), count.end());

  AngleResult result;
  result.error_count = std::size_t(best);
  result.amr = double(best) / double(m);

  const bool all_minimal = std::all_of(count.begin(), count.end(), [&](long c) { return c == best; });
  if (all_minimal) {
    result.arc_start = 0.0;
    result.arc_end = kTwoPi;
    result.alpha = kTwoPi / 2.0;
    return result;
  }

  // longest circular run of minimal arcs; ties by smallest start angle
  double best_len = -1.0, best_start = 0.0;
  for (std::size_t i = 0; i < K; ++i) {
    if (count[i] != best) continue;
    const std::size_t prev = (i + K - 1) % K;
    if (count[prev] == best) continue;  // not the head of a run
    double len = 0.0;
    std::size_t j = i;
    while (count[j] == best) {
      len += arc_end_angle(j) - breakpoints[j];
      j = (j + 1) % K;
    }
    if (len > best_len + 1e-15 ||
        (std::abs(len - best_len) <= 1e-15 && breakpoints[i] < best_start)) {
      best_len = len;
      best_start = breakpoints[i];
    }
  }
  result.arc_start = best_start;
  result.arc_end = best_start + best_len;
  result.alpha = std::fmod(0.5 * (result.arc_start + result.arc_end), kTwoPi);
  return result;
}

namespace {

struct PairScan {
  bool usable = false;
  AngleResult angle;
};

PairScan scan_pair(std::span<const double> a, std::span<const double> b,
                   std::span<const char> labels) {
  PairScan scan;
  try {
    scan.angle = best_angle(a, b, labels);
    scan.usable = true;
  } catch (const DegenerateProjection&) {
  }
  return scan;
}

template <typename Fn>
void scan_pairs_concurrently(std::vector<PairScan>& out, Fn&& scan_at) {
  const int nt = parallel::max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(nt) if (nt > 1 && out.size() > 1)
  for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(out.size()); ++i)
    out[std::size_t(i)] = scan_at(std::size_t(i));
}

}  // namespace

Separator alpha_train(const FeatureMatrix& fm) {
  const std::size_t m = fm.rows();
  const std::size_t r = fm.feature_count();
  if (m == 0) throw std::invalid_argument("alpha_train: empty feature matrix");
  bool has_first = false, has_second = false;
  for (char c : fm.first_class) (c ? has_first : has_second) = true;
  if (!has_first || !has_second)
    throw std::invalid_argument("alpha_train: need points of both classes");

  const auto exp_a = [&](std::size_t nu) { return fm.monomials[nu].exponents[std::size_t(fm.class_a)]; };
  const auto exp_b = [&](std::size_t nu) { return fm.monomials[nu].exponents[std::size_t(fm.class_b)]; };

  // step 1: all admissible basic pairs; the scans share only read-only data
  // and run concurrently, the selection below stays deterministic
  struct Choice {
    std::size_t nu1 = 0, nu2 = 0;
    AngleResult angle;
    bool valid = false;
  };
  std::vector<std::pair<std::size_t, std::size_t>> admissible;
  for (std::size_t nu1 = 0; nu1 < r; ++nu1)
    for (std::size_t nu2 = nu1 + 1; nu2 < r; ++nu2)
      if (exp_a(nu1) + exp_a(nu2) > 0 && exp_b(nu1) + exp_b(nu2) > 0)
        admissible.emplace_back(nu1, nu2);
  if (admissible.empty())
    throw NoAdmissiblePair("alpha_train: every feature pair relates to one class only");

  std::vector<PairScan> scans(admissible.size());
  scan_pairs_concurrently(scans, [&](std::size_t i) {
    return scan_pair(fm.columns[admissible[i].first], fm.columns[admissible[i].second],
                     fm.first_class);
  });

  Choice step1;
  for (std::size_t i = 0; i < admissible.size(); ++i) {
    if (!scans[i].usable) continue;
    const auto [nu1, nu2] = admissible[i];
    bool better = false;
    if (!step1.valid) {
      better = true;
    } else if (scans[i].angle.error_count != step1.angle.error_count) {
      better = scans[i].angle.error_count < step1.angle.error_count;
    } else {
      const int deg_new = fm.monomials[nu1].total_degree() + fm.monomials[nu2].total_degree();
      const int deg_old =
          fm.monomials[step1.nu1].total_degree() + fm.monomials[step1.nu2].total_degree();
      if (deg_new != deg_old)
        better = deg_new < deg_old;
      else
        better = std::pair(nu1, nu2) < std::pair(step1.nu1, step1.nu2);
    }
    if (better) step1 = {nu1, nu2, scans[i].angle, true};
  }
  if (!step1.valid)
    throw NoAdmissiblePair("alpha_train: no admissible pair spans a usable plane");

  Separator sep;
  sep.monomials = fm.monomials;
  sep.degree = fm.degree;
  sep.class_a = fm.class_a;
  sep.class_b = fm.class_b;
  sep.weights.assign(r, 0.0);

  std::vector<char> used(r, 0);
  std::vector<double> synth(m);
  {
    const double c = std::cos(step1.angle.alpha), s = std::sin(step1.angle.alpha);
    for (std::size_t i = 0; i < m; ++i)
      synth[i] = fm.columns[step1.nu1][i] * c + fm.columns[step1.nu2][i] * s;
    sep.weights[step1.nu1] = c;
    sep.weights[step1.nu2] = s;
    used[step1.nu1] = used[step1.nu2] = 1;
    sep.steps.push_back({int(step1.nu1), int(step1.nu2), step1.angle.alpha, step1.angle.amr});
  }

  std::size_t current_errors = step1.angle.error_count;
  while (current_errors > 0) {
    std::vector<std::size_t> unused;
    for (std::size_t nu = 0; nu < r; ++nu)
      if (!used[nu]) unused.push_back(nu);
    if (unused.empty()) break;  // all basic features replaced

    std::vector<PairScan> step_scans(unused.size());
    scan_pairs_concurrently(step_scans, [&](std::size_t i) {
      return scan_pair(synth, fm.columns[unused[i]], fm.first_class);
    });

    Choice next;
    for (std::size_t i = 0; i < unused.size(); ++i) {
      if (!step_scans[i].usable) continue;
      const std::size_t nu = unused[i];
      bool better = false;
      if (!next.valid) {
        better = true;
      } else if (step_scans[i].angle.error_count != next.angle.error_count) {
        better = step_scans[i].angle.error_count < next.angle.error_count;
      } else {
        const int deg_new = fm.monomials[nu].total_degree();
        const int deg_old = fm.monomials[next.nu2].total_degree();
        better = deg_new != deg_old ? deg_new < deg_old : nu < next.nu2;
      }
      if (better) next = {0, nu, step_scans[i].angle, true};
    }
    if (!next.valid) break;
    if (next.angle.error_count >= current_errors) break;  // no additional discriminating power

    const double c = std::cos(next.angle.alpha), s = std::sin(next.angle.alpha);
    for (std::size_t i = 0; i < m; ++i) synth[i] = synth[i] * c + fm.columns[next.nu2][i] * s;
    for (auto& w : sep.weights) w *= c;
    sep.weights[next.nu2] += s;
    used[next.nu2] = 1;
    sep.steps.push_back({-1, int(next.nu2), next.angle.alpha, next.angle.amr});
    current_errors = next.angle.error_count;
  }
  return sep;
}

double separator_eval(const Separator& s, const depth::DepthVector& dv) {
  if (!s.monomials.empty() && dv.values.size() != s.monomials.front().exponents.size())
    throw std::invalid_argument("separator_eval: depth vector dimension mismatch");
  double value = 0.0;
  for (std::size_t nu = 0; nu < s.weights.size(); ++nu) {
    if (s.weights[nu] == 0.0) continue;
    double term = s.weights[nu];
    const auto& ex = s.monomials[nu].exponents;
    for (std::size_t m = 0; m < ex.size(); ++m) term *= ipow(dv.values[m], ex[m]);
    value += term;
  }
  return value;
}

}  // namespace ddalpha::alpha
