#include "ddalpha/classifier.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "ddalpha/errors.hpp"
#include "ddalpha/lp.hpp"
#include "ddalpha/parallel.hpp"
#include "ddalpha/version.hpp"

namespace ddalpha::classify {

namespace {

std::size_t pair_index(int j, int k, int q) {
  // (j,k), j < k, in lexicographic order
  return std::size_t(j) * std::size_t(q) - std::size_t(j) * std::size_t(j + 1) / 2 +
         std::size_t(k - j - 1);
}

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
    throw DegenerateData(std::string(who) + ": covariance is singular");
  }
}

Matrix pooled_moment_sigma(const depth::LabeledDataset& ds) {
  const std::size_t d = ds.dimension();
  std::vector<std::vector<double>> means(std::size_t(ds.q), std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < ds.size(); ++i)
    for (std::size_t k = 0; k < d; ++k) means[std::size_t(ds.labels[i])][k] += ds.points(i, k);
  for (int j = 0; j < ds.q; ++j)
    for (std::size_t k = 0; k < d; ++k) means[std::size_t(j)][k] /= double(ds.class_sizes[std::size_t(j)]);

  Matrix sigma(d, d);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& mu = means[std::size_t(ds.labels[i])];
    for (std::size_t a = 0; a < d; ++a) {
      const double da = ds.points(i, a) - mu[a];
      for (std::size_t b = a; b < d; ++b) sigma(a, b) += da * (ds.points(i, b) - mu[b]);
    }
  }
  const double div = double(ds.size() - std::size_t(ds.q));
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = a; b < d; ++b) {
      sigma(a, b) /= div;
      sigma(b, a) = sigma(a, b);
    }
  return sigma;
}

// Residuals of every point around its class MCD location, pooled into one
// robust scatter estimate.
Matrix pooled_mcd_sigma(const depth::LabeledDataset& ds, std::uint64_t seed) {
  const std::size_t d = ds.dimension();
  std::vector<depth::LocationScatter> per_class(std::size_t(ds.q));
  for (int j = 0; j < ds.q; ++j)
    per_class[std::size_t(j)] = depth::estimate_mcd(ds.class_points(j), seed + std::uint64_t(j));

  Matrix residuals(ds.size(), d);
  for (std::size_t i = 0; i < ds.size(); ++i)
    for (std::size_t k = 0; k < d; ++k)
      residuals(i, k) = ds.points(i, k) - per_class[std::size_t(ds.labels[i])].mu[k];
  return depth::estimate_mcd(residuals, seed + std::uint64_t(ds.q)).sigma;
}

double squared_mahalanobis(std::span<const double> x, std::span<const double> y, const Matrix& inv) {
  const std::size_t d = x.size();
  double q = 0.0;
  for (std::size_t a = 0; a < d; ++a) {
    double row = 0.0;
    for (std::size_t b = 0; b < d; ++b) row += inv(a, b) * (x[b] - y[b]);
    q += (x[a] - y[a]) * row;
  }
  return q;
}

double squared_euclid(std::span<const double> x, std::span<const double> y) {
  double q = 0.0;
  for (std::size_t a = 0; a < x.size(); ++a) q += (x[a] - y[a]) * (x[a] - y[a]);
  return q;
}

}  // namespace

const alpha::Separator& Model::separator(int j, int k) const {
  return separators[pair_index(j, k, q)];
}

void Model::finalize() {
  const auto ds = depth::LabeledDataset::make(training_points, training_labels);
  depth_ctx.kind = depth_kind;
  depth_ctx.classes.assign(std::size_t(q), {});
  for (int j = 0; j < q; ++j) {
    auto& cls = depth_ctx.classes[std::size_t(j)];
    cls.points = ds.class_points(j);
    if (depth_kind == depth::DepthKind::MahalanobisMoment) {
      cls.location_scatter = class_moment[std::size_t(j)];
      cls.sigma_inverse = ridge_inverse(cls.location_scatter.sigma, "Model::finalize");
    } else if (depth_kind == depth::DepthKind::MahalanobisMcd) {
      cls.location_scatter = class_mcd[std::size_t(j)];
      cls.sigma_inverse = ridge_inverse(cls.location_scatter.sigma, "Model::finalize");
    }
  }
  class_moment_inv.clear();
  for (const auto& ls : class_moment)
    class_moment_inv.push_back(ridge_inverse(ls.sigma, "Model::finalize"));
  class_mcd_inv.clear();
  for (const auto& ls : class_mcd) class_mcd_inv.push_back(ridge_inverse(ls.sigma, "Model::finalize"));
  if (pooled_sigma) pooled_inv = ridge_inverse(*pooled_sigma, "Model::finalize");
}

Model train(const depth::LabeledDataset& ds, const TrainConfig& config) {
  if (ds.q < 2) throw std::invalid_argument("train: need at least two classes");
  if (config.degree < 1) throw std::invalid_argument("train: degree must be >= 1");
  const std::size_t d = ds.dimension();
  for (int j = 0; j < ds.q; ++j)
    if (ds.class_sizes[std::size_t(j)] < d + 1)
      throw TooFewPoints("train: class " + std::to_string(j) + " has fewer than d+1 points");

  Model m;
  m.seed = config.seed;
  m.q = ds.q;
  m.d = d;
  m.depth_kind = config.depth_kind;
  m.degree = config.degree;
  m.outsiders = config.outsiders;
  m.training_points = ds.points;
  m.training_labels = ds.labels;
  m.priors.resize(std::size_t(ds.q));
  for (int j = 0; j < ds.q; ++j)
    m.priors[std::size_t(j)] = double(ds.class_sizes[std::size_t(j)]) / double(ds.size());
  m.class_names.resize(std::size_t(ds.q));
  for (int j = 0; j < ds.q; ++j) m.class_names[std::size_t(j)] = std::to_string(j);

  const bool wants_moment =
      config.depth_kind == depth::DepthKind::MahalanobisMoment ||
      (config.outsiders.kind == OutsiderRule::Kind::MaxMahalanobisDepth &&
       config.outsiders.estimator == Estimator::Moment);
  const bool wants_mcd =
      config.depth_kind == depth::DepthKind::MahalanobisMcd ||
      (config.outsiders.kind == OutsiderRule::Kind::MaxMahalanobisDepth &&
       config.outsiders.estimator == Estimator::Mcd);
  if (wants_moment)
    for (int j = 0; j < ds.q; ++j) m.class_moment.push_back(depth::estimate_moments(ds.class_points(j)));
  if (wants_mcd)
    for (int j = 0; j < ds.q; ++j)
      m.class_mcd.push_back(depth::estimate_mcd(ds.class_points(j), config.seed + std::uint64_t(j)));
  if (config.outsiders.kind == OutsiderRule::Kind::KnnMahalanobis)
    m.pooled_sigma = config.outsiders.estimator == Estimator::Moment
                         ? pooled_moment_sigma(ds)
                         : pooled_mcd_sigma(ds, config.seed);

  m.finalize();

  const auto depths = depth::depth_transform_batch(ds.points, m.depth_ctx);

  for (int j = 0; j < ds.q; ++j) {
    for (int k = j + 1; k < ds.q; ++k) {
      std::vector<depth::DepthVector> dvs;
      std::vector<char> first;
      for (std::size_t i = 0; i < ds.size(); ++i) {
        if (ds.labels[i] != j && ds.labels[i] != k) continue;
        if (depths[i].is_outsider()) continue;
        dvs.push_back(depths[i]);
        first.push_back(ds.labels[i] == j);
      }
      const auto fm = alpha::extend_features(dvs, first, config.degree, j, k);
      m.separators.push_back(alpha::alpha_train(fm));
    }
  }
  return m;
}

int classify_outsider(const Model& m, std::span<const double> x, RandomStream& stream) {
  switch (m.outsiders.kind) {
    case OutsiderRule::Kind::RandomPrior: {
      const double u = stream.uniform01();
      double acc = 0.0;
      for (int j = 0; j < m.q; ++j) {
        acc += m.priors[std::size_t(j)];
        if (u < acc) return j;
      }
      return m.q - 1;
    }
    case OutsiderRule::Kind::KnnEuclid:
    case OutsiderRule::Kind::KnnMahalanobis: {
      const bool mahal = m.outsiders.kind == OutsiderRule::Kind::KnnMahalanobis;
      const std::size_t n = m.training_points.rows;
      std::vector<std::pair<double, std::size_t>> dist(n);
      for (std::size_t i = 0; i < n; ++i) {
        const auto row = m.training_points.row(i);
        dist[i] = {mahal ? squared_mahalanobis(x, row, m.pooled_inv) : squared_euclid(x, row), i};
      }
      const std::size_t k = std::min<std::size_t>(std::size_t(m.outsiders.k), n);
      std::partial_sort(dist.begin(), dist.begin() + long(k), dist.end());
      std::vector<int> counts(std::size_t(m.q), 0);
      for (std::size_t i = 0; i < k; ++i) ++counts[std::size_t(m.training_labels[dist[i].second])];
      int best = 0;
      for (int j = 1; j < m.q; ++j)
        if (counts[std::size_t(j)] > counts[std::size_t(best)]) best = j;
      return best;
    }
    case OutsiderRule::Kind::MaxMahalanobisDepth: {
      const auto& estimates =
          m.outsiders.estimator == Estimator::Moment ? m.class_moment : m.class_mcd;
      const auto& inverses =
          m.outsiders.estimator == Estimator::Moment ? m.class_moment_inv : m.class_mcd_inv;
      int best = 0;
      double best_depth = -1.0;
      for (int j = 0; j < m.q; ++j) {
        const double v = depth::mahalanobis_depth(x, estimates[std::size_t(j)], inverses[std::size_t(j)]);
        if (v > best_depth) {
          best_depth = v;
          best = j;
        }
      }
      return best;
    }
  }
  return 0;
}

Prediction predict(const Model& m, std::span<const double> x, RandomStream& stream) {
  if (x.size() != m.d) throw std::invalid_argument("predict: point dimension mismatch");
  Prediction pred;
  pred.depth_vector = depth::depth_transform(x, m.depth_ctx);
  pred.votes.assign(std::size_t(m.q), 0);

  if (pred.depth_vector.is_outsider()) {
    pred.outsider = true;
    pred.label = classify_outsider(m, x, stream);
    return pred;
  }

  for (int j = 0; j < m.q; ++j) {
    for (int k = j + 1; k < m.q; ++k) {
      const double score = alpha::separator_eval(m.separator(j, k), pred.depth_vector);
      int winner;
      if (score > 0.0) {
        winner = j;
      } else if (score < 0.0) {
        winner = k;
      } else {
        // boundary scores go to the larger class, then the smaller index
        const double nj = m.priors[std::size_t(j)], nk = m.priors[std::size_t(k)];
        winner = nj > nk ? j : (nk > nj ? k : j);
      }
      ++pred.votes[std::size_t(winner)];
    }
  }

  int best = 0;
  for (int j = 1; j < m.q; ++j) {
    const auto vb = pred.votes[std::size_t(best)], vj = pred.votes[std::size_t(j)];
    if (vj > vb) {
      best = j;
    } else if (vj == vb &&
               pred.depth_vector.values[std::size_t(j)] > pred.depth_vector.values[std::size_t(best)]) {
      best = j;
    }
  }
  pred.label = best;
  return pred;
}

Prediction predict(const Model& m, std::span<const double> x) {
  RandomStream stream = RandomStream::substream(m.seed, 0);
  return predict(m, x, stream);
}

std::vector<Prediction> predict_batch_serial(const Model& m, const Matrix& points) {
  std::vector<Prediction> out(points.rows);
  for (std::size_t i = 0; i < points.rows; ++i) {
    RandomStream stream = RandomStream::substream(m.seed, i);
    out[i] = predict(m, points.row(i), stream);
  }
  return out;
}

std::vector<Prediction> predict_batch(const Model& m, const Matrix& points) {
  const int nt = parallel::max_threads();
  if (nt <= 1) return predict_batch_serial(m, points);

  std::vector<Prediction> out(points.rows);
  std::atomic<bool> failed{false};
  std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 8) num_threads(nt)
  for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(points.rows); ++i) {
    if (failed.load(std::memory_order_relaxed)) continue;
    try {
      RandomStream stream = RandomStream::substream(m.seed, std::uint64_t(i));
      out[std::size_t(i)] = predict(m, points.row(std::size_t(i)), stream);
    } catch (...) {
#pragma omp critical
      if (!failed.exchange(true)) err = std::current_exception();
    }
  }
  if (failed.load()) std::rethrow_exception(err);
  return out;
}

std::vector<std::pair<double, double>> separator_zero_curve(const alpha::Separator& s, int samples) {
  std::vector<std::pair<double, double>> curve;
  const double half_pi = 1.5707963267948966;
  auto eval = [&](double r, double theta) {
    return alpha::separator_eval(s, depth::DepthVector{{r * std::cos(theta), r * std::sin(theta)}});
  };
  for (int i = 0; i < samples; ++i) {
    const double theta = half_pi * (double(i) + 0.5) / double(samples);
    const double rmax = 1.41421356;
    double lo = 1e-6, hi = -1.0;
    double flo = eval(lo, theta);
    for (int step = 1; step <= 64; ++step) {
      const double r = rmax * double(step) / 64.0;
      const double fr = eval(r, theta);
      if ((flo < 0.0) != (fr < 0.0)) {
        hi = r;
        break;
      }
      lo = r;
      flo = fr;
    }
    if (hi < 0.0) continue;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      if ((eval(mid, theta) < 0.0) == (flo < 0.0))
        lo = mid;
      else
        hi = mid;
    }
    const double r = 0.5 * (lo + hi);
    curve.emplace_back(r * std::cos(theta), r * std::sin(theta));
  }
  return curve;
}

namespace {

using nlohmann::json;

const char* depth_kind_name(depth::DepthKind k) {
  switch (k) {
    case depth::DepthKind::Zonoid: return "zonoid";
    case depth::DepthKind::MahalanobisMoment: return "mahalanobis-moment";
    case depth::DepthKind::MahalanobisMcd: return "mahalanobis-mcd";
  }
  return "zonoid";
}

depth::DepthKind depth_kind_from(const std::string& s) {
  if (s == "zonoid") return depth::DepthKind::Zonoid;
  if (s == "mahalanobis-moment") return depth::DepthKind::MahalanobisMoment;
  if (s == "mahalanobis-mcd") return depth::DepthKind::MahalanobisMcd;
  throw std::invalid_argument("unknown depth kind: " + s);
}

const char* rule_name(OutsiderRule::Kind k) {
  switch (k) {
    case OutsiderRule::Kind::RandomPrior: return "random";
    case OutsiderRule::Kind::KnnEuclid: return "knn-euclid";
    case OutsiderRule::Kind::KnnMahalanobis: return "knn-mahalanobis";
    case OutsiderRule::Kind::MaxMahalanobisDepth: return "max-mahalanobis-depth";
  }
  return "random";
}

OutsiderRule::Kind rule_from(const std::string& s) {
  if (s == "random") return OutsiderRule::Kind::RandomPrior;
  if (s == "knn-euclid") return OutsiderRule::Kind::KnnEuclid;
  if (s == "knn-mahalanobis") return OutsiderRule::Kind::KnnMahalanobis;
  if (s == "max-mahalanobis-depth") return OutsiderRule::Kind::MaxMahalanobisDepth;
  throw std::invalid_argument("unknown outsider rule: " + s);
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows; ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols; ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.at(0).size();
  Matrix m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = rows.at(i).at(j).get<double>();
  return m;
}

json scatter_to_json(const depth::LocationScatter& ls) {
  return json{{"mu", ls.mu}, {"sigma", matrix_to_json(ls.sigma)}};
}

depth::LocationScatter scatter_from_json(const json& j) {
  depth::LocationScatter ls;
  ls.mu = j.at("mu").get<std::vector<double>>();
  ls.sigma = matrix_from_json(j.at("sigma"));
  return ls;
}

}  // namespace

std::string to_json(const Model& m) {
  json doc;
  doc["format_version"] = m.format_version;
  doc["tool_version"] = kToolVersion;
  doc["seed"] = m.seed;
  doc["q"] = m.q;
  doc["d"] = m.d;
  doc["depth_kind"] = depth_kind_name(m.depth_kind);
  doc["degree"] = m.degree;
  doc["priors"] = m.priors;
  doc["class_names"] = m.class_names;

  json monomials = json::array();
  if (!m.separators.empty())
    for (const auto& mono : m.separators.front().monomials) monomials.push_back(mono.exponents);
  doc["monomials"] = std::move(monomials);

  json seps = json::array();
  for (const auto& s : m.separators)
    seps.push_back(json{{"class_a", s.class_a}, {"class_b", s.class_b}, {"weights", s.weights}});
  doc["separators"] = std::move(seps);

  doc["outsider_rule"] =
      json{{"kind", rule_name(m.outsiders.kind)},
           {"k", m.outsiders.k},
           {"estimator", m.outsiders.estimator == Estimator::Moment ? "moment" : "mcd"}};

  doc["training"] = json{{"points", matrix_to_json(m.training_points)}, {"labels", m.training_labels}};

  json est;
  if (!m.class_moment.empty()) {
    json arr = json::array();
    for (const auto& ls : m.class_moment) arr.push_back(scatter_to_json(ls));
    est["class_moment"] = std::move(arr);
  }
  if (!m.class_mcd.empty()) {
    json arr = json::array();
    for (const auto& ls : m.class_mcd) arr.push_back(scatter_to_json(ls));
    est["class_mcd"] = std::move(arr);
  }
  if (m.pooled_sigma) est["pooled_sigma"] = matrix_to_json(*m.pooled_sigma);
  doc["estimators"] = std::move(est);

  return doc.dump(2) + "\n";
}

Model from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("model parse error: ") + e.what());
  }
  Model m;
  m.format_version = doc.at("format_version").get<int>();
  if (m.format_version != 1)
    throw std::invalid_argument("unsupported model format version " +
                                std::to_string(m.format_version));
  m.seed = doc.at("seed").get<std::uint64_t>();
  m.q = doc.at("q").get<int>();
  m.d = doc.at("d").get<std::size_t>();
  m.depth_kind = depth_kind_from(doc.at("depth_kind").get<std::string>());
  m.degree = doc.at("degree").get<int>();
  m.priors = doc.at("priors").get<std::vector<double>>();
  m.class_names = doc.at("class_names").get<std::vector<std::string>>();

  std::vector<alpha::Monomial> monomials;
  for (const auto& ex : doc.at("monomials")) monomials.push_back({ex.get<std::vector<int>>()});

  for (const auto& s : doc.at("separators")) {
    alpha::Separator sep;
    sep.class_a = s.at("class_a").get<int>();
    sep.class_b = s.at("class_b").get<int>();
    sep.weights = s.at("weights").get<std::vector<double>>();
    sep.monomials = monomials;
    sep.degree = m.degree;
    m.separators.push_back(std::move(sep));
  }

  const auto& rule = doc.at("outsider_rule");
  m.outsiders.kind = rule_from(rule.at("kind").get<std::string>());
  m.outsiders.k = rule.at("k").get<int>();
  m.outsiders.estimator =
      rule.at("estimator").get<std::string>() == "mcd" ? Estimator::Mcd : Estimator::Moment;

  m.training_points = matrix_from_json(doc.at("training").at("points"));
  m.training_labels = doc.at("training").at("labels").get<std::vector<int>>();

  const auto& est = doc.at("estimators");
  if (est.contains("class_moment"))
    for (const auto& ls : est.at("class_moment")) m.class_moment.push_back(scatter_from_json(ls));
  if (est.contains("class_mcd"))
    for (const auto& ls : est.at("class_mcd")) m.class_mcd.push_back(scatter_from_json(ls));
  if (est.contains("pooled_sigma")) m.pooled_sigma = matrix_from_json(est.at("pooled_sigma"));

  m.finalize();
  return m;
}

void save_model(const Model& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open model file for writing: " + path);
  out << to_json(m);
}

Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

}  // namespace ddalpha::classify
