#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ddalpha/alpha.hpp"
#include "ddalpha/depth.hpp"
#include "ddalpha/rng.hpp"

namespace ddalpha::classify {

enum class Estimator { Moment, Mcd };

struct OutsiderRule {
  enum class Kind { RandomPrior, KnnEuclid, KnnMahalanobis, MaxMahalanobisDepth };

  Kind kind = Kind::RandomPrior;
  int k = 1;                               // k-NN rules
  Estimator estimator = Estimator::Moment; // Mahalanobis-based rules
};

struct TrainConfig {
  depth::DepthKind depth_kind = depth::DepthKind::Zonoid;
  int degree = 2;
  OutsiderRule outsiders{};
  std::uint64_t seed = 0;
};

struct Prediction {
  int label = 0;
  std::vector<int> votes;           // per-class pairwise wins; zero for outsiders
  depth::DepthVector depth_vector;
  bool outsider = false;
};

// Trained classifier state. The training snapshot stays in the model: the
// zonoid depth and the k-NN outsider rules both need it at prediction time.
struct Model {
  int format_version = 1;
  std::uint64_t seed = 0;
  int q = 0;
  std::size_t d = 0;
  depth::DepthKind depth_kind = depth::DepthKind::Zonoid;
  int degree = 2;
  OutsiderRule outsiders{};
  std::vector<double> priors;
  std::vector<std::string> class_names;
  Matrix training_points;
  std::vector<int> training_labels;
  std::vector<alpha::Separator> separators;  // unordered pairs (j,k), j<k, lexicographic

  // estimators fitted at training time when the configuration needs them
  std::vector<depth::LocationScatter> class_moment;
  std::vector<depth::LocationScatter> class_mcd;
  std::optional<Matrix> pooled_sigma;  // k-NN Mahalanobis metric

  // caches rebuilt by finalize(); never serialized
  depth::DepthContext depth_ctx;
  std::vector<Matrix> class_moment_inv;
  std::vector<Matrix> class_mcd_inv;
  Matrix pooled_inv;

  const alpha::Separator& separator(int j, int k) const;
  void finalize();
};

// Trains the full pipeline: per-class estimators as required by the depth
// kind and outsider rule, the depth transform of every training point, and
// one separator per unordered class pair (each built on all q depth
// components, outsiders excluded). Deterministic given config.seed.
Model train(const depth::LabeledDataset& ds, const TrainConfig& config);

// Depth transform, outsider handling, pairwise votes, majority label.
// Vote ties go to the larger depth component among the tied classes, then to
// the smaller class index. The stream feeds only the RandomPrior rule.
Prediction predict(const Model& m, std::span<const double> x, RandomStream& stream);
Prediction predict(const Model& m, std::span<const double> x);

// Batch prediction; point i draws from substream(model.seed, i), so results
// do not depend on evaluation order or thread count.
std::vector<Prediction> predict_batch(const Model& m, const Matrix& points);
std::vector<Prediction> predict_batch_serial(const Model& m, const Matrix& points);

int classify_outsider(const Model& m, std::span<const double> x, RandomStream& stream);

// Zero-level curve of a q=2 separator inside [0,1]^2, sampled along `samples`
// rays from the origin; rays without a sign change contribute no point.
std::vector<std::pair<double, double>> separator_zero_curve(const alpha::Separator& s, int samples);

// Versioned UTF-8 JSON document; re-serialization is byte-exact.
std::string to_json(const Model& m);
Model from_json(const std::string& text);
void save_model(const Model& m, const std::string& path);
Model load_model(const std::string& path);

}  // namespace ddalpha::classify
