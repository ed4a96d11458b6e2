#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "ddalpha/classifier.hpp"

namespace ddalpha::eval {

// fraction of mismatching labels
double amr(std::span<const int> predicted, std::span<const int> truth);

struct BoxplotStats {
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
};

// Quartiles by the median-of-halves convention; for odd n the median element
// belongs to neither half.
BoxplotStats boxplot_stats(std::span<const double> values);

// Stratified seeded train/test split: per_class_train holds one training
// count per class, or a single count applied to every class.
struct TrainTest {
  std::vector<std::size_t> per_class_train;
  std::uint64_t seed = 0;
};

struct KFold {
  int k = 10;
  std::uint64_t seed = 0;
};

struct LeaveOneOut {};

using SplitScheme = std::variant<TrainTest, KFold, LeaveOneOut>;

struct EvalReport {
  double amr = 0.0;
  std::vector<std::vector<std::size_t>> confusion;  // [truth][predicted]
  double outsider_rate = 0.0;                       // fraction of test points flagged outsiders
  double train_seconds = 0.0;
  double test_seconds_per_point = 0.0;
  std::size_t test_count = 0;
};

// Trains per split/fold and aggregates error, confusion, outsider rate and
// timings. A failing fold aborts with its index in the message.
EvalReport evaluate(const depth::LabeledDataset& ds, const SplitScheme& scheme,
                    const classify::TrainConfig& config);

// Human-readable block with the error, outsider and timing figures.
std::string report_summary(const EvalReport& report, const std::vector<std::string>& class_names);

// t-fold cross-validated choice of the polynomial degree / of k for the k-NN
// outsider rules; ties favor the smaller candidate.
int select_degree_cv(const depth::LabeledDataset& ds, classify::TrainConfig config,
                     std::span<const int> candidates, int folds);
int select_k_cv(const depth::LabeledDataset& ds, classify::TrainConfig config,
                std::span<const int> candidates, int folds);

}  // namespace ddalpha::eval
