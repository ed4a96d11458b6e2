#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ddalpha/classifier.hpp"
#include "ddalpha/evaluation.hpp"
#include "ddalpha/matrix.hpp"
#include "ddalpha/simulation.hpp"

namespace ddalpha::io {

struct Dataset {
  Matrix points;
  std::vector<int> labels;               // empty when no label column was requested
  std::vector<std::string> class_names;  // label strings by first appearance
  std::vector<std::string> raw_labels;   // per-row label strings (when requested)
  std::vector<std::string> feature_names;
};

// Rectangular UTF-8 CSV: comma separator, decimal point, first row header,
// lines starting with '#' skipped. With a non-empty label_column that column
// supplies the class labels (mapped to indices by first appearance) and every
// remaining column must parse as a number. Errors name the offending row or
// column.
Dataset read_csv(const std::string& path, const std::string& label_column);

// "# ddalpha <version> seed=<seed>" - leading comment of every CSV output
std::string comment_header(std::uint64_t seed);

void write_predictions_csv(const std::string& path, const classify::Model& model,
                           const std::vector<classify::Prediction>& preds, std::uint64_t seed);

void write_ddplot_csv(const std::string& path, const classify::Model& model,
                      const std::vector<classify::Prediction>& preds,
                      const std::vector<std::string>& row_labels, std::uint64_t seed);

void write_amr_csv(const std::string& path, int setting, const std::vector<double>& amrs,
                   std::uint64_t seed);

void write_timing_csv(const std::string& path, const std::vector<sim::TimingRow>& rows,
                      std::uint64_t seed);

// Long key/value form: scalar metrics first, then one confusion_<truth>_<pred>
// row per class pair.
void write_eval_report_csv(const std::string& path, const eval::EvalReport& report,
                           const std::vector<std::string>& class_names, std::uint64_t seed);

// Minimal q=2 scatter of the depth plot with the separator zero curve.
std::string ddplot_svg(const classify::Model& model,
                       const std::vector<classify::Prediction>& preds,
                       const std::vector<int>& labels,  // empty: color by prediction
                       const std::vector<std::pair<double, double>>& curve, std::uint64_t seed);

}  // namespace ddalpha::io
