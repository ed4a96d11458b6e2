#include "ddalpha/csv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ddalpha/errors.hpp"
#include "ddalpha/version.hpp"

namespace ddalpha::io {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      out.push_back(field);
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  out.push_back(field);
  for (auto& f : out) {
    const auto a = f.find_first_not_of(" \t\r");
    const auto b = f.find_last_not_of(" \t\r");
    f = a == std::string::npos ? std::string() : f.substr(a, b - a + 1);
  }
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Dataset read_csv(const std::string& path, const std::string& label_column) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CsvError("cannot open " + path);

  std::string line;
  std::vector<std::string> header;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    header = split_fields(line);
    break;
  }
  if (header.empty()) throw CsvError(path + ": missing header row");

  long label_idx = -1;
  if (!label_column.empty()) {
    const auto it = std::find(header.begin(), header.end(), label_column);
    if (it == header.end())
      throw CsvError(path + ": label column '" + label_column + "' not found in header");
    label_idx = it - header.begin();
  }

  Dataset ds;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (long(c) != label_idx) ds.feature_names.push_back(header[c]);
  const std::size_t d = ds.feature_names.size();
  if (d == 0) throw CsvError(path + ": no feature columns");

  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size())
      throw CsvError(path + ": row " + std::to_string(line_no) + " has " +
                     std::to_string(fields.size()) + " fields, expected " +
                     std::to_string(header.size()));
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (long(c) == label_idx) {
        if (fields[c].empty())
          throw CsvError(path + ": row " + std::to_string(line_no) + " has an empty label");
        auto it = std::find(ds.class_names.begin(), ds.class_names.end(), fields[c]);
        if (it == ds.class_names.end()) {
          ds.class_names.push_back(fields[c]);
          it = ds.class_names.end() - 1;
        }
        ds.labels.push_back(int(it - ds.class_names.begin()));
        ds.raw_labels.push_back(fields[c]);
        continue;
      }
      char* end = nullptr;
      const double v = std::strtod(fields[c].c_str(), &end);
      if (end == fields[c].c_str() || *end != '\0' || !std::isfinite(v))
        throw CsvError(path + ": row " + std::to_string(line_no) + ", column '" + header[c] +
                       "': not a finite number: '" + fields[c] + "'");
      values.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw CsvError(path + ": no data rows");
  ds.points = Matrix(rows, d, std::move(values));
  return ds;
}

std::string comment_header(std::uint64_t seed) {
  return "# ddalpha " + std::string(kToolVersion) + " seed=" + std::to_string(seed) + "\n";
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CsvError("cannot open " + path + " for writing");
  return out;
}

}  // namespace

void write_predictions_csv(const std::string& path, const classify::Model& model,
                           const std::vector<classify::Prediction>& preds, std::uint64_t seed) {
  auto out = open_out(path);
  out << comment_header(seed);
  out << "predicted";
  for (const auto& name : model.class_names) out << ",votes_" << name;
  out << ",outsider";
  for (const auto& name : model.class_names) out << ",depth_" << name;
  out << "\n";
  for (const auto& p : preds) {
    out << model.class_names[std::size_t(p.label)];
    for (int v : p.votes) out << ',' << v;
    out << ',' << (p.outsider ? 1 : 0);
    for (double v : p.depth_vector.values) out << ',' << format_double(v);
    out << "\n";
  }
}

void write_ddplot_csv(const std::string& path, const classify::Model& model,
                      const std::vector<classify::Prediction>& preds,
                      const std::vector<std::string>& row_labels, std::uint64_t seed) {
  auto out = open_out(path);
  out << comment_header(seed);
  for (const auto& name : model.class_names) out << "depth_" << name << ',';
  out << "label,outsider\n";
  for (std::size_t i = 0; i < preds.size(); ++i) {
    for (double v : preds[i].depth_vector.values) out << format_double(v) << ',';
    out << (i < row_labels.size() ? row_labels[i] : std::string());
    out << ',' << (preds[i].outsider ? 1 : 0) << "\n";
  }
}

void write_amr_csv(const std::string& path, int setting, const std::vector<double>& amrs,
                   std::uint64_t seed) {
  auto out = open_out(path);
  out << comment_header(seed);
  out << "setting,replication,amr\n";
  for (std::size_t r = 0; r < amrs.size(); ++r)
    out << setting << ',' << r << ',' << format_double(amrs[r]) << "\n";
}

void write_timing_csv(const std::string& path, const std::vector<sim::TimingRow>& rows,
                      std::uint64_t seed) {
  auto out = open_out(path);
  out << comment_header(seed);
  out << "d,n,mean_s,sd_s\n";
  for (const auto& r : rows)
    out << r.d << ',' << r.n << ',' << format_double(r.mean_s) << ',' << format_double(r.sd_s)
        << "\n";
}

void write_eval_report_csv(const std::string& path, const eval::EvalReport& report,
                           const std::vector<std::string>& class_names, std::uint64_t seed) {
  auto out = open_out(path);
  out << comment_header(seed);
  out << "metric,value\n";
  out << "amr," << format_double(report.amr) << "\n";
  out << "outsider_rate," << format_double(report.outsider_rate) << "\n";
  out << "train_seconds," << format_double(report.train_seconds) << "\n";
  out << "test_seconds_per_point," << format_double(report.test_seconds_per_point) << "\n";
  out << "test_count," << report.test_count << "\n";
  for (std::size_t a = 0; a < report.confusion.size(); ++a)
    for (std::size_t b = 0; b < report.confusion[a].size(); ++b) {
      const auto name = [&](std::size_t j) {
        return j < class_names.size() ? class_names[j] : std::to_string(j);
      };
      out << "confusion_" << name(a) << '_' << name(b) << ',' << report.confusion[a][b] << "\n";
    }
}

std::string ddplot_svg(const classify::Model& model,
                       const std::vector<classify::Prediction>& preds,
                       const std::vector<int>& labels,
                       const std::vector<std::pair<double, double>>& curve, std::uint64_t seed) {
  const int size = 560, margin = 40;
  const double span = double(size - 2 * margin);
  auto px = [&](double v) { return double(margin) + v * span; };
  auto py = [&](double v) { return double(size - margin) - v * span; };
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
      << "\">\n";
  svg << "<!-- ddalpha " << kToolVersion << " seed=" << seed << " -->\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(1) << "\" y2=\"" << py(0)
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(0) << "\" y2=\"" << py(1)
      << "\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << px(0.5) << "\" y=\"" << double(size) - 8.0
      << "\" text-anchor=\"middle\" font-size=\"13\">depth: " << model.class_names[0]
      << "</text>\n";
  svg << "<text x=\"12\" y=\"" << py(0.5)
      << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 12 " << py(0.5)
      << ")\">depth: " << model.class_names[1] << "</text>\n";

  if (!curve.empty()) {
    svg << "<polyline fill=\"none\" stroke=\"#444\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : curve) svg << px(x) << ',' << py(y) << ' ';
    svg << "\"/>\n";
  }
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto& p = preds[i];
    const double x = p.depth_vector.values[0], y = p.depth_vector.values[1];
    const int cls = i < labels.size() ? labels[i] : p.label;
    const char* color = palette[std::size_t(cls) % 8];
    if (p.outsider)
      svg << "<path d=\"M" << px(x) - 3 << ' ' << py(y) - 3 << " l6 6 m0 -6 l-6 6\" stroke=\""
          << color << "\" stroke-width=\"1.2\"/>\n";
    else
      svg << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"3\" fill=\"" << color
          << "\" fill-opacity=\"0.7\"/>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace ddalpha::io
