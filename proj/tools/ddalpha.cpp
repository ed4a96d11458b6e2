// ddalpha - depth-based nonparametric classification toolkit
//
// Subcommands: train, predict, ddplot, simulate, bench. Every command is
// deterministic given its flags (including --seed); CSV outputs start with a
// "# ddalpha <version> seed=<s>" comment line.
//
// Exit codes: 0 success, 2 input error, 3 training error, 4 experiment failure.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "ddalpha/csv.hpp"
#include "ddalpha/errors.hpp"
#include "ddalpha/evaluation.hpp"
#include "ddalpha/simulation.hpp"
#include "ddalpha/version.hpp"

namespace {

using namespace ddalpha;

constexpr int kExitInput = 2;
constexpr int kExitTraining = 3;
constexpr int kExitExperiment = 4;

depth::DepthKind parse_depth(const std::string& s) {
  if (s == "zonoid") return depth::DepthKind::Zonoid;
  if (s == "mahal") return depth::DepthKind::MahalanobisMoment;
  if (s == "mahal-mcd") return depth::DepthKind::MahalanobisMcd;
  throw CsvError("unknown depth kind: " + s);
}

classify::OutsiderRule parse_outsiders(const std::string& s, int k) {
  classify::OutsiderRule rule;
  rule.k = k;
  if (s == "random") {
    rule.kind = classify::OutsiderRule::Kind::RandomPrior;
  } else if (s == "knn-euclid") {
    rule.kind = classify::OutsiderRule::Kind::KnnEuclid;
  } else if (s == "knn-mahal-moment") {
    rule.kind = classify::OutsiderRule::Kind::KnnMahalanobis;
    rule.estimator = classify::Estimator::Moment;
  } else if (s == "knn-mahal-mcd") {
    rule.kind = classify::OutsiderRule::Kind::KnnMahalanobis;
    rule.estimator = classify::Estimator::Mcd;
  } else if (s == "depth-mahal-moment") {
    rule.kind = classify::OutsiderRule::Kind::MaxMahalanobisDepth;
    rule.estimator = classify::Estimator::Moment;
  } else if (s == "depth-mahal-mcd") {
    rule.kind = classify::OutsiderRule::Kind::MaxMahalanobisDepth;
    rule.estimator = classify::Estimator::Mcd;
  } else {
    throw CsvError("unknown outsider rule: " + s);
  }
  return rule;
}

struct TrainArgs {
  std::string data, label, out;
  std::string depth = "zonoid";
  std::string outsiders = "random";
  int degree = 2;
  int knn_k = 1;
  bool cv_degree = false;
  bool cv_k = false;
  int cv_folds = 10;
  std::uint64_t seed = 0;
};

int cmd_train(const TrainArgs& args) {
  io::Dataset csv;
  try {
    csv = io::read_csv(args.data, args.label);
  } catch (const CsvError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }

  try {
    const auto ds = depth::LabeledDataset::make(csv.points, csv.labels);
    classify::TrainConfig cfg;
    cfg.depth_kind = parse_depth(args.depth);
    cfg.degree = args.degree;
    cfg.outsiders = parse_outsiders(args.outsiders, args.knn_k);
    cfg.seed = args.seed;

    if (args.cv_degree) {
      const std::vector<int> candidates = {1, 2, 3};
      cfg.degree = eval::select_degree_cv(ds, cfg, candidates, args.cv_folds);
      std::cout << "cross-validated degree: " << cfg.degree << "\n";
    }
    if (args.cv_k) {
      const std::vector<int> candidates = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
      cfg.outsiders.k = eval::select_k_cv(ds, cfg, candidates, args.cv_folds);
      std::cout << "cross-validated k: " << cfg.outsiders.k << "\n";
    }

    auto model = classify::train(ds, cfg);
    model.class_names = csv.class_names;
    classify::save_model(model, args.out);

    for (const auto& sep : model.separators)
      std::printf("pair (%s, %s): training AMR %.6f over %zu steps\n",
                  model.class_names[std::size_t(sep.class_a)].c_str(),
                  model.class_names[std::size_t(sep.class_b)].c_str(), sep.steps.back().amr,
                  sep.steps.size());
    std::cout << "model written to " << args.out << "\n";
    return 0;
  } catch (const CsvError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "training error: " << e.what() << "\n";
    return kExitTraining;
  }
}

struct PredictArgs {
  std::string model, data, out, label;
};

int cmd_predict(const PredictArgs& args, bool ddplot, const std::string& svg_out) {
  classify::Model model;
  io::Dataset csv;
  try {
    model = classify::load_model(args.model);
    csv = io::read_csv(args.data, args.label);
    if (csv.points.cols != model.d) {
      std::cerr << "error: " << args.data << " has " << csv.points.cols
                << " feature columns, the model expects " << model.d << "\n";
      return kExitInput;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }

  try {
    const auto preds = classify::predict_batch(model, csv.points);
    if (ddplot) {
      io::write_ddplot_csv(args.out, model, preds, csv.raw_labels, model.seed);
      if (!svg_out.empty()) {
        if (model.q != 2) {
          std::cerr << "error: the SVG rendering needs exactly two classes\n";
          return kExitInput;
        }
        const auto curve = classify::separator_zero_curve(model.separator(0, 1), 512);
        std::vector<int> labels;
        for (const auto& raw : csv.raw_labels) {
          const auto it = std::find(model.class_names.begin(), model.class_names.end(), raw);
          labels.push_back(it == model.class_names.end() ? 0 : int(it - model.class_names.begin()));
        }
        std::ofstream svg(svg_out, std::ios::binary);
        if (!svg) throw CsvError("cannot open " + svg_out + " for writing");
        svg << io::ddplot_svg(model, preds, labels, curve, model.seed);
      }
    } else {
      io::write_predictions_csv(args.out, model, preds, model.seed);
    }

    if (!args.label.empty()) {
      // the label column was present: report the achieved error rate
      std::vector<int> truth, predicted;
      bool mappable = true;
      for (std::size_t i = 0; i < preds.size(); ++i) {
        const auto it =
            std::find(model.class_names.begin(), model.class_names.end(), csv.raw_labels[i]);
        if (it == model.class_names.end()) {
          mappable = false;
          break;
        }
        truth.push_back(int(it - model.class_names.begin()));
        predicted.push_back(preds[i].label);
      }
      if (mappable) std::printf("AMR %.6f on %zu rows\n", eval::amr(predicted, truth), truth.size());
    }
    std::cout << "output written to " << args.out << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitTraining;
  }
}

struct SimulateArgs {
  int setting = 1;
  int reps = 100;
  std::size_t n_train = 200;
  std::size_t n_test = 500;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_simulate(const SimulateArgs& args) {
  try {
    sim::ExperimentPlan plan;
    plan.setting_id = args.setting;
    plan.replications = args.reps;
    plan.n_train_per_class = args.n_train;
    plan.n_test_per_class = args.n_test;
    plan.seed = args.seed;
    const auto sample = sim::run_experiment(plan, {});
    io::write_amr_csv(args.out, args.setting, sample.values, args.seed);
    std::printf("setting %d, %d replications: mean %.4f sd %.4f\n", args.setting, args.reps,
                sample.mean, sample.sd);
    std::printf("boxplot min %.4f q1 %.4f median %.4f q3 %.4f max %.4f\n", sample.min, sample.q1,
                sample.median, sample.q3, sample.max);
    return 0;
  } catch (const ReplicationFailure& e) {
    std::cerr << "experiment failure: " << e.what() << "\n";
    return kExitExperiment;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "experiment failure: " << e.what() << "\n";
    return kExitExperiment;
  }
}

struct EvaluateArgs {
  std::string data, label, out;
  std::string scheme = "loo";
  std::string depth = "zonoid";
  std::string outsiders = "random";
  int degree = 2;
  int knn_k = 1;
  int folds = 10;
  std::vector<std::size_t> train_counts;
  std::uint64_t split_seed = 0;
  std::uint64_t seed = 0;
};

int cmd_evaluate(const EvaluateArgs& args) {
  io::Dataset csv;
  try {
    csv = io::read_csv(args.data, args.label);
  } catch (const CsvError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  try {
    const auto ds = depth::LabeledDataset::make(csv.points, csv.labels);
    classify::TrainConfig cfg;
    cfg.depth_kind = parse_depth(args.depth);
    cfg.degree = args.degree;
    cfg.outsiders = parse_outsiders(args.outsiders, args.knn_k);
    cfg.seed = args.seed;

    eval::SplitScheme scheme = eval::LeaveOneOut{};
    if (args.scheme == "kfold") {
      scheme = eval::KFold{args.folds, args.split_seed};
    } else if (args.scheme == "split") {
      if (args.train_counts.empty()) throw CsvError("--train is required with --scheme split");
      scheme = eval::TrainTest{args.train_counts, args.split_seed};
    } else if (args.scheme != "loo") {
      throw CsvError("unknown scheme: " + args.scheme);
    }

    const auto report = eval::evaluate(ds, scheme, cfg);
    std::cout << eval::report_summary(report, csv.class_names);
    if (!args.out.empty()) {
      io::write_eval_report_csv(args.out, report, csv.class_names, args.seed);
      std::cout << "report written to " << args.out << "\n";
    }
    return 0;
  } catch (const CsvError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "training error: " << e.what() << "\n";
    return kExitTraining;
  }
}

struct BenchArgs {
  std::vector<std::string> grid;
  int setting = 1;
  int reps = 1;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_bench(const BenchArgs& args) {
  std::vector<std::size_t> dims = {5, 10, 15, 20};
  std::vector<std::size_t> sizes = {200, 500, 1000};
  try {
    for (const auto& token : args.grid) {
      const auto eq = token.find('=');
      if (eq == std::string::npos) throw CsvError("grid token must look like d=5,10 or n=200: " + token);
      const std::string key = token.substr(0, eq);
      std::vector<std::size_t> values;
      std::stringstream ss(token.substr(eq + 1));
      std::string item;
      while (std::getline(ss, item, ',')) {
        const long v = std::stol(item);
        if (v <= 0) throw CsvError("grid values must be positive: " + token);
        values.push_back(std::size_t(v));
      }
      if (values.empty()) throw CsvError("empty grid token: " + token);
      if (key == "d")
        dims = values;
      else if (key == "n")
        sizes = values;
      else
        throw CsvError("unknown grid key '" + key + "'");
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }

  try {
    const auto rows = sim::run_timing(dims, sizes, args.setting, args.reps, args.seed);
    io::write_timing_csv(args.out, rows, args.seed);
    std::printf("%6s %6s %12s %12s\n", "d", "n", "mean_s", "sd_s");
    for (const auto& r : rows) std::printf("%6zu %6zu %12.4f %12.4f\n", r.d, r.n, r.mean_s, r.sd_s);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "experiment failure: " << e.what() << "\n";
    return kExitExperiment;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"depth-based nonparametric classification toolkit"};
  app.set_version_flag("--version", std::string(ddalpha::kToolVersion));
  app.require_subcommand(1);

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "train a classifier from a labeled CSV");
  train->add_option("--data", train_args.data, "input CSV")->required();
  train->add_option("--label", train_args.label, "name of the label column")->required();
  train->add_option("--depth", train_args.depth, "zonoid | mahal | mahal-mcd")
      ->check(CLI::IsMember({"zonoid", "mahal", "mahal-mcd"}));
  train->add_option("--degree", train_args.degree, "polynomial degree of the feature extension")
      ->check(CLI::Range(1, 10));
  train->add_flag("--cv-degree", train_args.cv_degree, "pick the degree from {1,2,3} by cross-validation");
  train->add_option("--outsiders", train_args.outsiders,
                    "random | knn-euclid | knn-mahal-moment | knn-mahal-mcd | depth-mahal-moment | "
                    "depth-mahal-mcd")
      ->check(CLI::IsMember({"random", "knn-euclid", "knn-mahal-moment", "knn-mahal-mcd",
                             "depth-mahal-moment", "depth-mahal-mcd"}));
  train->add_option("--knn-k", train_args.knn_k, "k for the k-NN outsider rules")->check(CLI::Range(1, 1000));
  train->add_flag("--cv-k", train_args.cv_k, "pick k from 1..10 by cross-validation");
  train->add_option("--cv-folds", train_args.cv_folds, "folds for the cross-validations")
      ->check(CLI::Range(2, 100));
  train->add_option("--seed", train_args.seed, "random seed");
  train->add_option("--out", train_args.out, "model file to write")->required();

  PredictArgs predict_args;
  auto* predict = app.add_subcommand("predict", "classify the rows of a CSV");
  predict->add_option("--model", predict_args.model, "trained model file")->required();
  predict->add_option("--data", predict_args.data, "input CSV")->required();
  predict->add_option("--label", predict_args.label, "label column to drop (reports the AMR)");
  predict->add_option("--out", predict_args.out, "predictions CSV to write")->required();

  PredictArgs ddplot_args;
  std::string svg_out;
  auto* ddplot = app.add_subcommand("ddplot", "emit the depth coordinates of a CSV");
  ddplot->add_option("--model", ddplot_args.model, "trained model file")->required();
  ddplot->add_option("--data", ddplot_args.data, "input CSV")->required();
  ddplot->add_option("--label", ddplot_args.label, "label column to drop / carry through");
  ddplot->add_option("--out", ddplot_args.out, "depth CSV to write")->required();
  ddplot->add_option("--svg", svg_out, "also render a scatter SVG (two classes only)");

  SimulateArgs sim_args;
  auto* simulate = app.add_subcommand("simulate", "run a simulation setting");
  simulate->add_option("--setting", sim_args.setting, "distribution setting 1..10")
      ->required()
      ->check(CLI::Range(1, 10));
  simulate->add_option("--reps", sim_args.reps, "replications")->check(CLI::Range(1, 100000));
  simulate->add_option("--train", sim_args.n_train, "training points per class");
  simulate->add_option("--test", sim_args.n_test, "test points per class");
  simulate->add_option("--seed", sim_args.seed, "random seed");
  simulate->add_option("--out", sim_args.out, "AMR CSV to write")->required();

  EvaluateArgs eval_args;
  auto* evaluate = app.add_subcommand("evaluate", "cross-validate a configuration on a labeled CSV");
  evaluate->add_option("--data", eval_args.data, "input CSV")->required();
  evaluate->add_option("--label", eval_args.label, "name of the label column")->required();
  evaluate->add_option("--scheme", eval_args.scheme, "loo | kfold | split")
      ->check(CLI::IsMember({"loo", "kfold", "split"}));
  evaluate->add_option("--folds", eval_args.folds, "fold count for kfold")->check(CLI::Range(2, 1000));
  evaluate->add_option("--train", eval_args.train_counts,
                       "training points per class for split (one value or one per class)");
  evaluate->add_option("--split-seed", eval_args.split_seed, "seed of the split shuffle");
  evaluate->add_option("--depth", eval_args.depth, "zonoid | mahal | mahal-mcd")
      ->check(CLI::IsMember({"zonoid", "mahal", "mahal-mcd"}));
  evaluate->add_option("--degree", eval_args.degree, "polynomial degree")->check(CLI::Range(1, 10));
  evaluate->add_option("--outsiders", eval_args.outsiders, "outsider treatment")
      ->check(CLI::IsMember({"random", "knn-euclid", "knn-mahal-moment", "knn-mahal-mcd",
                             "depth-mahal-moment", "depth-mahal-mcd"}));
  evaluate->add_option("--knn-k", eval_args.knn_k, "k for the k-NN outsider rules");
  evaluate->add_option("--seed", eval_args.seed, "random seed");
  evaluate->add_option("--out", eval_args.out, "report CSV to write");

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "time train+classify cycles over a (d, n) grid");
  bench->add_option("--grid", bench_args.grid, "grid overrides, e.g. --grid d=5 n=200,500")
      ->expected(-1);
  bench->add_option("--setting", bench_args.setting, "timing pair 1 or 2")->check(CLI::Range(1, 2));
  bench->add_option("--reps", bench_args.reps, "repetitions per cell")->check(CLI::Range(1, 1000));
  bench->add_option("--seed", bench_args.seed, "random seed");
  bench->add_option("--out", bench_args.out, "timing CSV to write")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  if (train->parsed()) return cmd_train(train_args);
  if (predict->parsed()) return cmd_predict(predict_args, false, "");
  if (ddplot->parsed()) return cmd_predict(ddplot_args, true, svg_out);
  if (evaluate->parsed()) return cmd_evaluate(eval_args);
  if (simulate->parsed()) return cmd_simulate(sim_args);
  if (bench->parsed()) return cmd_bench(bench_args);
  return kExitInput;
}
