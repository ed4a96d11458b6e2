#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "ddalpha/classifier.hpp"
#include "ddalpha/matrix.hpp"
#include "ddalpha/rng.hpp"

namespace ddalpha::sim {

struct NormalSpec {
  std::vector<double> mean;
  Matrix cov;
};

// Elliptical Cauchy sampled as loc + L z / |w| with z standard normal and w
// an independent standard normal scalar.
struct CauchySpec {
  std::vector<double> loc;
  Matrix scatter;
};

// Independent shifted exponentials per coordinate.
struct ExpPairSpec {
  std::vector<double> rates;
  std::vector<double> shifts;
};

// Per coordinate: -sigma1*|N(0,1)| + mu with probability 1/2, else
// sigma2*|N(0,1)| + mu.
struct MixNCoord {
  double mu = 0, sigma1 = 1, sigma2 = 1;
};
struct MixNSpec {
  std::vector<MixNCoord> coords;
};

// Training draws mix in round(rate*n) contaminant rows (placed last); test
// draws come from the clean base only.
struct ContaminatedNormalSpec {
  NormalSpec base;
  NormalSpec contaminant;
  double rate = 0.1;
};

using DistributionSpec =
    std::variant<NormalSpec, CauchySpec, ExpPairSpec, MixNSpec, ContaminatedNormalSpec>;

Matrix sample(const DistributionSpec& spec, std::size_t n, RandomStream& stream);
Matrix sample_testing(const DistributionSpec& spec, std::size_t n, RandomStream& stream);

struct Setting {
  DistributionSpec class1, class2;
};

// The ten two-class simulation settings of the study.
Setting simulation_setting(int id);

// The two d-variate normal pairs used by the timing grid: 1 shifts every
// coordinate by 0.25, 2 shifts the first coordinate and scales the second
// class covariance by 5.
Setting timing_setting(int id, std::size_t d);

struct ExperimentPlan {
  int setting_id = 1;
  std::size_t n_train_per_class = 200;
  std::size_t n_test_per_class = 500;
  int replications = 100;
  std::uint64_t seed = 0;
};

struct AmrSample {
  std::vector<double> values;  // one AMR per replication
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0, mean = 0, sd = 0;
};

// Replication r trains on fresh draws and scores fresh test draws, all from
// substream(seed, r); replications are independent of execution order and may
// run concurrently. A failing replication aborts with its index.
AmrSample run_experiment(const ExperimentPlan& plan, const classify::TrainConfig& config);
AmrSample run_experiment(const Setting& setting, const ExperimentPlan& plan,
                         const classify::TrainConfig& config);

struct TimingRow {
  std::size_t d = 0;
  std::size_t n = 0;  // total training size, n/2 per class
  double mean_s = 0;
  double sd_s = 0;
};

// Wall-clock seconds of one train-plus-classify cycle (2500 evaluation
// points) per grid cell, averaged over repetitions. Runs single-threaded.
std::vector<TimingRow> run_timing(const std::vector<std::size_t>& dims,
                                  const std::vector<std::size_t>& sizes, int setting,
                                  int repetitions, std::uint64_t seed);

}  // namespace ddalpha::sim
