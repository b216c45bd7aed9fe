#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "wctg/corpus.hpp"
#include "wctg/het_graph.hpp"
#include "wctg/models.hpp"
#include "wctg/text_stats.hpp"

namespace wctg {

struct TrainConfig {
  double lr = 0.002;
  std::size_t epochs = 200;
  std::size_t patience = 20;
  std::uint64_t seed = 0;
  std::size_t runs = 10;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t threads = 1;

  void validate() const;
};

struct AdamState {
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  std::size_t step = 0;
};

// Bias-corrected Adam. Zero-initializes `state` on first use.
void adam_step(std::span<Parameter> params, std::span<const Matrix> grads, AdamState& state,
               const TrainConfig& config);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double test_accuracy = 0.0;
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
  ModelConfig model;
  TrainConfig train;
};

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
};

std::vector<std::size_t> split_rows(const HetGraph& graph, Split split);
Evaluation evaluate(const Model& model, Split split);

// Trains one model from `train.seed`; the returned model holds the
// best-validation parameters.
TrainReport train(const HetGraph& graph, const ModelConfig& model, const TrainConfig& train,
                  std::unique_ptr<Model>* trained = nullptr);

struct Aggregate {
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
  std::vector<TrainReport> reports;
};

Aggregate aggregate(std::vector<TrainReport> reports);

// Runs seeds train.seed + i for i in [0, runs), up to train.threads at a time.
Aggregate run_many(const HetGraph& graph, const ModelConfig& model, const TrainConfig& train);

struct SweepCell {
  int n_lo = 0;
  int n_hi = 0;
  Aggregate result;
};

struct SweepGrid {
  std::vector<int> lo_values;
  std::vector<int> hi_values;
  std::vector<SweepCell> cells;  // row-major over (lo, hi) with lo <= hi

  const SweepCell* find(int lo, int hi) const;
  // Upper-triangular table of mean test accuracy in percent, one decimal.
  std::string format_table(const std::string& title) const;
};

// Rebuilds the graph for every char n-gram range lo..hi (lo <= hi) and
// trains it with run_many. `corpus` must already carry its validation split.
SweepGrid sweep_char_ngrams(const Corpus& corpus, const StatsConfig& stats,
                            const ModelConfig& model, const TrainConfig& train,
                            std::pair<int, int> lo_range, std::pair<int, int> hi_range);

// Machine-readable records, one JSON object per line.
std::string report_json(const TrainReport& report);
std::string aggregate_json(const Aggregate& agg);
std::string sweep_cell_json(const SweepCell& cell);

}  // namespace wctg
