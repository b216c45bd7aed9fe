#include "wctg/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "wctg/errors.hpp"

namespace wctg {

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw std::invalid_argument("lr must be > 0");
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (patience < 1) throw std::invalid_argument("patience must be >= 1");
  if (runs < 1) throw std::invalid_argument("runs must be >= 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0))
    throw std::invalid_argument("Adam betas must be in [0, 1)");
  if (!(eps > 0.0)) throw std::invalid_argument("Adam eps must be > 0");
}

void adam_step(std::span<Parameter> params, std::span<const Matrix> grads, AdamState& state,
               const TrainConfig& config) {
  if (params.size() != grads.size()) throw ShapeError("adam_step: parameter/gradient count mismatch");
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.emplace_back(p.value.rows(), p.value.cols());
      state.v.emplace_back(p.value.rows(), p.value.cols());
    }
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].rows() != params[i].value.rows() || grads[i].cols() != params[i].value.cols())
      throw ShapeError("adam_step: gradient of " + params[i].name + " is " +
                       shape_string(grads[i]) + ", parameter is " + shape_string(params[i].value));
    if (!all_finite(grads[i])) throw NumericError("non-finite gradient for " + params[i].name);
  }

  ++state.step;
  const double b1 = config.beta1, b2 = config.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& w = params[i].value.values();
    auto& m = state.m[i].values();
    auto& v = state.v[i].values();
    const auto& g = grads[i].values();
    for (std::size_t j = 0; j < w.size(); ++j) {
      m[j] = b1 * m[j] + (1.0 - b1) * g[j];
      v[j] = b2 * v[j] + (1.0 - b2) * g[j] * g[j];
      w[j] -= config.lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + config.eps);
    }
  }
}

std::vector<std::size_t> split_rows(const HetGraph& graph, Split split) {
  std::vector<std::size_t> rows;
  for (std::size_t d = 0; d < graph.splits.size(); ++d)
    if (graph.splits[d] == split) rows.push_back(d);
  return rows;
}

namespace {

Evaluation score(const Matrix& logits, const std::vector<std::size_t>& labels,
                 const std::vector<std::size_t>& rows) {
  Evaluation ev;
  if (rows.empty()) return ev;
  std::size_t correct = 0;
  for (auto r : rows) {
    auto row = logits.row(r);
    const auto best = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
    if (best == labels[r]) ++correct;
    const double mx = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (double v : row) z += std::exp(v - mx);
    ev.loss += mx + std::log(z) - row[labels[r]];
  }
  ev.loss /= static_cast<double>(rows.size());
  ev.accuracy = static_cast<double>(correct) / static_cast<double>(rows.size());
  return ev;
}

Matrix inference_logits(const Model& model) {
  ad::Tape tape;
  std::mt19937_64 unused(0);
  return model.forward(tape, false, unused).value();
}

}  // namespace

Evaluation evaluate(const Model& model, Split split) {
  return score(inference_logits(model), model.graph().labels, split_rows(model.graph(), split));
}

TrainReport train(const HetGraph& graph, const ModelConfig& model_config,
                  const TrainConfig& config, std::unique_ptr<Model>* trained) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto train_rows = split_rows(graph, Split::train);
  const auto val_rows = split_rows(graph, Split::val);
  const auto test_rows = split_rows(graph, Split::test);
  if (train_rows.empty()) throw DataError("empty train split");
  if (val_rows.empty()) throw DataError("empty validation split");
  if (test_rows.empty()) throw DataError("empty test split");

  auto model = make_model(graph, model_config, config.seed);
  auto& params = model->parameters();
  const auto& labels = model->graph().labels;
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

  TrainReport report;
  report.seed = config.seed;
  report.model = model_config;
  report.train = config;

  AdamState adam;
  std::vector<Matrix> best_values;
  double best_acc = -1.0;
  double best_loss = 0.0;
  std::size_t since_best = 0;
  std::vector<Matrix> grads(params.size());

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    {
      ad::Tape tape;
      const ad::Var logits = model->forward(tape, true, rng);
      const ad::Var loss = ad::masked_cross_entropy(logits, labels, train_rows);
      rec.train_loss = loss.value()(0, 0);
      tape.backward(loss);
      for (std::size_t i = 0; i < params.size(); ++i) grads[i] = tape.grad_of(params[i].value);
    }
    adam_step(params, grads, adam, config);

    const auto val = score(inference_logits(*model), labels, val_rows);
    rec.val_loss = val.loss;
    rec.val_accuracy = val.accuracy;
    report.epochs.push_back(rec);

    if (val.accuracy > best_acc || (val.accuracy == best_acc && val.loss < best_loss)) {
      best_acc = val.accuracy;
      best_loss = val.loss;
      report.best_epoch = epoch;
      best_values.clear();
      for (const auto& p : params) best_values.push_back(p.value);
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }

  for (std::size_t i = 0; i < params.size(); ++i) params[i].value = best_values[i];
  report.test_accuracy = score(inference_logits(*model), labels, test_rows).accuracy;
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (trained) *trained = std::move(model);
  return report;
}

Aggregate aggregate(std::vector<TrainReport> reports) {
  Aggregate agg;
  agg.reports = std::move(reports);
  if (agg.reports.empty()) return agg;
  const double n = static_cast<double>(agg.reports.size());
  for (const auto& r : agg.reports) agg.mean += r.test_accuracy;
  agg.mean /= n;
  double var = 0.0;
  for (const auto& r : agg.reports) var += (r.test_accuracy - agg.mean) * (r.test_accuracy - agg.mean);
  agg.stddev = std::sqrt(var / n);
  return agg;
}

Aggregate run_many(const HetGraph& graph, const ModelConfig& model, const TrainConfig& config) {
  config.validate();
  std::vector<TrainReport> reports(config.runs);
  std::vector<std::exception_ptr> errors(config.runs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < config.runs; i = next++) {
      TrainConfig run = config;
      run.seed = config.seed + i;
      try {
        reports[i] = train(graph, model, run);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(config.threads, 1, config.runs);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return aggregate(std::move(reports));
}

const SweepCell* SweepGrid::find(int lo, int hi) const {
  for (const auto& c : cells)
    if (c.n_lo == lo && c.n_hi == hi) return &c;
  return nullptr;
}

std::string SweepGrid::format_table(const std::string& title) const {
  char buf[32];
  std::string out;
  std::snprintf(buf, sizeof buf, "%-6s", title.c_str());
  out += buf;
  for (int hi : hi_values) {
    std::snprintf(buf, sizeof buf, "%6d", hi);
    out += buf;
  }
  out += "\n";
  for (int lo : lo_values) {
    std::snprintf(buf, sizeof buf, "%-6d", lo);
    std::string line = buf;
    for (int hi : hi_values) {
      if (const auto* c = find(lo, hi)) {
        std::snprintf(buf, sizeof buf, "%6.1f", 100.0 * c->result.mean);
        line += buf;
      } else {
        line += "      ";
      }
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  return out;
}

SweepGrid sweep_char_ngrams(const Corpus& corpus, const StatsConfig& stats,
                            const ModelConfig& model, const TrainConfig& train_config,
                            std::pair<int, int> lo_range, std::pair<int, int> hi_range) {
  SweepGrid grid;
  for (int lo = lo_range.first; lo <= lo_range.second; ++lo) grid.lo_values.push_back(lo);
  for (int hi = hi_range.first; hi <= hi_range.second; ++hi) grid.hi_values.push_back(hi);
  const auto base_spec = stats.char_ngrams.value_or(NgramSpec::char_default());
  for (int lo : grid.lo_values) {
    for (int hi : grid.hi_values) {
      if (lo > hi) continue;
      StatsConfig cell_stats = stats;
      cell_stats.char_ngrams = NgramSpec{NgramKind::character, lo, hi, base_spec.min_freq};
      const HetGraph graph = build_graph(corpus, compute_stats(corpus, cell_stats));
      grid.cells.push_back({lo, hi, run_many(graph, model, train_config)});
    }
  }
  return grid;
}

namespace {

nlohmann::json model_json(const ModelConfig& m) {
  return {{"model", std::string(to_string(m.model))},
          {"hidden_dim", m.hidden_dim},
          {"num_layers", m.num_layers},
          {"heads", m.heads},
          {"head_dim", m.head_dim},
          {"edge_dim", m.edge_dim},
          {"dropout", m.dropout},
          {"attention_dropout", m.attention_dropout},
          {"leaky_slope", m.leaky_slope},
          {"use_grams", m.ablation.use_grams},
          {"use_chargrams", m.ablation.use_chargrams},
          {"use_doc_sim", m.ablation.use_doc_sim}};
}

nlohmann::json train_json(const TrainConfig& t) {
  return {{"lr", t.lr},         {"epochs", t.epochs}, {"patience", t.patience},
          {"seed", t.seed},     {"runs", t.runs},     {"beta1", t.beta1},
          {"beta2", t.beta2},   {"eps", t.eps}};
}

nlohmann::json report_object(const TrainReport& r) {
  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& e : r.epochs)
    epochs.push_back({{"epoch", e.epoch},
                      {"train_loss", e.train_loss},
                      {"val_loss", e.val_loss},
                      {"val_accuracy", e.val_accuracy}});
  return {{"record", "train_report"},
          {"seed", r.seed},
          {"best_epoch", r.best_epoch},
          {"last_epoch", r.epochs.empty() ? 0 : r.epochs.back().epoch},
          {"test_accuracy", r.test_accuracy},
          {"wall_seconds", r.wall_seconds},
          {"model", model_json(r.model)},
          {"train", train_json(r.train)},
          {"epochs", epochs}};
}

}  // namespace

std::string report_json(const TrainReport& report) { return report_object(report).dump(); }

std::string aggregate_json(const Aggregate& agg) {
  nlohmann::json accs = nlohmann::json::array();
  for (const auto& r : agg.reports) accs.push_back(r.test_accuracy);
  return nlohmann::json{{"record", "aggregate"},
                        {"runs", agg.reports.size()},
                        {"mean", agg.mean},
                        {"std", agg.stddev},
                        {"test_accuracies", accs}}
      .dump();
}

std::string sweep_cell_json(const SweepCell& cell) {
  nlohmann::json accs = nlohmann::json::array();
  for (const auto& r : cell.result.reports) accs.push_back(r.test_accuracy);
  return nlohmann::json{{"record", "sweep_cell"},
                        {"n_lo", cell.n_lo},
                        {"n_hi", cell.n_hi},
                        {"mean", cell.result.mean},
                        {"std", cell.result.stddev},
                        {"test_accuracies", accs}}
      .dump();
}

}  // namespace wctg
