#include <cmath>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "wctg/errors.hpp"
#include "wctg/trainer.hpp"

#include "json.hpp"

using namespace wctg;

namespace {

Corpus toy_corpus() {
  PreprocessConfig pre;
  pre.min_df = 1;
  auto c = fixtures::corpus_from_tsv(fixtures::separable_tsv(), pre);
  return assign_validation(c, 0.15, 0);
}

HetGraph toy_corpus_graph(const Corpus& c) {
  return build_graph(c, compute_stats(c, StatsConfig{}));
}

ModelConfig gcn_config() {
  ModelConfig m;
  m.hidden_dim = 16;
  return m;
}

Parameter scalar_param(double v) {
  Parameter p;
  p.name = "x";
  p.value = Matrix::from_rows({{v}});
  return p;
}

}  // namespace

TEST_CASE("train config validation") {
  TrainConfig t;
  CHECK_NOTHROW(t.validate());
  t.lr = 0;
  CHECK_THROWS(t.validate());
  t = {};
  t.epochs = 0;
  CHECK_THROWS(t.validate());
  t = {};
  t.patience = 0;
  CHECK_THROWS(t.validate());
  t = {};
  t.runs = 0;
  CHECK_THROWS(t.validate());
}

TEST_CASE("adam") {
  TrainConfig cfg;
  cfg.lr = 0.01;
  SUBCASE("zero gradient leaves parameters unchanged") {
    std::vector<Parameter> params = {scalar_param(1.5)};
    const std::vector<Matrix> grads = {Matrix(1, 1)};
    AdamState state;
    adam_step(params, grads, state, cfg);
    adam_step(params, grads, state, cfg);
    CHECK(params[0].value(0, 0) == 1.5);
    CHECK(state.step == 2);
  }
  SUBCASE("single step matches the bias-corrected update") {
    for (double g : {0.3, -2.0, 1e-5}) {
      std::vector<Parameter> params = {scalar_param(1.0)};
      const std::vector<Matrix> grads = {Matrix::from_rows({{g}})};
      AdamState state;
      adam_step(params, grads, state, cfg);
      const double m_hat = (1 - cfg.beta1) * g / (1 - cfg.beta1);
      const double v_hat = (1 - cfg.beta2) * g * g / (1 - cfg.beta2);
      const double expected = 1.0 - cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
      CHECK(std::abs(params[0].value(0, 0) - expected) < 1e-12);
    }
  }
  SUBCASE("constant gradient steps approach lr * sign(g)") {
    for (double g : {0.7, -3.0}) {
      std::vector<Parameter> params = {scalar_param(0.0)};
      const std::vector<Matrix> grads = {Matrix::from_rows({{g}})};
      AdamState state;
      double prev = 0.0;
      double step = 0.0;
      for (int i = 0; i < 200; ++i) {
        adam_step(params, grads, state, cfg);
        step = params[0].value(0, 0) - prev;
        prev = params[0].value(0, 0);
      }
      CHECK(std::abs(step + cfg.lr * (g > 0 ? 1 : -1)) < 1e-8);
    }
  }
  SUBCASE("non-finite gradient aborts") {
    std::vector<Parameter> params = {scalar_param(0.0)};
    const std::vector<Matrix> grads = {Matrix::from_rows({{std::nan("")}})};
    AdamState state;
    CHECK_THROWS_AS(adam_step(params, grads, state, cfg), NumericError);
  }
  SUBCASE("shape mismatch") {
    std::vector<Parameter> params = {scalar_param(0.0)};
    const std::vector<Matrix> grads = {Matrix(2, 1)};
    AdamState state;
    CHECK_THROWS(adam_step(params, grads, state, cfg));
  }
}

TEST_CASE("early stopping with patience 1") {
  // The validation document shares its only word with a train document of the other class.
  HetGraph g;
  g.keys[0] = {"d0", "d1", "d2", "d3"};
  g.keys[1] = {"w0", "w1"};
  g.class_names = {"a", "b"};
  g.labels = {0, 1, 1, 1};
  g.splits = {Split::train, Split::train, Split::val, Split::test};
  g.edges_of(EdgeType::dw) = {{0, 0, 1.0}, {1, 1, 1.0}, {2, 0, 1.0}, {3, 1, 1.0}};
  g.validate();
  auto m = gcn_config();
  m.dropout = 0.0;
  TrainConfig t;
  t.lr = 0.05;
  t.patience = 1;
  std::unique_ptr<Model> model;
  const auto report = train(g, m, t, &model);
  REQUIRE(report.epochs.size() == 2);
  CHECK(report.epochs[1].val_accuracy <= report.epochs[0].val_accuracy);
  CHECK(report.epochs[1].val_loss > report.epochs[0].val_loss);
  CHECK(report.best_epoch == 1);
  // the returned parameters are those of epoch 1
  CHECK(evaluate(*model, Split::val).loss == report.epochs[0].val_loss);
}

TEST_CASE("empty splits are rejected") {
  auto g = fixtures::toy_graph();
  g.splits = {Split::train, Split::train, Split::test, Split::test};
  CHECK_THROWS_AS(train(g, gcn_config(), TrainConfig{}), DataError);
}

TEST_CASE("toy corpus training") {
  const auto corpus = toy_corpus();
  CHECK(corpus.count(Split::val) == 2);
  const auto g = toy_corpus_graph(corpus);

  SUBCASE("reaches perfect test accuracy and is deterministic") {
    TrainConfig t;
    t.lr = 0.02;
    for (auto kind : {ModelKind::wctext_gcn, ModelKind::wctext_gat}) {
      auto m = gcn_config();
      m.model = kind;
      m.heads = 2;
      m.head_dim = 4;
      m.edge_dim = 4;
      const auto a = train(g, m, t);
      const auto b = train(g, m, t);
      CHECK(a.test_accuracy == 1.0);
      CHECK(a.best_epoch <= a.epochs.size());
      REQUIRE(a.epochs.size() == b.epochs.size());
      for (std::size_t i = 0; i < a.epochs.size(); ++i) {
        CHECK(a.epochs[i].train_loss == b.epochs[i].train_loss);
        CHECK(a.epochs[i].val_loss == b.epochs[i].val_loss);
      }
      CHECK(a.test_accuracy == b.test_accuracy);
    }
  }
  SUBCASE("train loss is monotone early on without dropout") {
    auto m = gcn_config();
    m.dropout = 0.0;
    TrainConfig t;
    t.epochs = 10;
    t.patience = 10;
    const auto r = train(g, m, t);
    REQUIRE(r.epochs.size() == 10);
    for (std::size_t i = 1; i < 10; ++i) CHECK(r.epochs[i].train_loss <= r.epochs[i - 1].train_loss);
    for (const auto& e : r.epochs) CHECK(std::isfinite(e.train_loss));
  }
  SUBCASE("run_many") {
    TrainConfig t;
    t.epochs = 30;
    t.runs = 3;
    const auto serial = run_many(g, gcn_config(), t);
    t.threads = 3;
    const auto parallel = run_many(g, gcn_config(), t);
    REQUIRE(serial.reports.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(serial.reports[i].seed == i);
      CHECK(parallel.reports[i].test_accuracy == serial.reports[i].test_accuracy);
      CHECK(parallel.reports[i].epochs.back().train_loss == serial.reports[i].epochs.back().train_loss);
    }
    CHECK(parallel.mean == serial.mean);
    t.runs = 1;
    CHECK(run_many(g, gcn_config(), t).stddev == 0.0);
  }
}

TEST_CASE("aggregate uses the population standard deviation") {
  std::vector<TrainReport> reports(2);
  reports[0].test_accuracy = 0.96;
  reports[1].test_accuracy = 0.98;
  const auto agg = aggregate(reports);
  CHECK(agg.mean == doctest::Approx(0.97).epsilon(1e-12));
  CHECK(agg.stddev == doctest::Approx(0.01).epsilon(1e-9));
  reports[1].test_accuracy = 0.96;
  CHECK(aggregate(reports).stddev == 0.0);
}

TEST_CASE("char n-gram sweep") {
  const auto corpus = toy_corpus();
  StatsConfig stats;
  ModelConfig m = gcn_config();
  TrainConfig t;
  t.epochs = 15;
  t.runs = 2;
  t.threads = 2;
  const auto grid = sweep_char_ngrams(corpus, stats, m, t, {3, 6}, {3, 6});
  CHECK(grid.cells.size() == 10);
  for (const auto& c : grid.cells) CHECK(c.n_lo <= c.n_hi);
  CHECK(grid.find(4, 3) == nullptr);
  REQUIRE(grid.find(3, 3) != nullptr);

  StatsConfig single = stats;
  single.char_ngrams = NgramSpec{NgramKind::character, 3, 3, stats.char_ngrams->min_freq};
  const auto direct = run_many(build_graph(corpus, compute_stats(corpus, single)), m, t);
  CHECK(grid.find(3, 3)->result.mean == direct.mean);
  for (std::size_t i = 0; i < direct.reports.size(); ++i)
    CHECK(grid.find(3, 3)->result.reports[i].test_accuracy == direct.reports[i].test_accuracy);

  const auto table = grid.format_table("toy");
  std::istringstream lines(table);
  std::vector<std::string> rows;
  for (std::string line; std::getline(lines, line);) rows.push_back(line);
  REQUIRE(rows.size() == 5);
  CHECK(rows[0] == "toy        3     4     5     6");
  CHECK(rows[1].rfind("3 ", 0) == 0);
  CHECK(rows[4].rfind("6                     ", 0) == 0);
  CHECK(rows[4].size() == 30);
  char expected[16];
  std::snprintf(expected, sizeof expected, "%6.1f", 100.0 * grid.find(6, 6)->result.mean);
  CHECK(rows[4].substr(24) == expected);

  const auto record = nlohmann::json::parse(sweep_cell_json(grid.cells[0]));
  CHECK(record["record"] == "sweep_cell");
  CHECK(record["n_lo"] == 3);
}

TEST_CASE("json records") {
  TrainReport r;
  r.test_accuracy = 0.5;
  r.seed = 4;
  r.epochs.push_back({1, 0.7, 0.6, 0.5});
  const auto j = nlohmann::json::parse(report_json(r));
  CHECK(j["record"] == "train_report");
  CHECK(j["seed"] == 4);
  CHECK(j["test_accuracy"] == 0.5);
  const auto a = nlohmann::json::parse(aggregate_json(aggregate({r})));
  CHECK(a["record"] == "aggregate");
  CHECK(a["runs"] == 1);
}
