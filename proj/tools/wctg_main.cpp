// wctg: build word-character heterogeneous text graphs, train and evaluate
// WCTextGCN / WCTextGAT, sweep char n-gram ranges, inspect graphs.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "wctg/corpus.hpp"
#include "wctg/errors.hpp"
#include "wctg/het_graph.hpp"
#include "wctg/models.hpp"
#include "wctg/text_stats.hpp"
#include "wctg/trainer.hpp"

using namespace wctg;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct Settings {
  // corpus / statistics
  std::string corpus;
  std::string stopwords;
  std::size_t min_df = 5;
  double val_fraction = 0.1;
  std::uint64_t split_seed = 0;
  std::size_t window = 20;
  std::string word_ngrams = "2:2";
  std::optional<std::size_t> ngram_min_freq;
  std::optional<std::size_t> word_min_freq;
  std::string char_ngrams = "3:4";
  std::optional<std::size_t> char_min_freq;
  double sim_threshold = 0.5;
  bool no_grams = false;
  bool no_chargrams = false;
  bool no_doc_sim = false;
  // model
  std::string model = "wctext_gcn";
  std::size_t hidden = 200;
  std::size_t layers = 2;
  std::size_t heads = 8;
  std::size_t head_dim = 16;
  std::size_t edge_dim = 32;
  double dropout = 0.5;
  bool no_attention_dropout = false;
  // training
  double lr = 0.002;
  std::size_t epochs = 200;
  std::size_t patience = 20;
  std::uint64_t seed = 0;
  std::size_t runs = 10;
  std::size_t threads = 1;
  bool deterministic = false;
  // io
  std::string graph;
  std::string out;
  std::string json_out;
  std::string save_params;
  std::string params;
  std::string split = "test";
  std::string node;
  std::string lo_range = "3:6";
  std::string hi_range = "3:6";
  std::string title = "n";
  std::string config;
};

std::pair<int, int> parse_range(const std::string& text, const char* flag) {
  const auto colon = text.find(':');
  try {
    if (colon == std::string::npos) {
      const int v = std::stoi(text);
      return {v, v};
    }
    std::size_t used = 0;
    const int lo = std::stoi(text.substr(0, colon), &used);
    if (used != colon) throw std::invalid_argument("");
    const int hi = std::stoi(text.substr(colon + 1), &used);
    if (used != text.size() - colon - 1) throw std::invalid_argument("");
    if (lo > hi) throw std::invalid_argument("");
    return {lo, hi};
  } catch (const std::logic_error&) {
    throw UsageError(std::string(flag) + " expects MIN:MAX with MIN <= MAX, got '" + text + "'");
  }
}

// ------------------------------------------------------------------ options

// `seed_is_split`: --seed names the validation split seed (no training options present).
void add_corpus_options(CLI::App& app, Settings& s, bool seed_is_split) {
  app.add_option("--corpus", s.corpus, "corpus TSV: id, split, label, text")->required();
  app.add_option("--stopwords", s.stopwords, "stopword list, one word per line");
  app.add_option("--min-df", s.min_df, "drop words in fewer documents")->capture_default_str();
  app.add_option("--val-fraction", s.val_fraction, "share of train documents held out for validation")
      ->capture_default_str();
  app.add_option(seed_is_split ? "--seed,--split-seed" : "--split-seed", s.split_seed,
                 "seed of the validation split")
      ->capture_default_str();
}

void add_stats_options(CLI::App& app, Settings& s) {
  app.add_option("--window", s.window, "PMI sliding window size")->capture_default_str();
  app.add_option("--word-ngrams", s.word_ngrams, "word n-gram range MIN:MAX")->capture_default_str();
  app.add_option("--ngram-min-freq", s.ngram_min_freq, "minimum frequency for word and char n-grams");
  app.add_option("--word-min-freq", s.word_min_freq, "minimum corpus frequency of a word n-gram (default 5)");
  app.add_option("--char-ngrams", s.char_ngrams, "character n-gram range MIN:MAX")->capture_default_str();
  app.add_option("--char-min-freq", s.char_min_freq,
                 "minimum number of words containing a char n-gram (default 1)");
  app.add_option("--sim-threshold", s.sim_threshold, "minimum cosine similarity of doc-doc edges")
      ->capture_default_str();
  app.add_flag("--no-grams", s.no_grams, "no word n-gram nodes");
  app.add_flag("--no-chargrams", s.no_chargrams, "no character n-gram nodes");
  app.add_flag("--no-doc-sim", s.no_doc_sim, "no doc-doc similarity edges");
}

void add_model_options(CLI::App& app, Settings& s) {
  app.add_option("--model", s.model, "wctext_gcn or wctext_gat")
      ->check(CLI::IsMember({"wctext_gcn", "wctext_gat"}))
      ->capture_default_str();
  app.add_option("--hidden", s.hidden, "hidden size k")->capture_default_str();
  app.add_option("--layers", s.layers, "number of graph layers")->capture_default_str();
  app.add_option("--heads", s.heads, "attention heads (GAT)")->capture_default_str();
  app.add_option("--head-dim", s.head_dim, "size of each head (GAT)")->capture_default_str();
  app.add_option("--edge-dim", s.edge_dim, "edge feature size (GAT)")->capture_default_str();
  app.add_option("--dropout", s.dropout, "dropout rate")->capture_default_str();
  app.add_flag("--no-attention-dropout", s.no_attention_dropout, "no dropout on attention weights (GAT)");
  if (app.get_option_no_throw("--no-grams") == nullptr) {
    app.add_flag("--no-grams", s.no_grams, "ignore word n-gram nodes of the graph");
    app.add_flag("--no-chargrams", s.no_chargrams, "ignore character n-gram nodes of the graph");
    app.add_flag("--no-doc-sim", s.no_doc_sim, "ignore doc-doc similarity edges of the graph");
  }
}

void add_train_options(CLI::App& app, Settings& s) {
  app.add_option("--lr", s.lr, "Adam learning rate")->capture_default_str();
  app.add_option("--epochs", s.epochs, "maximum epochs")->capture_default_str();
  app.add_option("--patience", s.patience, "early stopping patience")->capture_default_str();
  app.add_option("--seed", s.seed, "base seed; run i uses seed + i")->capture_default_str();
  app.add_option("--runs", s.runs, "independent runs")->capture_default_str();
  app.add_option("--threads", s.threads, "concurrent runs")->capture_default_str();
  app.add_flag("--deterministic", s.deterministic, "one run at a time");
  app.add_option("--json", s.json_out, "append JSON-lines records to this file ('-' for stdout)");
}

void add_config_option(CLI::App& app, Settings& s) {
  app.add_option("--config", s.config, "key = value file; flags given on the command line win");
}

// ------------------------------------------------------------------ config

PreprocessConfig preprocess_config(const Settings& s) {
  PreprocessConfig p;
  p.min_df = s.min_df;
  p.val_fraction = s.val_fraction;
  p.seed = s.split_seed;
  if (!s.stopwords.empty()) p.stopwords = load_stopwords(s.stopwords);
  return p;
}

StatsConfig stats_config(const Settings& s) {
  StatsConfig c;
  c.window = s.window;
  const auto [wlo, whi] = parse_range(s.word_ngrams, "--word-ngrams");
  const auto [clo, chi] = parse_range(s.char_ngrams, "--char-ngrams");
  const auto word_freq = s.word_min_freq.value_or(s.ngram_min_freq.value_or(NgramSpec::word_default().min_freq));
  const auto char_freq = s.char_min_freq.value_or(s.ngram_min_freq.value_or(NgramSpec::char_default().min_freq));
  std::cerr << "#   effective word-min-freq=" << word_freq << " char-min-freq=" << char_freq << "\n";
  c.word_ngrams = NgramSpec{NgramKind::word, wlo, whi, word_freq};
  c.char_ngrams = NgramSpec{NgramKind::character, clo, chi, char_freq};
  c.word_ngrams->validate();
  c.char_ngrams->validate();
  if (s.no_grams) c.word_ngrams.reset();
  if (s.no_chargrams) c.char_ngrams.reset();
  c.doc_similarity = !s.no_doc_sim;
  c.sim_threshold = s.sim_threshold;
  return c;
}

ModelConfig model_config(const Settings& s) {
  ModelConfig m;
  m.model = *parse_model_kind(s.model);
  m.hidden_dim = s.hidden;
  m.num_layers = s.layers;
  m.heads = s.heads;
  m.head_dim = s.head_dim;
  m.edge_dim = s.edge_dim;
  m.dropout = s.dropout;
  m.attention_dropout = !s.no_attention_dropout;
  m.ablation = {!s.no_grams, !s.no_chargrams, !s.no_doc_sim};
  m.validate();
  return m;
}

TrainConfig train_config(const Settings& s) {
  TrainConfig t;
  t.lr = s.lr;
  t.epochs = s.epochs;
  t.patience = s.patience;
  t.seed = s.seed;
  t.runs = s.runs;
  t.threads = s.deterministic ? 1 : s.threads;
  t.validate();
  return t;
}

// Reads `key = value` lines ('#' comments) into --key=value arguments.
std::vector<std::string> config_arguments(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file '" + path + "'");
  std::vector<std::string> args;
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string v) {
    const auto b = v.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = v.find_last_not_of(" \t\r");
    v = v.substr(b, e - b + 1);
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
    return v;
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError(path + ":" + std::to_string(line_no) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    if (key.starts_with("--")) key.erase(0, 2);
    if (key == "config") throw UsageError(path + ":" + std::to_string(line_no) + ": nested config");
    args.push_back("--" + key + "=" + trim(line.substr(eq + 1)));
  }
  return args;
}

void log_resolved(const CLI::App& sub) {
  std::cerr << "# wctg " << sub.get_name() << " resolved configuration\n";
  std::istringstream lines(sub.config_to_str(true, false));
  for (std::string line; std::getline(lines, line);)
    if (!line.empty() && !line.starts_with("config=")) std::cerr << "#   " << line << "\n";
}

// ------------------------------------------------------------------ helpers

Corpus prepare_corpus(const Settings& s) {
  const auto pre = preprocess_config(s);
  const Corpus raw = load_corpus(s.corpus, pre);
  auto pruned = prune_vocabulary(raw, pre.min_df);
  std::cerr << "corpus: " << raw.size() << " documents, " << raw.vocabulary().size() << " words; after min_df="
            << pre.min_df << ": " << pruned.corpus.vocabulary().size() << " words, "
            << pruned.dropped_documents << " documents dropped\n";
  Corpus c = assign_validation(pruned.corpus, pre.val_fraction, pre.seed);
  std::cerr << "splits: train=" << c.count(Split::train) << " val=" << c.count(Split::val)
            << " test=" << c.count(Split::test) << "\n";
  return c;
}

class JsonSink {
 public:
  explicit JsonSink(const std::string& path) {
    if (path.empty()) return;
    if (path == "-") {
      out_ = &std::cout;
    } else {
      file_.open(path, std::ios::app);
      if (!file_) throw DataError("cannot open '" + path + "' for writing");
      out_ = &file_;
    }
  }
  void write(const std::string& record) {
    if (out_) *out_ << record << "\n";
  }

 private:
  std::ofstream file_;
  std::ostream* out_ = nullptr;
};

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * v);
  return buf;
}

void print_run(const TrainReport& r) {
  std::printf("run seed=%llu test_accuracy=%.4f best_epoch=%zu epochs=%zu seconds=%.2f\n",
              static_cast<unsigned long long>(r.seed), r.test_accuracy, r.best_epoch, r.epochs.size(),
              r.wall_seconds);
}

json model_config_json(const ModelConfig& m) {
  return {{"model", to_string(m.model)},
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

ModelConfig model_config_from(const json& j) {
  ModelConfig m;
  const auto kind = parse_model_kind(j.at("model").get<std::string>());
  if (!kind) throw DataError("unknown model '" + j.at("model").get<std::string>() + "'");
  m.model = *kind;
  m.hidden_dim = j.at("hidden_dim");
  m.num_layers = j.at("num_layers");
  m.heads = j.at("heads");
  m.head_dim = j.at("head_dim");
  m.edge_dim = j.at("edge_dim");
  m.dropout = j.at("dropout");
  m.attention_dropout = j.at("attention_dropout");
  m.leaky_slope = j.at("leaky_slope");
  m.ablation = {j.at("use_grams"), j.at("use_chargrams"), j.at("use_doc_sim")};
  return m;
}

void save_params(const Model& model, std::uint64_t seed, const std::string& path) {
  json params = json::object();
  for (const auto& p : model.parameters())
    params[p.name] = {{"rows", p.value.rows()},
                      {"cols", p.value.cols()},
                      {"values", std::vector<double>(p.value.values().begin(), p.value.values().end())}};
  const json doc = {{"format", "wctg-params"},
                    {"version", 1},
                    {"seed", seed},
                    {"config", model_config_json(model.config())},
                    {"params", params}};
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << doc.dump() << "\n";
}

std::unique_ptr<Model> load_params(const HetGraph& graph, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open parameter file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
    if (doc.at("format") != "wctg-params" || doc.at("version") != 1)
      throw DataError("'" + path + "' is not a wctg parameter file");
    auto model = make_model(graph, model_config_from(doc.at("config")), 0);
    const auto& params = doc.at("params");
    if (params.size() != model->parameters().size())
      throw DataError("parameter file does not match the graph: " + std::to_string(params.size()) +
                      " tensors, model has " + std::to_string(model->parameters().size()));
    for (auto& p : model->parameters()) {
      if (!params.contains(p.name)) throw DataError("parameter file lacks '" + p.name + "'");
      const auto& entry = params.at(p.name);
      const auto values = entry.at("values").get<std::vector<double>>();
      if (entry.at("rows") != p.value.rows() || entry.at("cols") != p.value.cols() ||
          values.size() != p.value.size())
        throw DataError("parameter '" + p.name + "' has shape " + entry.at("rows").dump() + "x" +
                        entry.at("cols").dump() + ", model expects " + shape_string(p.value));
      std::copy(values.begin(), values.end(), p.value.values().begin());
    }
    return model;
  } catch (const json::exception& e) {
    throw DataError("bad parameter file '" + path + "': " + e.what());
  }
}

// ------------------------------------------------------------------ commands

int cmd_build_graph(const Settings& s) {
  const Corpus corpus = prepare_corpus(s);
  const HetGraph g = build_graph(corpus, compute_stats(corpus, stats_config(s)));
  save_graph(g, s.out);
  std::printf("wrote %s\n", s.out.c_str());
  std::printf("nodes:");
  for (std::size_t t = 0; t < kNodeTypes; ++t)
    std::printf(" %s=%zu", std::string(to_string(static_cast<NodeType>(t))).c_str(), g.keys[t].size());
  std::printf("\nedges:");
  for (auto et : kAllEdgeTypes)
    std::printf(" %s=%zu", std::string(to_string(et)).c_str(), g.edges_of(et).size());
  std::printf("\n");
  return 0;
}

int cmd_train(const Settings& s) {
  const HetGraph g = load_graph(s.graph);
  const ModelConfig m = model_config(s);
  const TrainConfig t = train_config(s);
  JsonSink sink(s.json_out);

  std::vector<TrainReport> reports;
  TrainConfig rest = t;
  if (!s.save_params.empty()) {
    TrainConfig first = t;
    first.runs = 1;
    std::unique_ptr<Model> model;
    reports.push_back(train(g, m, first, &model));
    save_params(*model, first.seed, s.save_params);
    std::cerr << "saved parameters of seed " << first.seed << " to " << s.save_params << "\n";
    rest.seed = t.seed + 1;
    rest.runs = t.runs - 1;
  }
  if (rest.runs > 0) {
    auto more = run_many(g, m, rest).reports;
    reports.insert(reports.end(), more.begin(), more.end());
  }
  const Aggregate agg = aggregate(std::move(reports));
  for (const auto& r : agg.reports) {
    print_run(r);
    sink.write(report_json(r));
  }
  sink.write(aggregate_json(agg));
  std::printf("%s test accuracy: %s±%s (%zu runs)\n", std::string(to_string(m.model)).c_str(),
              percent(agg.mean).c_str(), percent(agg.stddev).c_str(), agg.reports.size());
  return 0;
}

int cmd_eval(const Settings& s) {
  const HetGraph g = load_graph(s.graph);
  const auto split = parse_split(s.split);
  if (!split) throw UsageError("--split must be train, val or test");
  const auto model = load_params(g, s.params);
  const auto e = evaluate(*model, *split);
  std::printf("split=%s documents=%zu loss=%.6f accuracy=%.4f\n", s.split.c_str(),
              split_rows(model->graph(), *split).size(), e.loss, e.accuracy);
  return 0;
}

int cmd_sweep(const Settings& s) {
  const Corpus corpus = prepare_corpus(s);
  const StatsConfig stats = stats_config(s);
  if (!stats.char_ngrams) throw UsageError("sweep needs character n-grams (drop --no-chargrams)");
  const ModelConfig m = model_config(s);
  const TrainConfig t = train_config(s);
  const auto lo = parse_range(s.lo_range, "--lo-range");
  const auto hi = parse_range(s.hi_range, "--hi-range");
  if (lo.first < 1) throw UsageError("--lo-range must start at 1 or more");
  JsonSink sink(s.json_out);
  const SweepGrid grid = sweep_char_ngrams(corpus, stats, m, t, lo, hi);
  for (const auto& c : grid.cells) {
    std::fprintf(stderr, "cell %d:%d mean=%.4f std=%.4f\n", c.n_lo, c.n_hi, c.result.mean, c.result.stddev);
    sink.write(sweep_cell_json(c));
  }
  std::printf("%s", grid.format_table(s.title).c_str());
  return 0;
}

int cmd_inspect(const Settings& s) {
  const HetGraph g = load_graph(s.graph);
  if (s.node.empty()) {
    std::printf("nodes:");
    for (std::size_t t = 0; t < kNodeTypes; ++t)
      std::printf(" %s=%zu", std::string(to_string(static_cast<NodeType>(t))).c_str(), g.keys[t].size());
    std::printf("\nedges:");
    for (auto et : kAllEdgeTypes)
      std::printf(" %s=%zu", std::string(to_string(et)).c_str(), g.edges_of(et).size());
    std::printf("\nclasses: %zu\n", g.class_names.size());
    return 0;
  }
  const auto ref = parse_node_ref(s.node);
  if (!ref) throw UsageError("--node expects TYPE:INDEX, e.g. word:42");
  if (ref->index >= g.count(ref->type))
    throw DataError("unknown node " + s.node + " (graph has " + std::to_string(g.count(ref->type)) + " " +
                    std::string(to_string(ref->type)) + " nodes)");
  std::printf("%s %s\n", s.node.c_str(), g.keys[static_cast<std::size_t>(ref->type)][ref->index].c_str());
  const auto list = neighbors(g, *ref);
  for (std::size_t i = 0; i < list.size();) {
    std::size_t j = i;
    while (j < list.size() && list[j].etype == list[i].etype) ++j;
    std::printf("[%s] %zu\n", std::string(to_string(list[i].etype)).c_str(), j - i);
    for (; i < j; ++i) {
      const auto& n = list[i];
      char weight[32];
      std::snprintf(weight, sizeof weight, "%.6g", n.weight);
      std::printf("  %s:%zu\t%s\t%s\n", std::string(to_string(n.node.type)).c_str(), n.node.index,
                  g.keys[static_cast<std::size_t>(n.node.type)][n.node.index].c_str(), weight);
    }
  }
  return 0;
}

// ------------------------------------------------------------------ main

struct Cli {
  CLI::App app{"word-character heterogeneous graph text classification", "wctg"};
  Settings s;
  CLI::App* build = nullptr;
  CLI::App* train = nullptr;
  CLI::App* eval = nullptr;
  CLI::App* sweep = nullptr;
  CLI::App* inspect = nullptr;

  Cli() {
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    build = app.add_subcommand("build-graph", "build a graph file from a corpus");
    build->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    add_corpus_options(*build, s, true);
    add_stats_options(*build, s);
    build->add_option("--out", s.out, "graph file to write")->required();
    add_config_option(*build, s);

    train = app.add_subcommand("train", "train a model on a graph file");
    train->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    train->add_option("--graph", s.graph, "graph file")->required();
    add_model_options(*train, s);
    add_train_options(*train, s);
    train->add_option("--save-params", s.save_params, "write the first run's parameters (JSON)");
    add_config_option(*train, s);

    eval = app.add_subcommand("eval", "evaluate saved parameters on a split");
    eval->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    eval->add_option("--graph", s.graph, "graph file")->required();
    eval->add_option("--params", s.params, "parameter file written by train --save-params")->required();
    eval->add_option("--split", s.split, "train, val or test")->capture_default_str();
    add_config_option(*eval, s);

    sweep = app.add_subcommand("sweep", "grid over character n-gram ranges");
    sweep->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    add_corpus_options(*sweep, s, false);
    add_stats_options(*sweep, s);
    add_model_options(*sweep, s);
    add_train_options(*sweep, s);
    sweep->add_option("--lo-range", s.lo_range, "values of the smallest n, MIN:MAX")->capture_default_str();
    sweep->add_option("--hi-range", s.hi_range, "values of the largest n, MIN:MAX")->capture_default_str();
    sweep->add_option("--title", s.title, "label of the table corner")->capture_default_str();
    add_config_option(*sweep, s);

    inspect = app.add_subcommand("inspect", "graph summary or the neighbors of one node");
    inspect->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    inspect->add_option("--graph", s.graph, "graph file")->required();
    inspect->add_option("--node", s.node, "TYPE:INDEX, e.g. word:42");
    add_config_option(*inspect, s);
  }

  CLI::App* chosen() const {
    for (auto* sub : {build, train, eval, sweep, inspect})
      if (sub->parsed()) return sub;
    return nullptr;
  }
};

int run(int argc, char** argv) {
  auto cli = std::make_unique<Cli>();
  try {
    cli->app.parse(argc, argv);
    if (!cli->s.config.empty()) {
      // Reparse with the file's settings ahead of the command line so explicit flags win.
      const std::string name = cli->chosen()->get_name();
      std::vector<std::string> args = {name};
      for (auto& a : config_arguments(cli->s.config)) args.push_back(std::move(a));
      bool skipped = false;
      for (int i = 1; i < argc; ++i) {
        if (!skipped && argv[i] == name) {
          skipped = true;
          continue;
        }
        args.emplace_back(argv[i]);
      }
      cli = std::make_unique<Cli>();
      std::reverse(args.begin(), args.end());
      cli->app.parse(args);
    }
  } catch (const CLI::ParseError& e) {
    const int code = cli->app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  const Settings& s = cli->s;
  CLI::App* sub = cli->chosen();
  log_resolved(*sub);
  if (sub == cli->build) return cmd_build_graph(s);
  if (sub == cli->train) return cmd_train(s);
  if (sub == cli->eval) return cmd_eval(s);
  if (sub == cli->sweep) return cmd_sweep(s);
  return cmd_inspect(s);
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const NumericError& e) {
    std::cerr << "wctg: numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const UsageError& e) {
    std::cerr << "wctg: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "wctg: " << e.what() << "\n";
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "wctg: " << e.what() << "\n";
    return kExitData;
  } catch (const ShapeError& e) {
    std::cerr << "wctg: internal shape error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::invalid_argument& e) {
    std::cerr << "wctg: invalid setting: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "wctg: " << e.what() << "\n";
    return kExitData;
  }
}
