#pragma once

#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "wctg/corpus.hpp"
#include "wctg/het_graph.hpp"

namespace fixtures {

inline wctg::Corpus corpus_from_tsv(const std::string& tsv, const wctg::PreprocessConfig& cfg = {}) {
  std::istringstream in(tsv);
  return wctg::read_corpus(in, cfg);
}

// Token-level corpus; doc i is train unless listed in `test_docs`.
inline wctg::Corpus token_corpus(const std::vector<std::vector<std::string>>& docs,
                                 std::vector<std::size_t> test_docs = {},
                                 std::vector<std::string> labels = {}) {
  std::vector<wctg::Document> out;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    wctg::Document d;
    d.id = "d" + std::to_string(i);
    d.split = wctg::Split::train;
    for (auto t : test_docs)
      if (t == i) d.split = wctg::Split::test;
    d.label = labels.empty() ? (i % 2 ? "b" : "a") : labels[i];
    d.tokens = docs[i];
    out.push_back(std::move(d));
  }
  if (test_docs.empty()) out.back().split = wctg::Split::test;
  return wctg::Corpus(std::move(out));
}

// Random corpus over a small vocabulary "w0".."w{vocab-1}".
inline wctg::Corpus random_corpus(std::mt19937_64& rng, std::size_t max_docs = 50,
                                  std::size_t vocab = 15, std::size_t max_len = 30) {
  std::uniform_int_distribution<std::size_t> n_docs(3, max_docs), len(1, max_len), word(0, vocab - 1);
  const std::size_t n = n_docs(rng);
  std::vector<std::vector<std::string>> docs(n);
  for (auto& d : docs) {
    const std::size_t l = len(rng);
    for (std::size_t k = 0; k < l; ++k) d.push_back("w" + std::to_string(word(rng)));
  }
  return token_corpus(docs, {0});
}

// Random heterogeneous graph with at most 20 nodes, canonical and valid.
inline wctg::HetGraph random_graph(std::mt19937_64& rng, double density = 0.4) {
  std::uniform_int_distribution<std::size_t> docs(3, 6), words(2, 6), extra(0, 4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  wctg::HetGraph g;
  const std::size_t counts[4] = {docs(rng), words(rng), extra(rng), extra(rng)};
  for (std::size_t t = 0; t < 4; ++t)
    for (std::size_t i = 0; i < counts[t]; ++i)
      g.keys[t].push_back(std::string(wctg::to_string(static_cast<wctg::NodeType>(t))) + std::to_string(i));
  const std::size_t classes = 2 + rng() % 2;
  for (std::size_t c = 0; c < classes; ++c) g.class_names.push_back("c" + std::to_string(c));
  for (std::size_t d = 0; d < counts[0]; ++d) {
    g.labels.push_back(d < classes ? d : rng() % classes);
    const wctg::Split order[3] = {wctg::Split::train, wctg::Split::val, wctg::Split::test};
    g.splits.push_back(d < 3 ? order[d] : order[rng() % 3]);
  }
  for (auto et : wctg::kAllEdgeTypes) {
    const auto ns = g.count(wctg::source_type(et));
    const auto nt = g.count(wctg::target_type(et));
    for (std::size_t s = 0; s < ns; ++s) {
      for (std::size_t t = 0; t < nt; ++t) {
        if (wctg::is_homogeneous(et) && s >= t) continue;
        if (unit(rng) >= density) continue;
        double w = 0.1 + 2.9 * unit(rng);
        if (et == wctg::EdgeType::dd) w = 0.5 + 0.5 * unit(rng);
        if (et == wctg::EdgeType::gw || et == wctg::EdgeType::cw) w = 1.0;
        g.edges_of(et).push_back({s, t, w});
      }
    }
  }
  g.canonicalize();
  g.validate();
  return g;
}

// 10 nodes: 4 docs, 4 words, 1 word gram, 1 char gram; every edge family present.
inline wctg::HetGraph toy_graph() {
  wctg::HetGraph g;
  g.keys[0] = {"d0", "d1", "d2", "d3"};
  g.keys[1] = {"apple", "pear", "car", "bus"};
  g.keys[2] = {"apple_pear"};
  g.keys[3] = {"<ca"};
  g.class_names = {"fruit", "vehicle"};
  g.labels = {0, 1, 0, 1};
  g.splits = {wctg::Split::train, wctg::Split::train, wctg::Split::val, wctg::Split::test};
  using wctg::EdgeType;
  g.edges_of(EdgeType::dw) = {{0, 0, 0.7}, {0, 1, 1.2}, {1, 2, 0.9}, {1, 3, 0.4},
                              {2, 0, 0.5}, {2, 1, 0.3}, {3, 2, 1.1}, {3, 3, 0.8}};
  g.edges_of(EdgeType::dg) = {{0, 0, 0.6}, {2, 0, 0.2}};
  g.edges_of(EdgeType::ww) = {{0, 1, 0.45}, {2, 3, 1.3}};
  g.edges_of(EdgeType::dd) = {{0, 2, 0.75}, {1, 3, 0.6}};
  g.edges_of(EdgeType::gw) = {{0, 0, 1.0}, {0, 1, 1.0}};
  g.edges_of(EdgeType::cw) = {{0, 2, 1.0}};
  g.canonicalize();
  g.validate();
  return g;
}

// 20 documents, two classes with disjoint topic words plus shared filler.
// Docs 0..13 train, 14..19 test.
inline std::string separable_tsv() {
  const std::vector<std::string> fruit = {"apple", "banana", "cherry", "grape", "lemon", "mango"};
  const std::vector<std::string> vehicle = {"car", "truck", "train", "plane", "boat", "bike"};
  const std::vector<std::string> filler = {"the", "and", "with", "very"};
  std::mt19937_64 rng(7);
  std::string tsv = "# linearly separable toy corpus\n";
  for (int i = 0; i < 20; ++i) {
    const bool is_fruit = i % 2 == 0;
    const auto& topic = is_fruit ? fruit : vehicle;
    std::string text;
    for (int k = 0; k < 6; ++k) {
      text += topic[rng() % topic.size()] + " ";
      if (k % 2 == 0) text += filler[rng() % filler.size()] + " ";
    }
    tsv += "doc" + std::to_string(i) + "\t" + (i < 14 ? "train" : "test") + "\t" +
           (is_fruit ? "fruit" : "vehicle") + "\t" + text + "\n";
  }
  return tsv;
}

}  // namespace fixtures
