#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wctg/corpus.hpp"

namespace wctg {

enum class NgramKind { word, character };

struct NgramSpec {
  NgramKind kind = NgramKind::word;
  int n_min = 2;
  int n_max = 2;
  std::size_t min_freq = 5;

  static NgramSpec word_default() { return {NgramKind::word, 2, 2, 5}; }
  static NgramSpec char_default() { return {NgramKind::character, 3, 4, 1}; }

  // Throws std::invalid_argument when 2 <= n_min <= n_max or min_freq >= 1
  // does not hold.
  void validate() const;
};

// One stored entry of a sparse statistic table.
struct TableEntry {
  std::size_t row;
  std::size_t col;
  double value;

  friend bool operator==(const TableEntry&, const TableEntry&) = default;
};

// Entries sorted by (row, col), unique coordinates.
using SparseTable = std::vector<TableEntry>;
// Sorted unique (row, col) pairs of a boolean relation.
using PairSet = std::vector<std::pair<std::size_t, std::size_t>>;
// Per document: sorted (term id, count > 0).
using TermCounts = std::vector<std::vector<std::pair<std::size_t, std::size_t>>>;

std::optional<double> lookup(const SparseTable& table, std::size_t row, std::size_t col);

struct WordNgrams {
  std::vector<std::string> grams;                    // key: tokens joined by '_'
  std::vector<std::vector<std::size_t>> gram_words;  // token ids of each gram, in order
  TermCounts doc_counts;
};

WordNgrams extract_word_ngrams(const Corpus& corpus, const NgramSpec& spec);

struct CharNgrams {
  std::vector<std::string> grams;
  PairSet incidence;  // (gram id, word id)
};

// Words are wrapped as '<' + word + '>' before windows are taken.
CharNgrams extract_char_ngrams(std::span<const std::string> vocabulary, const NgramSpec& spec);

// Raw-count tf times ln(n_docs / df); zero products are not stored.
SparseTable tfidf(const TermCounts& counts);

TermCounts word_counts(const Corpus& corpus);

// Positive PMI over sliding windows of `window` tokens. A document shorter
// than the window contributes one window holding the whole document.
SparseTable pmi(const Corpus& corpus, std::size_t window);

// Cosine similarity of tf-idf rows; keeps off-diagonal pairs with a positive
// value >= threshold.
SparseTable doc_similarity(std::size_t n_docs, const SparseTable& tfidf_dw, double threshold);

struct StatsConfig {
  std::size_t window = 20;
  std::optional<NgramSpec> word_ngrams = NgramSpec::word_default();
  std::optional<NgramSpec> char_ngrams = NgramSpec::char_default();
  bool doc_similarity = true;
  double sim_threshold = 0.5;
};

struct StatTables {
  SparseTable tfidf_dw;
  SparseTable tfidf_dg;
  SparseTable pmi_ww;
  SparseTable sim_dd;
  PairSet contain_gw;  // (gram, word)
  PairSet contain_gd;  // (gram, doc)
  PairSet contain_cw;  // (chargram, word)
  std::vector<std::string> gram_keys;
  std::vector<std::string> chargram_keys;
};

StatTables compute_stats(const Corpus& corpus, const StatsConfig& config);

}  // namespace wctg
