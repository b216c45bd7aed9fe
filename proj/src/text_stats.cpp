#include "wctg/text_stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include "wctg/errors.hpp"

namespace wctg {

void NgramSpec::validate() const {
  if (n_min < 2 || n_min > n_max)
    throw std::invalid_argument("n-gram range must satisfy 2 <= min <= max, got " +
                                std::to_string(n_min) + ":" + std::to_string(n_max));
  if (min_freq < 1) throw std::invalid_argument("n-gram min_freq must be >= 1");
}

std::optional<double> lookup(const SparseTable& table, std::size_t row, std::size_t col) {
  auto it = std::lower_bound(table.begin(), table.end(), std::pair{row, col},
                             [](const TableEntry& e, const std::pair<std::size_t, std::size_t>& k) {
                               return e.row != k.first ? e.row < k.first : e.col < k.second;
                             });
  if (it == table.end() || it->row != row || it->col != col) return std::nullopt;
  return it->value;
}

namespace {

void sort_table(SparseTable& t) {
  std::sort(t.begin(), t.end(), [](const TableEntry& a, const TableEntry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
}

std::string join_tokens(const Vocabulary& vocab, std::span<const std::size_t> ids) {
  std::string key;
  for (std::size_t k = 0; k < ids.size(); ++k) {
    if (k) key.push_back('_');
    key += vocab.word(ids[k]);
  }
  return key;
}

}  // namespace

WordNgrams extract_word_ngrams(const Corpus& corpus, const NgramSpec& spec) {
  if (spec.kind != NgramKind::word) throw std::invalid_argument("expected a word n-gram spec");
  spec.validate();

  // First pass: register every gram in first-occurrence order with its total frequency.
  Vocabulary all;
  std::vector<std::size_t> freq;
  std::vector<std::vector<std::size_t>> words_of;
  std::vector<std::vector<std::size_t>> occurrences(corpus.size());
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    const auto& ids = corpus.token_ids(d);
    for (int n = spec.n_min; n <= spec.n_max; ++n) {
      const auto len = static_cast<std::size_t>(n);
      if (ids.size() < len) break;
      for (std::size_t s = 0; s + len <= ids.size(); ++s) {
        std::span<const std::size_t> window(ids.data() + s, len);
        const std::size_t id = all.add(join_tokens(corpus.vocabulary(), window));
        if (id == freq.size()) {
          freq.push_back(0);
          words_of.emplace_back(window.begin(), window.end());
        }
        ++freq[id];
        occurrences[d].push_back(id);
      }
    }
  }

  WordNgrams out;
  std::vector<std::size_t> remap(all.size(), SIZE_MAX);
  for (std::size_t g = 0; g < all.size(); ++g) {
    if (freq[g] < spec.min_freq) continue;
    remap[g] = out.grams.size();
    out.grams.push_back(all.word(g));
    out.gram_words.push_back(words_of[g]);
  }
  out.doc_counts.resize(corpus.size());
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    std::map<std::size_t, std::size_t> counts;
    for (auto g : occurrences[d])
      if (remap[g] != SIZE_MAX) ++counts[remap[g]];
    out.doc_counts[d].assign(counts.begin(), counts.end());
  }
  return out;
}

CharNgrams extract_char_ngrams(std::span<const std::string> vocabulary, const NgramSpec& spec) {
  if (spec.kind != NgramKind::character)
    throw std::invalid_argument("expected a character n-gram spec");
  spec.validate();

  Vocabulary all;
  std::vector<std::vector<std::size_t>> words_with;  // distinct words per gram
  for (std::size_t w = 0; w < vocabulary.size(); ++w) {
    const std::string marked = "<" + vocabulary[w] + ">";
    for (int n = spec.n_min; n <= spec.n_max; ++n) {
      const auto len = static_cast<std::size_t>(n);
      if (marked.size() < len) break;
      for (std::size_t s = 0; s + len <= marked.size(); ++s) {
        const std::size_t id = all.add(marked.substr(s, len));
        if (id == words_with.size()) words_with.emplace_back();
        auto& ws = words_with[id];
        if (ws.empty() || ws.back() != w) ws.push_back(w);
      }
    }
  }

  CharNgrams out;
  for (std::size_t g = 0; g < all.size(); ++g) {
    if (words_with[g].size() < spec.min_freq) continue;
    const std::size_t id = out.grams.size();
    out.grams.push_back(all.word(g));
    for (auto w : words_with[g]) out.incidence.emplace_back(id, w);
  }
  return out;
}

SparseTable tfidf(const TermCounts& counts) {
  const auto n_docs = counts.size();
  std::unordered_map<std::size_t, std::size_t> df;
  for (const auto& doc : counts)
    for (const auto& [term, count] : doc)
      if (count > 0) ++df[term];

  SparseTable table;
  for (std::size_t d = 0; d < n_docs; ++d) {
    for (const auto& [term, count] : counts[d]) {
      if (count == 0) continue;
      const double idf =
          std::log(static_cast<double>(n_docs) / static_cast<double>(df.at(term)));
      const double value = static_cast<double>(count) * idf;
      if (value > 0.0) table.push_back({d, term, value});
    }
  }
  sort_table(table);
  return table;
}

TermCounts word_counts(const Corpus& corpus) {
  TermCounts counts(corpus.size());
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    std::map<std::size_t, std::size_t> c;
    for (auto id : corpus.token_ids(d)) ++c[id];
    counts[d].assign(c.begin(), c.end());
  }
  return counts;
}

SparseTable pmi(const Corpus& corpus, std::size_t window) {
  if (window < 2) throw std::invalid_argument("PMI window must be >= 2");
  const std::size_t vocab = corpus.vocabulary().size();
  std::vector<std::size_t> word_windows(vocab, 0);
  std::unordered_map<std::uint64_t, std::size_t> pair_windows;
  std::size_t total = 0;

  std::vector<std::size_t> uniq;
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    const auto& ids = corpus.token_ids(d);
    if (ids.empty()) continue;
    const std::size_t len = std::min(window, ids.size());
    for (std::size_t s = 0; s + len <= ids.size(); ++s) {
      uniq.assign(ids.begin() + static_cast<std::ptrdiff_t>(s),
                  ids.begin() + static_cast<std::ptrdiff_t>(s + len));
      std::sort(uniq.begin(), uniq.end());
      uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
      ++total;
      for (std::size_t a = 0; a < uniq.size(); ++a) {
        ++word_windows[uniq[a]];
        for (std::size_t b = a + 1; b < uniq.size(); ++b)
          ++pair_windows[static_cast<std::uint64_t>(uniq[a]) * vocab + uniq[b]];
      }
    }
  }
  if (total == 0) throw DataError("PMI: corpus has no windows");

  SparseTable table;
  const double n = static_cast<double>(total);
  for (const auto& [key, count] : pair_windows) {
    const std::size_t i = key / vocab;
    const std::size_t j = key % vocab;
    const double value = std::log(static_cast<double>(count) * n /
                                  (static_cast<double>(word_windows[i]) *
                                   static_cast<double>(word_windows[j])));
    if (value > 0.0) {
      table.push_back({i, j, value});
      table.push_back({j, i, value});
    }
  }
  sort_table(table);
  return table;
}

SparseTable doc_similarity(std::size_t n_docs, const SparseTable& tfidf_dw, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0))
    throw std::invalid_argument("similarity threshold must be in [0, 1]");
  std::vector<double> norm(n_docs, 0.0);
  std::unordered_map<std::size_t, std::vector<std::pair<std::size_t, double>>> postings;
  for (const auto& e : tfidf_dw) {
    if (e.row >= n_docs) throw DataError("tf-idf row outside the corpus");
    norm[e.row] += e.value * e.value;
    postings[e.col].emplace_back(e.row, e.value);
  }
  for (auto& v : norm) v = std::sqrt(v);

  // Rows of tfidf_dw are sorted, so every posting list is sorted by doc.
  std::vector<std::vector<std::pair<std::size_t, double>>> doc_terms(n_docs);
  for (const auto& e : tfidf_dw) doc_terms[e.row].emplace_back(e.col, e.value);

  SparseTable table;
  std::vector<double> dot(n_docs, 0.0);
  std::vector<std::size_t> touched;
  for (std::size_t d = 0; d < n_docs; ++d) {
    if (norm[d] == 0.0) continue;
    touched.clear();
    for (const auto& [term, value] : doc_terms[d]) {
      for (const auto& [other, other_value] : postings[term]) {
        if (other <= d) continue;
        if (dot[other] == 0.0) touched.push_back(other);
        dot[other] += value * other_value;
      }
    }
    for (auto other : touched) {
      const double sim = std::min(1.0, dot[other] / (norm[d] * norm[other]));
      dot[other] = 0.0;
      if (sim > 0.0 && sim >= threshold) {
        table.push_back({d, other, sim});
        table.push_back({other, d, sim});
      }
    }
  }
  sort_table(table);
  return table;
}

StatTables compute_stats(const Corpus& corpus, const StatsConfig& config) {
  StatTables stats;
  stats.tfidf_dw = tfidf(word_counts(corpus));
  stats.pmi_ww = pmi(corpus, config.window);
  if (config.doc_similarity)
    stats.sim_dd = doc_similarity(corpus.size(), stats.tfidf_dw, config.sim_threshold);

  if (config.word_ngrams) {
    const auto grams = extract_word_ngrams(corpus, *config.word_ngrams);
    stats.gram_keys = grams.grams;
    stats.tfidf_dg = tfidf(grams.doc_counts);
    for (std::size_t g = 0; g < grams.grams.size(); ++g) {
      auto words = grams.gram_words[g];
      std::sort(words.begin(), words.end());
      words.erase(std::unique(words.begin(), words.end()), words.end());
      for (auto w : words) stats.contain_gw.emplace_back(g, w);
    }
    for (std::size_t d = 0; d < grams.doc_counts.size(); ++d)
      for (const auto& [g, count] : grams.doc_counts[d]) stats.contain_gd.emplace_back(g, d);
    std::sort(stats.contain_gd.begin(), stats.contain_gd.end());
  }
  if (config.char_ngrams) {
    auto chars = extract_char_ngrams(corpus.vocabulary().words(), *config.char_ngrams);
    stats.chargram_keys = std::move(chars.grams);
    stats.contain_cw = std::move(chars.incidence);
  }
  return stats;
}

}  // namespace wctg
