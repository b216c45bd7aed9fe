#include "wctg/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "wctg/errors.hpp"

namespace wctg {

std::string_view to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "?";
}

std::optional<Split> parse_split(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "val") return Split::val;
  if (s == "test") return Split::test;
  return std::nullopt;
}

std::size_t Vocabulary::add(const std::string& word) {
  auto [it, inserted] = ids_.try_emplace(word, words_.size());
  if (inserted) words_.push_back(word);
  return it->second;
}

std::optional<std::size_t> Vocabulary::find(std::string_view word) const {
  auto it = ids_.find(std::string(word));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

Corpus::Corpus(std::vector<Document> documents) : documents_(std::move(documents)) {
  if (documents_.empty()) throw DataError("no documents");
  std::unordered_set<std::string> seen;
  Vocabulary label_set;
  token_ids_.reserve(documents_.size());
  for (const auto& doc : documents_) {
    if (!seen.insert(doc.id).second) throw DataError("duplicate doc_id '" + doc.id + "'");
    if (doc.tokens.empty()) throw DataError("document '" + doc.id + "' is empty");
    label_set.add(doc.label);
    std::vector<std::size_t> ids;
    ids.reserve(doc.tokens.size());
    for (const auto& tok : doc.tokens) ids.push_back(vocabulary_.add(tok));
    token_ids_.push_back(std::move(ids));
  }
  labels_ = label_set.words();
  if (count(Split::train) == 0) throw DataError("corpus has no train documents");
  if (count(Split::test) == 0) throw DataError("corpus has no test documents");
}

std::size_t Corpus::label_index(const std::string& label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw DataError("unknown label '" + label + "'");
  return static_cast<std::size_t>(it - labels_.begin());
}

std::size_t Corpus::count(Split s) const {
  return static_cast<std::size_t>(std::count_if(
      documents_.begin(), documents_.end(), [s](const Document& d) { return d.split == s; }));
}

std::vector<std::string> tokenize(std::string_view text, const PreprocessConfig& config) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty() && !config.stopwords.contains(current)) tokens.push_back(current);
    current.clear();
  };
  for (char raw : text) {
    const auto c = static_cast<unsigned char>(raw);
    const char lower = (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : raw;
    const bool keep = (lower >= 'a' && lower <= 'z') || (lower >= '0' && lower <= '9') ||
                      lower == '\'';
    if (keep) {
      current.push_back(lower);
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

std::unordered_set<std::string> load_stopwords(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open stopword file " + path.string());
  std::unordered_set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.front() == '#') continue;
    for (auto& w : tokenize(line)) words.insert(std::move(w));
  }
  return words;
}

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace

Corpus read_corpus(std::istream& in, const PreprocessConfig& config) {
  std::vector<Document> docs;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 4)
      throw ParseError(line_no, "expected 4 tab-separated fields, got " +
                                    std::to_string(fields.size()));
    Document doc;
    doc.id = std::string(fields[0]);
    if (doc.id.empty()) throw ParseError(line_no, "empty doc_id");
    const auto split = parse_split(fields[1]);
    if (!split || *split == Split::val)
      throw ParseError(line_no, "split must be train or test, got '" + std::string(fields[1]) + "'");
    doc.split = *split;
    doc.label = std::string(fields[2]);
    if (doc.label.empty()) throw ParseError(line_no, "empty label");
    if (!ids.insert(doc.id).second)
      throw ParseError(line_no, "duplicate doc_id '" + doc.id + "'");
    doc.tokens = tokenize(fields[3], config);
    if (doc.tokens.empty())
      throw ParseError(line_no, "document '" + doc.id + "' is empty after tokenization");
    docs.push_back(std::move(doc));
  }
  if (docs.empty()) throw DataError("no documents");
  return Corpus(std::move(docs));
}

Corpus load_corpus(const std::filesystem::path& path, const PreprocessConfig& config) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus " + path.string());
  return read_corpus(in, config);
}

PruneResult prune_vocabulary(const Corpus& corpus, std::size_t min_df) {
  if (min_df < 1) throw std::invalid_argument("min_df must be >= 1");
  std::vector<std::size_t> df(corpus.vocabulary().size(), 0);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    auto ids = corpus.token_ids(i);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    for (auto id : ids) ++df[id];
  }
  if (std::none_of(df.begin(), df.end(), [&](std::size_t d) { return d >= min_df; }))
    throw DataError("empty vocabulary after pruning with min_df=" + std::to_string(min_df));

  std::vector<Document> kept;
  std::size_t dropped = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    Document doc = corpus.document(i);
    const auto& ids = corpus.token_ids(i);
    std::vector<std::string> tokens;
    for (std::size_t t = 0; t < ids.size(); ++t)
      if (df[ids[t]] >= min_df) tokens.push_back(doc.tokens[t]);
    if (tokens.empty()) {
      ++dropped;
      continue;
    }
    doc.tokens = std::move(tokens);
    kept.push_back(std::move(doc));
  }
  if (kept.empty()) throw DataError("empty vocabulary after pruning");
  return {Corpus(std::move(kept)), dropped};
}

Corpus assign_validation(const Corpus& corpus, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw std::invalid_argument("validation fraction must be in (0, 1)");
  std::vector<std::size_t> train;
  for (std::size_t i = 0; i < corpus.size(); ++i)
    if (corpus.document(i).split == Split::train) train.push_back(i);
  if (train.empty()) throw DataError("no train documents to split");
  const auto n_val = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(train.size())));
  if (n_val == 0 || n_val == train.size())
    throw DataError("validation split of " + std::to_string(n_val) + " out of " +
                    std::to_string(train.size()) + " train documents");

  std::mt19937_64 rng(seed);
  std::shuffle(train.begin(), train.end(), rng);
  std::vector<Document> docs = corpus.documents();
  for (std::size_t k = 0; k < n_val; ++k) docs[train[k]].split = Split::val;
  return Corpus(std::move(docs));
}

}  // namespace wctg
