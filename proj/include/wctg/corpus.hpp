#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace wctg {

enum class Split { train, val, test };

std::string_view to_string(Split s);
std::optional<Split> parse_split(std::string_view s);

struct Document {
  std::string id;
  Split split = Split::train;
  std::string label;
  std::vector<std::string> tokens;
};

// Ordered set of strings with dense ids in insertion order.
class Vocabulary {
 public:
  // Returns the id of `word`, inserting it if new.
  std::size_t add(const std::string& word);
  std::optional<std::size_t> find(std::string_view word) const;

  const std::string& word(std::size_t id) const { return words_[id]; }
  const std::vector<std::string>& words() const { return words_; }
  std::size_t size() const { return words_.size(); }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> ids_;
};

// Immutable labeled document collection. The vocabulary and the label set
// are assigned in first-occurrence order over the document sequence.
class Corpus {
 public:
  // Validates: non-empty documents, unique ids, at least one train and one
  // test document.
  explicit Corpus(std::vector<Document> documents);

  const std::vector<Document>& documents() const { return documents_; }
  const Document& document(std::size_t i) const { return documents_[i]; }
  std::size_t size() const { return documents_.size(); }

  const Vocabulary& vocabulary() const { return vocabulary_; }
  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t label_index(const std::string& label) const;

  // Word ids of document i, in token order.
  const std::vector<std::size_t>& token_ids(std::size_t i) const { return token_ids_[i]; }

  std::size_t count(Split s) const;

 private:
  std::vector<Document> documents_;
  Vocabulary vocabulary_;
  std::vector<std::string> labels_;
  std::vector<std::vector<std::size_t>> token_ids_;
};

struct PreprocessConfig {
  std::size_t min_df = 5;
  std::unordered_set<std::string> stopwords;
  double val_fraction = 0.1;
  std::uint64_t seed = 0;
};

// Lowercase, map everything outside [a-z0-9'] to a space, split on
// whitespace. Configured stopwords are removed.
std::vector<std::string> tokenize(std::string_view text, const PreprocessConfig& config = {});

// One word per line; blank lines and '#' comments ignored. Words are
// lowercased.
std::unordered_set<std::string> load_stopwords(const std::filesystem::path& path);

// TSV: doc_id <TAB> split(train|test) <TAB> label <TAB> text.
Corpus read_corpus(std::istream& in, const PreprocessConfig& config = {});
Corpus load_corpus(const std::filesystem::path& path, const PreprocessConfig& config = {});

struct PruneResult {
  Corpus corpus;
  std::size_t dropped_documents = 0;
};

// Drops words with document frequency < min_df; documents left empty are
// dropped and counted.
PruneResult prune_vocabulary(const Corpus& corpus, std::size_t min_df);

// Moves floor(fraction * |train|) seeded-random train documents to val.
Corpus assign_validation(const Corpus& corpus, double fraction, std::uint64_t seed);

}  // namespace wctg
