#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "emoesg/emotions.hpp"

namespace emoesg {

/// Word -> fixed-dimension vector store. Entries keep their insertion order
/// so a table re-serializes in the order it was read.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dimension);

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return tokens_.size(); }
  bool contains(std::string_view token) const;

  /// Vector for `token`, or an empty span when the token is unknown.
  std::span<const double> find(std::string_view token) const;

  /// Vector for `token`; throws std::out_of_range when unknown.
  std::span<const double> at(std::string_view token) const;

  const std::vector<std::string>& tokens() const { return tokens_; }
  std::span<const double> row(std::size_t i) const;

  /// Appends an entry. Throws std::invalid_argument when the token is empty,
  /// not lowercase, already present, or the vector has the wrong length or
  /// a non-finite component.
  void add(std::string token, std::span<const double> vec);

  /// Overwrites the vector of an existing token (same validation as add).
  void assign(std::string_view token, std::span<const double> vec);

 private:
  std::size_t dimension_;
  std::vector<std::string> tokens_;
  std::vector<double> data_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Parses GloVe text: `token v1 ... vd` per line, whitespace separated.
/// Dimension is taken from the first non-blank line. Throws DataError with
/// the offending line number on dimension mismatch, a non-numeric
/// component or a duplicate token.
EmbeddingTable load_embeddings(std::istream& in, const std::string& source_name = "<embeddings>");
EmbeddingTable load_embeddings_file(const std::string& path);

/// Writes the table back in GloVe text form using shortest round-trip
/// number formatting, so load followed by write reproduces canonical input.
void write_embeddings(std::ostream& out, const EmbeddingTable& table);

/// u.v / (|u||v|), clamped to [-1, 1]. Throws std::invalid_argument on a
/// length mismatch or a zero-norm argument.
double cosine_similarity(std::span<const double> u, std::span<const double> v);

/// Emotion -> synonym list graph used as the retrofitting edge set.
class SynonymLexicon {
 public:
  /// Throws std::invalid_argument unless every emotion has a non-empty,
  /// duplicate-free list.
  explicit SynonymLexicon(EmotionArray<std::vector<std::string>> synonyms);

  const std::vector<std::string>& synonyms(Emotion e) const { return synonyms_[index_of(e)]; }

 private:
  EmotionArray<std::vector<std::string>> synonyms_;
};

/// The eight curated synonym sets shipped with the toolkit.
SynonymLexicon default_synonym_lexicon();

/// Parses `emotion: syn1, syn2, ...` lines. Emotion labels accept either
/// the Retro or the NRC spelling, case-insensitively. Blank lines and lines
/// starting with '#' are ignored.
SynonymLexicon load_synonym_lexicon(std::istream& in, const std::string& source_name = "<synonyms>");
SynonymLexicon load_synonym_lexicon_file(const std::string& path);

enum class RetrofitMode { paper_mean, faruqui };

std::string_view retrofit_mode_name(RetrofitMode mode);
std::optional<RetrofitMode> parse_retrofit_mode(std::string_view name);

struct RetrofitConfig {
  int iterations = 10;
  RetrofitMode mode = RetrofitMode::paper_mean;
  double alpha = 1.0;  // attachment weight to the original vector (faruqui)
  double beta = 1.0;   // uniform per-edge weight (faruqui)

  /// Throws ConfigError on iterations < 1 or negative weights.
  void validate() const;
};

struct RetrofitReport {
  /// Synonyms absent from the embedding vocabulary, as "emotion:synonym".
  std::vector<std::string> skipped_synonyms;
  EmotionArray<std::size_t> neighbor_counts{};
};

/// Moves the eight emotion-word vectors toward their synonym neighbors.
/// Synonym vectors are held at their original values; every other entry is
/// copied unchanged.
///
/// paper_mean: q <- (q + S) / (m + 1) each cycle, S the neighbor sum.
/// faruqui:    q <- (alpha * q_orig + beta * S) / (alpha + beta * m), the
///             coordinate minimizer of the retrofitting objective.
///
/// Throws DataError when an emotion word is missing from the table or has
/// no neighbor in the vocabulary; ConfigError on an invalid config.
EmbeddingTable retrofit(const EmbeddingTable& table, const SynonymLexicon& lexicon,
                        const RetrofitConfig& config, RetrofitReport* report = nullptr);

/// Sum over emotion words i of
///   alpha * |q_hat_i - q_i|^2 + sum over synonyms j of beta * |q_hat_i - q_hat_j|^2
/// with q from `original` and q_hat from `current`. Synonyms missing from
/// the vocabulary contribute no edge.
double retrofit_objective(const EmbeddingTable& original, const EmbeddingTable& current,
                          const SynonymLexicon& lexicon, const RetrofitConfig& config);

}  // namespace emoesg
