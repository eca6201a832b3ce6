#include "emoesg/embeddings.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include "emoesg/errors.hpp"
#include "emoesg/log.hpp"
#include "emoesg/numeric.hpp"

namespace emoesg {

namespace {

bool is_lowercase_token(std::string_view token) {
  return std::none_of(token.begin(), token.end(),
                      [](unsigned char c) { return std::isupper(c) != 0; });
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

void check_vector(std::size_t dimension, std::span<const double> vec) {
  if (vec.size() != dimension) {
    throw std::invalid_argument("vector has " + std::to_string(vec.size()) +
                                " components, table dimension is " + std::to_string(dimension));
  }
  for (double x : vec) {
    if (!std::isfinite(x)) throw std::invalid_argument("non-finite vector component");
  }
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  CompensatedSum acc;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc.add(d * d);
  }
  return acc.value();
}

}  // namespace

EmbeddingTable::EmbeddingTable(std::size_t dimension) : dimension_(dimension) {
  if (dimension == 0) throw std::invalid_argument("embedding dimension must be positive");
}

bool EmbeddingTable::contains(std::string_view token) const {
  return index_.find(std::string(token)) != index_.end();
}

std::span<const double> EmbeddingTable::find(std::string_view token) const {
  const auto it = index_.find(std::string(token));
  if (it == index_.end()) return {};
  return row(it->second);
}

std::span<const double> EmbeddingTable::at(std::string_view token) const {
  auto v = find(token);
  if (v.empty()) throw std::out_of_range("token not in embedding table: " + std::string(token));
  return v;
}

std::span<const double> EmbeddingTable::row(std::size_t i) const {
  return {data_.data() + i * dimension_, dimension_};
}

void EmbeddingTable::add(std::string token, std::span<const double> vec) {
  if (token.empty()) throw std::invalid_argument("empty token");
  if (!is_lowercase_token(token)) throw std::invalid_argument("token is not lowercase: " + token);
  if (index_.count(token)) throw std::invalid_argument("duplicate token: " + token);
  check_vector(dimension_, vec);
  index_.emplace(token, tokens_.size());
  tokens_.push_back(std::move(token));
  data_.insert(data_.end(), vec.begin(), vec.end());
}

void EmbeddingTable::assign(std::string_view token, std::span<const double> vec) {
  const auto it = index_.find(std::string(token));
  if (it == index_.end()) throw std::out_of_range("token not in embedding table: " + std::string(token));
  check_vector(dimension_, vec);
  std::copy(vec.begin(), vec.end(), data_.begin() + static_cast<std::ptrdiff_t>(it->second * dimension_));
}

EmbeddingTable load_embeddings(std::istream& in, const std::string& source_name) {
  std::optional<EmbeddingTable> table;
  std::string line;
  std::vector<double> values;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view rest = line;
    auto next_field = [&rest]() -> std::string_view {
      const auto start = rest.find_first_not_of(" \t");
      if (start == std::string_view::npos) {
        rest = {};
        return {};
      }
      rest.remove_prefix(start);
      const auto end = rest.find_first_of(" \t");
      std::string_view field = rest.substr(0, end);
      rest.remove_prefix(end == std::string_view::npos ? rest.size() : end);
      return field;
    };

    const std::string_view token = next_field();
    if (token.empty()) continue;
    values.clear();
    for (std::string_view field = next_field(); !field.empty(); field = next_field()) {
      double x = 0.0;
      if (!parse_real(field, x)) {
        throw DataError::at(source_name, line_no, "non-numeric component '" + std::string(field) + "'");
      }
      values.push_back(x);
    }
    if (!table) {
      if (values.empty()) throw DataError::at(source_name, line_no, "line has no vector components");
      table.emplace(values.size());
    } else if (values.size() != table->dimension()) {
      throw DataError::at(source_name, line_no,
                          "dimension mismatch: expected " + std::to_string(table->dimension()) +
                              " components, found " + std::to_string(values.size()));
    }
    if (table->contains(token)) {
      throw DataError::at(source_name, line_no, "duplicate token '" + std::string(token) + "'");
    }
    try {
      table->add(std::string(token), values);
    } catch (const std::invalid_argument& e) {
      throw DataError::at(source_name, line_no, e.what());
    }
  }
  if (!table) throw DataError(source_name + ": no embedding vectors found");
  return std::move(*table);
}

EmbeddingTable load_embeddings_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embeddings file: " + path);
  return load_embeddings(in, path);
}

void write_embeddings(std::ostream& out, const EmbeddingTable& table) {
  for (std::size_t i = 0; i < table.size(); ++i) {
    out << table.tokens()[i];
    for (double x : table.row(i)) out << ' ' << format_shortest(x);
    out << '\n';
  }
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw std::invalid_argument("cosine_similarity: length mismatch");
  CompensatedSum dot, uu, vv;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot.add(u[i] * v[i]);
    uu.add(u[i] * u[i]);
    vv.add(v[i] * v[i]);
  }
  const double denom = std::sqrt(uu.value()) * std::sqrt(vv.value());
  if (!(denom > 0.0)) throw std::invalid_argument("cosine_similarity: zero-norm vector");
  return std::clamp(dot.value() / denom, -1.0, 1.0);
}

SynonymLexicon::SynonymLexicon(EmotionArray<std::vector<std::string>> synonyms)
    : synonyms_(std::move(synonyms)) {
  for (Emotion e : kAllEmotions) {
    const auto& list = synonyms_[index_of(e)];
    if (list.empty()) {
      throw std::invalid_argument("synonym list for '" + std::string(emotion_name(e)) + "' is empty");
    }
    std::set<std::string> seen;
    for (const auto& s : list) {
      if (s.empty()) throw std::invalid_argument("empty synonym for '" + std::string(emotion_name(e)) + "'");
      if (!seen.insert(s).second) {
        throw std::invalid_argument("duplicate synonym '" + s + "' for '" + std::string(emotion_name(e)) + "'");
      }
    }
  }
}

SynonymLexicon default_synonym_lexicon() {
  EmotionArray<std::vector<std::string>> s;
  s[index_of(Emotion::happy)] = {"joyful", "content", "cheerful"};
  s[index_of(Emotion::sad)] = {"unhappy", "sorrowful", "depressed"};
  s[index_of(Emotion::angry)] = {"mad", "furious", "irritated"};
  s[index_of(Emotion::fear)] = {"scared", "afraid", "terrified"};
  s[index_of(Emotion::surprise)] = {"amazed", "shocked", "astonished"};
  s[index_of(Emotion::trust)] = {"confident", "hopeful", "assured"};
  s[index_of(Emotion::disgust)] = {"revolted", "repelled", "nauseated"};
  s[index_of(Emotion::anticipation)] = {"expectation", "hope", "looking forward"};
  return SynonymLexicon(std::move(s));
}

SynonymLexicon load_synonym_lexicon(std::istream& in, const std::string& source_name) {
  EmotionArray<std::vector<std::string>> lists;
  EmotionArray<bool> seen{};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto colon = body.find(':');
    if (colon == std::string_view::npos) {
      throw DataError::at(source_name, line_no, "expected 'emotion: syn1, syn2, ...'");
    }
    const std::string label = to_lower(trim(body.substr(0, colon)));
    const auto emotion = parse_emotion(label);
    if (!emotion) throw DataError::at(source_name, line_no, "unknown emotion '" + label + "'");
    if (seen[index_of(*emotion)]) {
      throw DataError::at(source_name, line_no, "emotion '" + label + "' listed twice");
    }
    seen[index_of(*emotion)] = true;

    std::string_view rest = body.substr(colon + 1);
    auto& list = lists[index_of(*emotion)];
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const std::string syn = to_lower(trim(rest.substr(0, comma)));
      if (!syn.empty()) {
        if (std::find(list.begin(), list.end(), syn) != list.end()) {
          throw DataError::at(source_name, line_no, "duplicate synonym '" + syn + "'");
        }
        list.push_back(syn);
      }
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (list.empty()) throw DataError::at(source_name, line_no, "emotion '" + label + "' has no synonyms");
  }
  for (Emotion e : kAllEmotions) {
    if (!seen[index_of(e)]) {
      throw DataError(source_name + ": missing synonym line for emotion '" + std::string(emotion_name(e)) + "'");
    }
  }
  return SynonymLexicon(std::move(lists));
}

SynonymLexicon load_synonym_lexicon_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open synonym lexicon: " + path);
  return load_synonym_lexicon(in, path);
}

std::string_view retrofit_mode_name(RetrofitMode mode) {
  return mode == RetrofitMode::paper_mean ? "paper-mean" : "faruqui";
}

std::optional<RetrofitMode> parse_retrofit_mode(std::string_view name) {
  if (name == "paper-mean") return RetrofitMode::paper_mean;
  if (name == "faruqui") return RetrofitMode::faruqui;
  return std::nullopt;
}

void RetrofitConfig::validate() const {
  if (iterations < 1) throw ConfigError("retrofit iterations must be >= 1");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("retrofit alpha must be a non-negative real");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("retrofit beta must be a non-negative real");
}

namespace {

struct Neighborhood {
  std::vector<std::string> neighbors;
  std::vector<double> sum;  // fixed sum of original neighbor vectors
};

Neighborhood collect_neighbors(const EmbeddingTable& table, Emotion e, const SynonymLexicon& lexicon,
                               std::vector<std::string>* skipped) {
  const std::string word(emotion_name(e));
  Neighborhood nb;
  nb.sum.assign(table.dimension(), 0.0);
  std::vector<CompensatedSum> acc(table.dimension());
  for (const auto& syn : lexicon.synonyms(e)) {
    if (syn == word) continue;
    const auto v = table.find(syn);
    if (v.empty()) {
      if (syn.find(' ') != std::string::npos) {
        log().info("retrofit: phrase '{}' of '{}' has no single-token vector, skipped", syn, word);
      } else {
        log().warn("retrofit: synonym '{}' of '{}' not in vocabulary, skipped", syn, word);
      }
      if (skipped) skipped->push_back(word + ":" + syn);
      continue;
    }
    nb.neighbors.push_back(syn);
    for (std::size_t d = 0; d < v.size(); ++d) acc[d].add(v[d]);
  }
  for (std::size_t d = 0; d < nb.sum.size(); ++d) nb.sum[d] = acc[d].value();
  return nb;
}

}  // namespace

EmbeddingTable retrofit(const EmbeddingTable& table, const SynonymLexicon& lexicon, const RetrofitConfig& config,
                        RetrofitReport* report) {
  config.validate();
  EmbeddingTable out = table;
  std::vector<std::string> skipped;

  for (Emotion e : kAllEmotions) {
    const std::string word(emotion_name(e));
    const auto original = table.find(word);
    if (original.empty()) throw DataError("retrofit: emotion word '" + word + "' missing from embedding table");

    const Neighborhood nb = collect_neighbors(table, e, lexicon, &skipped);
    const double m = static_cast<double>(nb.neighbors.size());
    if (nb.neighbors.empty()) {
      throw DataError("retrofit: emotion '" + word + "' has no synonyms in the embedding vocabulary");
    }
    if (report) report->neighbor_counts[index_of(e)] = nb.neighbors.size();

    std::vector<double> q(original.begin(), original.end());
    if (config.mode == RetrofitMode::paper_mean) {
      for (int it = 0; it < config.iterations; ++it) {
        for (std::size_t d = 0; d < q.size(); ++d) q[d] = (q[d] + nb.sum[d]) / (m + 1.0);
      }
    } else {
      const double denom = config.alpha + config.beta * m;
      if (!(denom > 0.0)) {
        throw ConfigError("retrofit: alpha + beta * neighbors must be positive for '" + word + "'");
      }
      for (int it = 0; it < config.iterations; ++it) {
        for (std::size_t d = 0; d < q.size(); ++d) {
          q[d] = (config.alpha * original[d] + config.beta * nb.sum[d]) / denom;
        }
      }
    }
    out.assign(word, q);
  }
  if (report) report->skipped_synonyms = std::move(skipped);
  return out;
}

double retrofit_objective(const EmbeddingTable& original, const EmbeddingTable& current,
                          const SynonymLexicon& lexicon, const RetrofitConfig& config) {
  if (original.dimension() != current.dimension()) {
    throw DataError("retrofit_objective: tables differ in dimension");
  }
  CompensatedSum total;
  for (Emotion e : kAllEmotions) {
    const std::string word(emotion_name(e));
    const auto q = original.find(word);
    const auto q_hat = current.find(word);
    if (q.empty() || q_hat.empty()) {
      throw DataError("retrofit_objective: emotion word '" + word + "' missing");
    }
    total.add(config.alpha * squared_distance(q_hat, q));
    for (const auto& syn : lexicon.synonyms(e)) {
      if (syn == word) continue;
      const auto nb = current.find(syn);
      if (nb.empty()) continue;
      total.add(config.beta * squared_distance(q_hat, nb));
    }
  }
  return total.value();
}

}  // namespace emoesg
