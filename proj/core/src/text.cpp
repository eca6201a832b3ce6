#include "emoesg/text.hpp"

#include <cctype>
#include <fstream>

#include "emoesg/embeddings.hpp"
#include "emoesg/errors.hpp"

namespace emoesg {

namespace {

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool is_word_byte(unsigned char c) { return std::isalnum(c) != 0 || c >= 0x80; }

}  // namespace

std::string lemmatize(std::string_view word, const VocabularyLookup& in_vocabulary) {
  if (word.size() < 4 || !in_vocabulary) return std::string(word);

  std::vector<std::string> candidates;
  if (word.size() >= 5 && ends_with(word, "ing")) {
    const std::string_view stem = word.substr(0, word.size() - 3);
    candidates.push_back(std::string(stem) + "e");
    candidates.emplace_back(stem);
  } else if (ends_with(word, "ed")) {
    candidates.emplace_back(word.substr(0, word.size() - 1));
    candidates.emplace_back(word.substr(0, word.size() - 2));
  } else if (ends_with(word, "es")) {
    candidates.emplace_back(word.substr(0, word.size() - 1));
    candidates.emplace_back(word.substr(0, word.size() - 2));
  } else if (ends_with(word, "s") && !ends_with(word, "ss")) {
    candidates.emplace_back(word.substr(0, word.size() - 1));
  }
  for (const auto& c : candidates) {
    if (!c.empty() && in_vocabulary(c)) return c;
  }
  return std::string(word);
}

std::vector<std::string> preprocess(std::string_view title, const TokenSet& stopwords,
                                    const VocabularyLookup& in_vocabulary) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&]() {
    if (current.empty()) return;
    if (!stopwords.count(current)) tokens.push_back(lemmatize(current, in_vocabulary));
    current.clear();
  };
  for (char ch : title) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_word_byte(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

std::vector<std::string> preprocess(std::string_view title, const TokenSet& stopwords, const TokenSet& vocabulary) {
  return preprocess(title, stopwords,
                    [&vocabulary](std::string_view w) { return vocabulary.count(std::string(w)) > 0; });
}

std::vector<std::string> preprocess(std::string_view title, const TokenSet& stopwords,
                                    const EmbeddingTable& vocabulary) {
  return preprocess(title, stopwords, [&vocabulary](std::string_view w) { return vocabulary.contains(w); });
}

TokenSet load_stopwords(std::istream& in) {
  TokenSet out;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t\r");
    std::string word = line.substr(first, last - first + 1);
    for (char& c : word) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    out.insert(std::move(word));
  }
  return out;
}

TokenSet load_stopwords_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open stop-word file: " + path);
  return load_stopwords(in);
}

}  // namespace emoesg
