#pragma once

#include <functional>
#include <istream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace emoesg {

class EmbeddingTable;

using TokenSet = std::unordered_set<std::string>;

/// Membership test against the lemmatizer's reference vocabulary.
using VocabularyLookup = std::function<bool(std::string_view)>;

/// Rule-based reducer. Candidate reductions are tried in order and the
/// first one found in the vocabulary wins; otherwise the word is returned
/// unchanged. Words shorter than four characters are never reduced.
///
///   -ing : stem + "e", then stem      (rating -> rate, jumping -> jump)
///   -ed  : drop "d", then drop "ed"   (rated -> rate, jumped -> jump)
///   -es  : drop "s", then drop "es"   (rates -> rate, watches -> watch)
///   -s   : drop "s" (not after "s")   (beats -> beat)
std::string lemmatize(std::string_view word, const VocabularyLookup& in_vocabulary);

/// Splits on non-alphanumeric ASCII boundaries (bytes >= 0x80 are kept as
/// word characters so UTF-8 words stay whole), lowercases, drops stop words
/// and lemmatizes against the vocabulary. May return an empty list.
std::vector<std::string> preprocess(std::string_view title, const TokenSet& stopwords,
                                    const VocabularyLookup& in_vocabulary);
std::vector<std::string> preprocess(std::string_view title, const TokenSet& stopwords, const TokenSet& vocabulary);
std::vector<std::string> preprocess(std::string_view title, const TokenSet& stopwords,
                                    const EmbeddingTable& vocabulary);

/// One lowercase word per line; '#' starts a comment line.
TokenSet load_stopwords(std::istream& in);
TokenSet load_stopwords_file(const std::string& path);

}  // namespace emoesg
