#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "logiprep/strings.hpp"

namespace logiprep {

enum class Polarity : std::uint8_t { kPositive, kNegative };

std::string_view polarity_name(Polarity p);

struct KeywordEntry {
  std::vector<std::string> phrase;  // lowercase word forms, 1-4 words
  Polarity polarity = Polarity::kPositive;

  std::string text() const;  // words joined by single spaces
};

// Half-open word span [start, end) of one lexicon entry inside a sentence.
struct KeywordMatch {
  std::size_t entry = 0;  // index into KeywordLexicon::entries()
  std::size_t start = 0;
  std::size_t end = 0;

  friend bool operator==(const KeywordMatch&, const KeywordMatch&) = default;
};

// Immutable set of implication keywords with word-level phrase matching.
//
// Matching is case-insensitive and aligned to word boundaries: a phrase
// matches a contiguous run of words, never a substring of a word. Every
// distinct entry that matches is reported, so "and so" also yields "so".
class KeywordLexicon {
 public:
  explicit KeywordLexicon(std::vector<KeywordEntry> entries);

  // The positive/negative implication keywords used to build the
  // Implication corpus (18 positive, 8 negative).
  static KeywordLexicon builtin();

  // Text format: `POS|NEG<TAB>space separated phrase`, `#` comments.
  static KeywordLexicon parse(std::istream& in, std::string_view source);
  static KeywordLexicon load(const std::filesystem::path& path);

  const std::vector<KeywordEntry>& entries() const { return entries_; }
  const KeywordEntry& entry(std::size_t i) const { return entries_.at(i); }
  std::size_t size() const { return entries_.size(); }
  std::size_t count(Polarity p) const;
  std::size_t max_phrase_words() const { return max_words_; }

  // Lexicon file rendering, stable across runs (used for digests).
  std::string serialize() const;

  // Matches sorted by (start, end).
  std::vector<KeywordMatch> match(std::span<const std::string> words) const;

 private:
  struct Node {
    std::map<std::string, std::size_t, std::less<>> next;
    std::ptrdiff_t entry = -1;
  };

  std::vector<KeywordEntry> entries_;
  std::vector<Node> trie_;
  std::size_t max_words_ = 0;
};

inline std::vector<KeywordMatch> match_keywords(std::span<const std::string> words,
                                                const KeywordLexicon& lexicon) {
  return lexicon.match(words);
}

}  // namespace logiprep
