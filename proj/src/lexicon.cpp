#include "logiprep/lexicon.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "logiprep/error.hpp"

namespace logiprep {

namespace {

constexpr std::size_t kMaxPhraseWords = 4;

std::vector<std::string> split_spaces(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && s[i] == ' ') ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ') ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

KeywordEntry make_entry(std::string_view phrase, Polarity polarity) {
  return KeywordEntry{split_spaces(phrase), polarity};
}

}  // namespace

std::string_view polarity_name(Polarity p) {
  return p == Polarity::kPositive ? "POS" : "NEG";
}

std::string KeywordEntry::text() const {
  std::string out;
  for (const auto& w : phrase) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

KeywordLexicon::KeywordLexicon(std::vector<KeywordEntry> entries)
    : entries_(std::move(entries)) {
  trie_.emplace_back();
  std::set<std::vector<std::string>> seen;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    auto& e = entries_[i];
    if (e.phrase.empty() || e.phrase.size() > kMaxPhraseWords) {
      throw Error(ErrorKind::kConfig, "lexicon entry " + std::to_string(i) +
                                          " must have 1-4 words");
    }
    for (auto& w : e.phrase) {
      if (w.empty() || w.find_first_of(" \t\r\n") != std::string::npos) {
        throw Error(ErrorKind::kConfig,
                    "lexicon entry " + std::to_string(i) + " has an invalid word form");
      }
      w = ascii_lower(w);
    }
    if (!seen.insert(e.phrase).second) {
      throw Error(ErrorKind::kConfig, "duplicate lexicon entry \"" + e.text() + "\"");
    }
    max_words_ = std::max(max_words_, e.phrase.size());

    std::size_t node = 0;
    for (const auto& w : e.phrase) {
      auto it = trie_[node].next.find(w);
      if (it == trie_[node].next.end()) {
        trie_.emplace_back();
        it = trie_[node].next.emplace(w, trie_.size() - 1).first;
      }
      node = it->second;
    }
    trie_[node].entry = static_cast<std::ptrdiff_t>(i);
  }
}

KeywordLexicon KeywordLexicon::builtin() {
  std::vector<KeywordEntry> entries;
  // Positive implication (entailment).
  for (const char* p :
       {"therefore", "accordingly", "so", "thus", "consequently", "hence", "thence",
        "and so", "for this reason", "in consequence", "on account of", "on the grounds",
        "since", "therefrom", "thereupon", "to that end", "whence", "wherefore"}) {
    entries.push_back(make_entry(p, Polarity::kPositive));
  }
  // Negative implication (contradiction).
  for (const char* p : {"but", "although", "however", "nevertheless", "on the other hand",
                        "still", "though", "yet"}) {
    entries.push_back(make_entry(p, Polarity::kNegative));
  }
  return KeywordLexicon(std::move(entries));
}

KeywordLexicon KeywordLexicon::parse(std::istream& in, std::string_view source) {
  std::vector<KeywordEntry> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto where = [&] { return std::string(source) + ":" + std::to_string(lineno); };
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error(ErrorKind::kConfig, where() + ": expected POS|NEG<TAB>phrase");
    }
    const std::string_view tag(line.data(), tab);
    Polarity polarity;
    if (tag == "POS") {
      polarity = Polarity::kPositive;
    } else if (tag == "NEG") {
      polarity = Polarity::kNegative;
    } else {
      throw Error(ErrorKind::kConfig, where() + ": unknown polarity \"" + std::string(tag) + "\"");
    }
    auto words = split_spaces(std::string_view(line).substr(tab + 1));
    if (words.empty()) throw Error(ErrorKind::kConfig, where() + ": empty phrase");
    entries.push_back(KeywordEntry{std::move(words), polarity});
  }
  return KeywordLexicon(std::move(entries));
}

KeywordLexicon KeywordLexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kConfig, "cannot open lexicon file " + path.string());
  return parse(in, path.string());
}

std::size_t KeywordLexicon::count(Polarity p) const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.polarity == p;
  return n;
}

std::string KeywordLexicon::serialize() const {
  std::ostringstream out;
  for (const auto& e : entries_) out << polarity_name(e.polarity) << '\t' << e.text() << '\n';
  return out.str();
}

std::vector<KeywordMatch> KeywordLexicon::match(std::span<const std::string> words) const {
  std::vector<KeywordMatch> matches;
  std::vector<std::string> lowered;
  lowered.reserve(words.size());
  for (const auto& w : words) lowered.push_back(ascii_lower(w));

  for (std::size_t start = 0; start < lowered.size(); ++start) {
    std::size_t node = 0;
    for (std::size_t end = start; end < lowered.size() && end - start < max_words_; ++end) {
      const auto it = trie_[node].next.find(lowered[end]);
      if (it == trie_[node].next.end()) break;
      node = it->second;
      if (trie_[node].entry >= 0) {
        matches.push_back({static_cast<std::size_t>(trie_[node].entry), start, end + 1});
      }
    }
  }
  return matches;
}

}  // namespace logiprep
