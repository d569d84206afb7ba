#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace logiprep {

struct RawDocument {
  std::uint64_t doc_id = 0;
  std::optional<std::string> title;
  std::string body;
};

// Words of one sentence plus their byte offsets into the sentence text.
struct WordSegmentation {
  std::vector<std::string> words;
  std::vector<std::size_t> offsets;
};

struct SegmentedSentence {
  std::uint64_t doc_id = 0;
  std::uint32_t sent_idx = 0;
  std::string text;
  std::vector<std::string> words;
  std::vector<std::size_t> offsets;  // parallel to words
};

// Sentences outside [kMinSentenceWords, kMaxSentenceWords] are dropped
// before curation.
inline constexpr std::size_t kMinSentenceWords = 5;
inline constexpr std::size_t kMaxSentenceWords = 128;

inline bool within_length_limits(const SegmentedSentence& s) {
  return s.words.size() >= kMinSentenceWords && s.words.size() <= kMaxSentenceWords;
}

// Byte offset of the first invalid UTF-8 sequence, if any.
std::optional<std::size_t> find_invalid_utf8(std::string_view s);

// Abbreviations that never end a sentence ("Dr.", "e.g.", "U.S." ...).
const std::vector<std::string>& sentence_abbreviations();

// Rule-based splitter: a boundary is one of . ! ? (plus closing quotes or
// brackets) followed by whitespace and an uppercase letter or digit, unless
// the period ends a stop-listed abbreviation or sits inside a number.
// Throws Error(kInput) naming doc_id and byte offset on malformed UTF-8.
std::vector<SegmentedSentence> split_sentences(const RawDocument& doc);

// Whitespace split, then leading and trailing punctuation peeled into
// separate words. Internal hyphens and apostrophes stay attached.
WordSegmentation tokenize_words(std::string_view text);

enum class InputFormat { kPlainText, kJsonLines };

// Streams documents from a file or a directory of files (sorted by name).
// Plain text: blank lines separate documents unless one_doc_per_file is set;
// ids are assigned sequentially. JSON lines: fields `id`, `title`, `text`.
class DocumentReader {
 public:
  DocumentReader(const std::filesystem::path& input, InputFormat format,
                 bool one_doc_per_file = false);
  ~DocumentReader();
  DocumentReader(DocumentReader&&) noexcept;
  DocumentReader& operator=(DocumentReader&&) noexcept;

  std::optional<RawDocument> next();

  // Reads the remaining documents.
  std::vector<RawDocument> read_all();

 private:
  struct State;
  std::unique_ptr<State> state_;
};

}  // namespace logiprep
