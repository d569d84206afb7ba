#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "logiprep/error.hpp"

namespace logiprep {

using TokenId = std::int32_t;

inline constexpr std::size_t kMaxSequenceLength = 128;  // including [CLS]/[SEP]
inline constexpr std::size_t kMaxWordChars = 100;       // longer words become [UNK]
inline constexpr std::string_view kContinuationPrefix = "##";

struct SpecialIds {
  TokenId pad = 0;
  TokenId unk = 0;
  TokenId cls = 0;
  TokenId sep = 0;
  TokenId mask = 0;
};

// Uncased WordPiece vocabulary; token id = position in the vocab file.
class SubwordVocab {
 public:
  explicit SubwordVocab(std::vector<std::string> tokens);

  static SubwordVocab parse(std::istream& in, std::string_view source);
  static SubwordVocab load(const std::filesystem::path& path);

  std::size_t size() const { return tokens_.size(); }
  const std::string& token(TokenId id) const;
  std::optional<TokenId> find(const std::string& token) const;
  const SpecialIds& specials() const { return specials_; }
  bool is_special(TokenId id) const;

  // Ids that are not one of the five specials, ascending.
  const std::vector<TokenId>& regular_ids() const { return regular_ids_; }

  // SHA-256 over the tokens, one per line.
  const std::string& digest() const { return digest_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
  SpecialIds specials_;
  std::vector<TokenId> regular_ids_;
  std::string digest_;
};

struct IndexSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  friend bool operator==(const IndexSpan&, const IndexSpan&) = default;
};

struct EncodedSentence {
  std::vector<TokenId> ids;          // [CLS] ... [SEP]
  std::vector<IndexSpan> word_spans;  // subword positions produced by each word
};

// Raised when a sentence needs more than kMaxSequenceLength ids.
class OverLengthError : public Error {
 public:
  explicit OverLengthError(std::size_t length)
      : Error(ErrorKind::kInput, "encoded length " + std::to_string(length) + " exceeds " +
                                     std::to_string(kMaxSequenceLength)),
        length_(length) {}
  std::size_t length() const { return length_; }

 private:
  std::size_t length_;
};

// Greedy longest-match-first segmentation of one lowercased word; a word
// with an unmatchable remainder is a single [UNK].
std::vector<TokenId> encode_word(const SubwordVocab& vocab, std::string_view word);

EncodedSentence encode(const SubwordVocab& vocab, std::span<const std::string> words);

// Drops [PAD]/[CLS]/[SEP]/[MASK], glues "##" continuations, keeps "[UNK]".
std::string decode(const SubwordVocab& vocab, std::span<const TokenId> ids);

}  // namespace logiprep
