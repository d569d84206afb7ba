#include "logiprep/tokenizer.hpp"

#include <fstream>

#include "logiprep/sha256.hpp"
#include "logiprep/strings.hpp"

namespace logiprep {

namespace {

bool is_continuation_byte(char c) { return (static_cast<unsigned char>(c) & 0xC0) == 0x80; }

std::size_t count_code_points(std::string_view s) {
  std::size_t n = 0;
  for (char c : s) n += !is_continuation_byte(c);
  return n;
}

}  // namespace

SubwordVocab::SubwordVocab(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  std::string joined;
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    const auto& t = tokens_[i];
    if (t.empty()) throw Error(ErrorKind::kConfig, "vocab line " + std::to_string(i + 1) + " is empty");
    if (!index_.emplace(t, static_cast<TokenId>(i)).second) {
      throw Error(ErrorKind::kConfig, "duplicate vocab token \"" + t + "\"");
    }
    joined += t;
    joined += '\n';
  }
  auto special = [&](const char* name) {
    const auto it = index_.find(name);
    if (it == index_.end()) throw Error(ErrorKind::kConfig, std::string("vocab lacks ") + name);
    return it->second;
  };
  specials_ = {special("[PAD]"), special("[UNK]"), special("[CLS]"), special("[SEP]"),
               special("[MASK]")};
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!is_special(static_cast<TokenId>(i))) regular_ids_.push_back(static_cast<TokenId>(i));
  }
  if (regular_ids_.empty()) throw Error(ErrorKind::kConfig, "vocab has no regular tokens");
  digest_ = sha256_hex(joined);
}

SubwordVocab SubwordVocab::parse(std::istream& in, std::string_view source) {
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  try {
    return SubwordVocab(std::move(tokens));
  } catch (const Error& e) {
    throw Error(e.kind(), std::string(source) + ": " + e.what());
  }
}

SubwordVocab SubwordVocab::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kConfig, "cannot open vocab file " + path.string());
  return parse(in, path.string());
}

const std::string& SubwordVocab::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw Error(ErrorKind::kInput, "token id " + std::to_string(id) + " out of range");
  }
  return tokens_[static_cast<std::size_t>(id)];
}

std::optional<TokenId> SubwordVocab::find(const std::string& token) const {
  const auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool SubwordVocab::is_special(TokenId id) const {
  return id == specials_.pad || id == specials_.unk || id == specials_.cls ||
         id == specials_.sep || id == specials_.mask;
}

std::vector<TokenId> encode_word(const SubwordVocab& vocab, std::string_view word) {
  const std::string lw = ascii_lower(word);
  if (lw.empty() || count_code_points(lw) > kMaxWordChars) return {vocab.specials().unk};

  std::vector<TokenId> pieces;
  std::size_t start = 0;
  std::string candidate;
  while (start < lw.size()) {
    std::optional<TokenId> hit;
    std::size_t end = lw.size();
    while (end > start) {
      candidate.clear();
      if (start > 0) candidate += kContinuationPrefix;
      candidate.append(lw, start, end - start);
      if ((hit = vocab.find(candidate))) break;
      do {
        --end;
      } while (end > start && is_continuation_byte(lw[end]));
    }
    if (!hit) return {vocab.specials().unk};
    pieces.push_back(*hit);
    start = end;
  }
  return pieces;
}

EncodedSentence encode(const SubwordVocab& vocab, std::span<const std::string> words) {
  EncodedSentence out;
  out.ids.push_back(vocab.specials().cls);
  for (const auto& w : words) {
    const auto pieces = encode_word(vocab, w);
    const std::size_t begin = out.ids.size();
    out.ids.insert(out.ids.end(), pieces.begin(), pieces.end());
    out.word_spans.push_back({begin, out.ids.size()});
  }
  out.ids.push_back(vocab.specials().sep);
  if (out.ids.size() > kMaxSequenceLength) throw OverLengthError(out.ids.size());
  return out;
}

std::string decode(const SubwordVocab& vocab, std::span<const TokenId> ids) {
  const auto& sp = vocab.specials();
  std::string out;
  for (const auto id : ids) {
    const auto& tok = vocab.token(id);
    if (id == sp.pad || id == sp.cls || id == sp.sep || id == sp.mask) continue;
    if (tok.size() > kContinuationPrefix.size() && tok.starts_with(kContinuationPrefix)) {
      out.append(tok, kContinuationPrefix.size());
      continue;
    }
    if (!out.empty()) out += ' ';
    out += tok;
  }
  return out;
}

}  // namespace logiprep
