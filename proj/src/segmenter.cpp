#include "logiprep/segmenter.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

#include "logiprep/error.hpp"

namespace logiprep {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_upper_or_digit(char c) { return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }
bool is_opener(char c) { return c == '"' || c == '\'' || c == '(' || c == '['; }

// Decodes one code point starting at s[i]. Invalid bytes decode as
// themselves with length 1 so arbitrary input is still segmentable.
std::pair<char32_t, std::size_t> decode_at(std::string_view s, std::size_t i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  auto cont = [&](std::size_t k) {
    return i + k < s.size() && (static_cast<unsigned char>(s[i + k]) & 0xC0) == 0x80;
  };
  auto byte = [&](std::size_t k) { return static_cast<char32_t>(s[i + k] & 0x3F); };
  if (b0 < 0x80) return {b0, 1};
  if ((b0 & 0xE0) == 0xC0 && cont(1)) return {((b0 & 0x1Fu) << 6) | byte(1), 2};
  if ((b0 & 0xF0) == 0xE0 && cont(1) && cont(2)) {
    return {((b0 & 0x0Fu) << 12) | (byte(1) << 6) | byte(2), 3};
  }
  if ((b0 & 0xF8) == 0xF0 && cont(1) && cont(2) && cont(3)) {
    return {((b0 & 0x07u) << 18) | (byte(1) << 12) | (byte(2) << 6) | byte(3), 4};
  }
  return {b0, 1};
}

bool is_punct(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
           (cp >= 0x5B && cp <= 0x60) || (cp >= 0x7B && cp <= 0x7E);
  }
  switch (cp) {
    case 0x00AB:  // «
    case 0x00BB:  // »
    case 0x2013:  // en dash
    case 0x2014:  // em dash
    case 0x2018:
    case 0x2019:
    case 0x201C:
    case 0x201D:
    case 0x2026:  // ellipsis
      return true;
    default:
      return false;
  }
}

std::string_view trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

bool ends_abbreviation(std::string_view body, std::size_t period) {
  std::size_t start = period;
  while (start > 0 && !is_space(body[start - 1])) --start;
  while (start < period && is_opener(body[start])) ++start;
  const auto token = body.substr(start, period - start + 1);
  static const std::set<std::string, std::less<>> stop(sentence_abbreviations().begin(),
                                                        sentence_abbreviations().end());
  return stop.contains(token);
}

bool inside_number(std::string_view body, std::size_t period) {
  return period > 0 && period + 1 < body.size() && is_digit(body[period - 1]) &&
         is_digit(body[period + 1]);
}

}  // namespace

std::optional<std::size_t> find_invalid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    std::size_t len;
    char32_t min;
    char32_t cp;
    if (b0 < 0x80) {
      ++i;
      continue;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2, min = 0x80, cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3, min = 0x800, cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4, min = 0x10000, cp = b0 & 0x07;
    } else {
      return i;
    }
    if (i + len > s.size()) return i;
    for (std::size_t k = 1; k < len; ++k) {
      const auto b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xC0) != 0x80) return i;
      cp = (cp << 6) | (b & 0x3F);
    }
    if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return i;
    i += len;
  }
  return std::nullopt;
}

const std::vector<std::string>& sentence_abbreviations() {
  static const std::vector<std::string> list = {
      "Mr.",   "Mrs.",  "Ms.",  "Dr.",  "Prof.", "Sr.",  "Jr.",   "St.",   "Mt.",
      "Gen.",  "Col.",  "Capt.", "Lt.", "Sgt.",  "Rev.", "Gov.",  "Sen.",  "Rep.",
      "vs.",   "etc.",  "e.g.", "i.e.", "cf.",   "ca.",  "al.",   "U.S.",  "U.K.",
      "U.N.",  "Inc.",  "Ltd.", "Co.",  "Corp.", "No.",  "Vol.",  "Jan.",  "Feb.",
      "Mar.",  "Apr.",  "Jun.", "Jul.", "Aug.",  "Sep.", "Sept.", "Oct.",  "Nov.",
      "Dec.",
  };
  return list;
}

std::vector<SegmentedSentence> split_sentences(const RawDocument& doc) {
  if (const auto bad = find_invalid_utf8(doc.body)) {
    throw Error(ErrorKind::kInput, "doc " + std::to_string(doc.doc_id) +
                                       ": malformed UTF-8 at byte offset " +
                                       std::to_string(*bad));
  }
  const std::string_view body = doc.body;
  std::vector<std::string_view> pieces;
  std::size_t begin = 0;
  for (std::size_t i = 0; i < body.size(); ++i) {
    const char c = body[i];
    if (c != '.' && c != '!' && c != '?') continue;
    std::size_t j = i + 1;
    while (j < body.size() && is_closer(body[j])) ++j;
    if (j >= body.size() || !is_space(body[j])) continue;
    std::size_t k = j;
    while (k < body.size() && is_space(body[k])) ++k;
    if (k >= body.size()) continue;
    std::size_t first = k;
    if (is_opener(body[first])) ++first;
    if (first >= body.size() || !is_upper_or_digit(body[first])) continue;
    if (c == '.' && (ends_abbreviation(body, i) || inside_number(body, i))) continue;
    pieces.push_back(body.substr(begin, j - begin));
    begin = k;
    i = k - 1;
  }
  pieces.push_back(body.substr(begin));

  std::vector<SegmentedSentence> out;
  for (auto piece : pieces) {
    piece = trim(piece);
    if (piece.empty()) continue;
    auto seg = tokenize_words(piece);
    SegmentedSentence s;
    s.doc_id = doc.doc_id;
    s.sent_idx = static_cast<std::uint32_t>(out.size());
    s.text = std::string(piece);
    s.words = std::move(seg.words);
    s.offsets = std::move(seg.offsets);
    out.push_back(std::move(s));
  }
  return out;
}

WordSegmentation tokenize_words(std::string_view text) {
  WordSegmentation out;
  auto emit = [&](std::size_t b, std::size_t e) {
    out.words.emplace_back(text.substr(b, e - b));
    out.offsets.push_back(b);
  };

  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    if (i >= text.size()) break;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;

    struct Unit {
      std::size_t begin;
      std::size_t end;
      bool punct;
    };
    std::vector<Unit> units;
    for (std::size_t p = i; p < j;) {
      auto [cp, len] = decode_at(text.substr(0, j), p);
      units.push_back({p, p + len, is_punct(cp)});
      p += len;
    }
    std::size_t lead = 0;
    while (lead < units.size() && units[lead].punct) ++lead;
    std::size_t tail = units.size();
    while (tail > lead && units[tail - 1].punct) --tail;

    for (std::size_t u = 0; u < lead; ++u) emit(units[u].begin, units[u].end);
    if (tail > lead) emit(units[lead].begin, units[tail - 1].end);
    for (std::size_t u = tail; u < units.size(); ++u) emit(units[u].begin, units[u].end);
    i = j;
  }
  return out;
}

// ---------------------------------------------------------------------------

struct DocumentReader::State {
  std::vector<std::filesystem::path> files;
  std::size_t file_idx = 0;
  std::ifstream in;
  std::size_t lineno = 0;
  InputFormat format;
  bool one_doc_per_file;
  std::uint64_t next_id = 0;
  std::set<std::uint64_t> seen_ids;

  bool open_next() {
    while (file_idx < files.size()) {
      in = std::ifstream(files[file_idx], std::ios::binary);
      if (!in) throw Error(ErrorKind::kIo, "cannot open input file " + files[file_idx].string());
      ++file_idx;
      lineno = 0;
      return true;
    }
    return false;
  }

  std::string where() const {
    return files[file_idx - 1].string() + ":" + std::to_string(lineno);
  }
};

DocumentReader::DocumentReader(const std::filesystem::path& input, InputFormat format,
                               bool one_doc_per_file)
    : state_(std::make_unique<State>()) {
  state_->format = format;
  state_->one_doc_per_file = one_doc_per_file;
  std::error_code ec;
  if (std::filesystem::is_directory(input, ec)) {
    for (const auto& e : std::filesystem::directory_iterator(input)) {
      if (e.is_regular_file()) state_->files.push_back(e.path());
    }
    std::sort(state_->files.begin(), state_->files.end());
  } else if (std::filesystem::is_regular_file(input, ec)) {
    state_->files.push_back(input);
  } else {
    throw Error(ErrorKind::kInput, "input path not found: " + input.string());
  }
}

DocumentReader::~DocumentReader() = default;
DocumentReader::DocumentReader(DocumentReader&&) noexcept = default;
DocumentReader& DocumentReader::operator=(DocumentReader&&) noexcept = default;

std::optional<RawDocument> DocumentReader::next() {
  auto& st = *state_;
  if (st.file_idx == 0 && !st.open_next()) return std::nullopt;
  std::string line;
  for (;;) {
    if (st.format == InputFormat::kJsonLines) {
      while (std::getline(st.in, line)) {
        ++st.lineno;
        if (trim(line).empty()) continue;
        nlohmann::json j;
        try {
          j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
          throw Error(ErrorKind::kInput, st.where() + ": malformed JSON line");
        }
        if (!j.is_object() || !j.contains("text") || !j["text"].is_string() ||
            !j.contains("id")) {
          throw Error(ErrorKind::kInput, st.where() + ": expected object with id and text");
        }
        RawDocument doc;
        const auto& id = j["id"];
        if (id.is_number_unsigned()) {
          doc.doc_id = id.get<std::uint64_t>();
        } else if (id.is_string()) {
          const auto s = id.get<std::string>();
          if (s.empty() || s.size() > 20 ||
              !std::all_of(s.begin(), s.end(), [](char c) { return is_digit(c); })) {
            throw Error(ErrorKind::kInput, st.where() + ": id must be an unsigned integer");
          }
          doc.doc_id = std::stoull(s);
        } else {
          throw Error(ErrorKind::kInput, st.where() + ": id must be an unsigned integer");
        }
        if (j.contains("title") && j["title"].is_string()) doc.title = j["title"].get<std::string>();
        doc.body = j["text"].get<std::string>();
        if (!st.seen_ids.insert(doc.doc_id).second) {
          throw Error(ErrorKind::kInput,
                      st.where() + ": duplicate document id " + std::to_string(doc.doc_id));
        }
        return doc;
      }
    } else {
      std::string body;
      bool any = false;
      while (std::getline(st.in, line)) {
        ++st.lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!st.one_doc_per_file && trim(line).empty()) {
          if (any) break;
          continue;
        }
        if (any) body += '\n';
        body += line;
        any = any || !trim(line).empty();
      }
      if (any) {
        RawDocument doc;
        doc.doc_id = st.next_id++;
        doc.body = std::move(body);
        return doc;
      }
    }
    if (!st.open_next()) return std::nullopt;
  }
}

std::vector<RawDocument> DocumentReader::read_all() {
  std::vector<RawDocument> docs;
  while (auto d = next()) docs.push_back(std::move(*d));
  return docs;
}

}  // namespace logiprep
