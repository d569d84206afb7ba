#include "logiprep/tagger.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "logiprep/counter_rng.hpp"
#include "logiprep/error.hpp"
#include "logiprep/strings.hpp"

namespace logiprep {

namespace {

constexpr char kMagic[4] = {'L', 'P', 'T', 'G'};
constexpr std::uint16_t kFormatVersion = 1;

constexpr std::string_view kStart = "-START-";
constexpr std::string_view kStart2 = "-START2-";
constexpr std::string_view kEnd = "-END-";

bool is_number(std::string_view w) {
  bool digit = false;
  for (char c : w) {
    if (c >= '0' && c <= '9') {
      digit = true;
    } else if (c != '.' && c != ',' && c != '-' && c != '/' && c != ':') {
      return false;
    }
  }
  return digit;
}

std::string normalize_word(std::string_view w) {
  if (is_number(w)) return "!NUM";
  return ascii_lower(w);
}

// Digits -> d, lowercase -> x, uppercase -> X, runs capped at 3.
std::string word_shape(std::string_view w) {
  std::string shape;
  char last = 0;
  int run = 0;
  for (char c : w) {
    char m = c;
    if (c >= '0' && c <= '9') {
      m = 'd';
    } else if (c >= 'a' && c <= 'z') {
      m = 'x';
    } else if (c >= 'A' && c <= 'Z') {
      m = 'X';
    }
    run = (m == last) ? run + 1 : 1;
    last = m;
    if (run <= 3) shape += m;
  }
  return shape;
}

class FeatureExtractor {
 public:
  explicit FeatureExtractor(std::span<const std::string> words) : words_(words) {
    norm_.reserve(words.size());
    for (const auto& w : words) norm_.push_back(normalize_word(w));
  }

  void extract(std::size_t i, std::string_view prev, std::string_view prev2,
               std::vector<std::string>& out) const {
    out.clear();
    const auto& w = words_[i];
    const auto& lw = norm_[i];
    auto add = [&](std::string_view name, std::string_view value) {
      std::string f;
      f.reserve(name.size() + 1 + value.size());
      f.append(name).append(1, ' ').append(value);
      out.push_back(std::move(f));
    };
    out.emplace_back("bias");
    if (lw == "!NUM") {
      add("w", lw);
    } else {
      add("w", w);
      add("lw", lw);
      for (std::size_t k = 1; k <= 3; ++k) {
        if (lw.size() >= k) add("s" + std::to_string(k), std::string_view(lw).substr(lw.size() - k));
      }
      add("p1", std::string_view(lw).substr(0, 1));
    }
    add("pt", prev);
    std::string pair(prev);
    pair.append(1, '|').append(prev2);
    add("pt2", pair);
    add("pw", i > 0 ? std::string_view(norm_[i - 1]) : kStart);
    add("nw", i + 1 < norm_.size() ? std::string_view(norm_[i + 1]) : kEnd);
    add("sh", word_shape(w));
  }

 private:
  std::span<const std::string> words_;
  std::vector<std::string> norm_;
};

// Little-endian byte buffer helpers for the model file.
class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u16(std::uint16_t v) { le(v); }
  void u32(std::uint32_t v) { le(v); }
  void u64(std::uint64_t v) { le(v); }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v)); }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    buf_.append(s);
  }
  void raw(std::string_view s) { buf_.append(s); }
  const std::string& bytes() const { return buf_; }

 private:
  template <typename T>
  void le(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  std::string buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)[0]); }
  std::uint16_t u16() { return le<std::uint16_t>(); }
  std::uint32_t u32() { return le<std::uint32_t>(); }
  std::uint64_t u64() { return le<std::uint64_t>(); }
  double f64() { return std::bit_cast<double>(le<std::uint64_t>()); }
  std::string str() {
    const auto n = u32();
    return std::string(take(n));
  }
  std::string_view take(std::size_t n) {
    if (n > data_.size() - pos_) throw Error(ErrorKind::kInput, "tagger model truncated");
    const auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  template <typename T>
  T le() {
    const auto s = take(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<T>(static_cast<T>(static_cast<unsigned char>(s[i])) << (8 * i));
    }
    return v;
  }
  std::string_view data_;
  std::size_t pos_ = 0;
};

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> cols;
  std::size_t b = 0;
  for (;;) {
    const auto t = line.find('\t', b);
    cols.push_back(line.substr(b, t == std::string::npos ? std::string::npos : t - b));
    if (t == std::string::npos) break;
    b = t + 1;
  }
  return cols;
}

struct AveragedWeights {
  std::vector<double> w;
  std::vector<double> total;
  std::vector<std::int64_t> stamp;
};

}  // namespace

std::vector<TaggedSentence> read_conllu(std::istream& in, std::string_view source) {
  std::vector<TaggedSentence> out;
  TaggedSentence cur;
  std::string line;
  std::size_t lineno = 0;
  auto flush = [&] {
    if (!cur.words.empty()) out.push_back(std::move(cur));
    cur = {};
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    if (line[0] == '#') continue;
    auto where = [&] { return std::string(source) + ":" + std::to_string(lineno); };
    const auto cols = split_tabs(line);
    if (cols.size() != 10) {
      throw Error(ErrorKind::kInput, where() + ": expected 10 tab-separated columns, got " +
                                         std::to_string(cols.size()));
    }
    const auto& id = cols[0];
    if (id.find('-') != std::string::npos || id.find('.') != std::string::npos) continue;
    if (id.empty() || !std::all_of(id.begin(), id.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      throw Error(ErrorKind::kInput, where() + ": bad token id \"" + id + "\"");
    }
    const auto tag = parse_pos_tag(cols[3]);
    if (!tag) throw Error(ErrorKind::kInput, where() + ": unknown UPOS \"" + cols[3] + "\"");
    if (cols[1].empty()) throw Error(ErrorKind::kInput, where() + ": empty FORM");
    cur.words.push_back(cols[1]);
    cur.tags.push_back(normalize_pos_tag(*tag));
  }
  flush();
  return out;
}

std::vector<TaggedSentence> read_conllu_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  return read_conllu(in, path.string());
}

std::size_t TaggerModel::predict(const std::vector<std::string>& features) const {
  std::vector<double> scores(classes_.size(), 0.0);
  for (const auto& f : features) {
    const auto it = weights_.find(f);
    if (it == weights_.end()) continue;
    for (std::size_t c = 0; c < scores.size(); ++c) scores[c] += it->second[c];
  }
  // First maximum wins; classes_ is sorted by name.
  std::size_t best = 0;
  for (std::size_t c = 1; c < scores.size(); ++c) {
    if (scores[c] > scores[best]) best = c;
  }
  return best;
}

std::vector<PosTag> TaggerModel::tag(std::span<const std::string> words) const {
  std::vector<PosTag> out;
  out.reserve(words.size());
  if (classes_.empty()) return out;
  FeatureExtractor fx(words);
  std::vector<std::string> feats;
  std::string prev(kStart);
  std::string prev2(kStart2);
  for (std::size_t i = 0; i < words.size(); ++i) {
    fx.extract(i, prev, prev2, feats);
    const auto tag = classes_[predict(feats)];
    out.push_back(tag);
    prev2 = std::move(prev);
    prev = std::string(pos_tag_name(tag));
  }
  return out;
}

TaggerModel train_tagger(std::span<const TaggedSentence> data, std::uint32_t epochs,
                         std::uint64_t seed, std::string corpus_name) {
  if (epochs == 0) throw Error(ErrorKind::kConfig, "tagger training needs at least one epoch");
  if (data.empty()) throw Error(ErrorKind::kInput, "tagger training data is empty");

  TaggerModel model;
  {
    PosTagSet seen;
    for (const auto& s : data) {
      if (s.words.size() != s.tags.size()) {
        throw Error(ErrorKind::kInput, "training sentence has mismatched words and tags");
      }
      for (auto t : s.tags) seen.insert(normalize_pos_tag(t));
    }
    model.classes_ = seen.tags();
    std::sort(model.classes_.begin(), model.classes_.end(),
              [](PosTag a, PosTag b) { return pos_tag_name(a) < pos_tag_name(b); });
  }
  const std::size_t n_classes = model.classes_.size();
  std::vector<int> class_of(kNumPosTags, -1);
  for (std::size_t c = 0; c < n_classes; ++c) class_of[static_cast<std::size_t>(model.classes_[c])] = static_cast<int>(c);

  std::unordered_map<std::string, AveragedWeights> acc;
  std::int64_t instances = 0;

  auto update = [&](std::size_t truth, std::size_t guess, const std::vector<std::string>& feats) {
    for (const auto& f : feats) {
      auto& slot = acc[f];
      if (slot.w.empty()) {
        slot.w.assign(n_classes, 0.0);
        slot.total.assign(n_classes, 0.0);
        slot.stamp.assign(n_classes, 0);
      }
      for (auto [c, delta] : {std::pair{truth, 1.0}, std::pair{guess, -1.0}}) {
        slot.total[c] += static_cast<double>(instances - slot.stamp[c]) * slot.w[c];
        slot.stamp[c] = instances;
        slot.w[c] += delta;
      }
    }
  };

  auto score_argmax = [&](const std::vector<std::string>& feats) {
    std::vector<double> scores(n_classes, 0.0);
    for (const auto& f : feats) {
      const auto it = acc.find(f);
      if (it == acc.end()) continue;
      for (std::size_t c = 0; c < n_classes; ++c) scores[c] += it->second.w[c];
    }
    std::size_t best = 0;
    for (std::size_t c = 1; c < n_classes; ++c) {
      if (scores[c] > scores[best]) best = c;
    }
    return best;
  };

  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<std::string> feats;
  for (std::uint32_t epoch = 0; epoch < epochs; ++epoch) {
    auto rng = CounterRng::keyed({seed, epoch});
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.below(i)]);
    }
    for (const auto idx : order) {
      const auto& sent = data[idx];
      FeatureExtractor fx(sent.words);
      std::string prev(kStart);
      std::string prev2(kStart2);
      for (std::size_t i = 0; i < sent.words.size(); ++i) {
        fx.extract(i, prev, prev2, feats);
        const auto guess = score_argmax(feats);
        const auto truth = static_cast<std::size_t>(class_of[static_cast<std::size_t>(normalize_pos_tag(sent.tags[i]))]);
        ++instances;
        if (guess != truth) update(truth, guess, feats);
        prev2 = std::move(prev);
        prev = std::string(pos_tag_name(model.classes_[guess]));
      }
    }
  }

  for (auto& [feature, slot] : acc) {
    std::vector<double> avg(n_classes);
    bool nonzero = false;
    for (std::size_t c = 0; c < n_classes; ++c) {
      const double total = slot.total[c] + static_cast<double>(instances - slot.stamp[c]) * slot.w[c];
      avg[c] = total / static_cast<double>(instances);
      nonzero = nonzero || avg[c] != 0.0;
    }
    if (nonzero) model.weights_.emplace(feature, std::move(avg));
  }
  model.metadata_.corpus = std::move(corpus_name);
  model.metadata_.epochs = epochs;
  model.metadata_.seed = seed;
  return model;
}

TaggerModel train_tagger(const std::filesystem::path& conllu, std::uint32_t epochs,
                         std::uint64_t seed) {
  const auto data = read_conllu_file(conllu);
  return train_tagger(data, epochs, seed, conllu.filename().string());
}

double evaluate_tagger(const TaggerModel& model, std::span<const TaggedSentence> data) {
  std::size_t total = 0;
  std::size_t correct = 0;
  for (const auto& s : data) {
    const auto predicted = model.tag(s.words);
    for (std::size_t i = 0; i < predicted.size(); ++i) {
      correct += predicted[i] == normalize_pos_tag(s.tags[i]);
    }
    total += predicted.size();
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

std::string TaggerModel::serialize() const {
  ByteWriter payload;
  payload.str(metadata_.corpus);
  payload.u32(metadata_.epochs);
  payload.u64(metadata_.seed);
  payload.f64(metadata_.heldout_accuracy);
  payload.u8(static_cast<std::uint8_t>(classes_.size()));
  for (auto t : classes_) payload.str(pos_tag_name(t));

  std::vector<const std::string*> keys;
  keys.reserve(weights_.size());
  for (const auto& kv : weights_) keys.push_back(&kv.first);
  std::sort(keys.begin(), keys.end(), [](auto* a, auto* b) { return *a < *b; });
  payload.u64(keys.size());
  for (const auto* k : keys) {
    payload.str(*k);
    for (double w : weights_.at(*k)) payload.f64(w);
  }

  ByteWriter file;
  file.raw(std::string_view(kMagic, 4));
  file.u16(kFormatVersion);
  file.u64(payload.bytes().size());
  file.raw(payload.bytes());
  return file.bytes();
}

TaggerModel TaggerModel::deserialize(std::string_view bytes) {
  if (bytes.empty()) throw Error(ErrorKind::kInput, "tagger model file is empty");
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(ErrorKind::kInput, "not a tagger model: expected magic \"LPTG\"");
  }
  ByteReader r(bytes.substr(4));
  const auto version = r.u16();
  if (version != kFormatVersion) {
    throw Error(ErrorKind::kInput, "unsupported tagger model version " + std::to_string(version) +
                                       " (expected " + std::to_string(kFormatVersion) + ")");
  }
  const auto length = r.u64();
  if (length != r.remaining()) {
    throw Error(ErrorKind::kInput, length > r.remaining() ? "tagger model truncated"
                                                          : "tagger model has trailing bytes");
  }
  TaggerModel m;
  m.metadata_.corpus = r.str();
  m.metadata_.epochs = r.u32();
  m.metadata_.seed = r.u64();
  m.metadata_.heldout_accuracy = r.f64();
  const auto n_classes = r.u8();
  if (n_classes == 0 || n_classes > kNumPosTags) throw Error(ErrorKind::kInput, "tagger model has a bad class count");
  for (std::size_t c = 0; c < n_classes; ++c) {
    const auto name = r.str();
    const auto tag = parse_pos_tag(name);
    if (!tag) throw Error(ErrorKind::kInput, "tagger model names unknown tag \"" + name + "\"");
    m.classes_.push_back(*tag);
  }
  const auto n_features = r.u64();
  for (std::uint64_t i = 0; i < n_features; ++i) {
    auto key = r.str();
    std::vector<double> w(n_classes);
    for (auto& x : w) x = r.f64();
    m.weights_.emplace(std::move(key), std::move(w));
  }
  if (r.remaining() != 0) throw Error(ErrorKind::kInput, "tagger model has trailing bytes");
  return m;
}

void TaggerModel::save(const std::filesystem::path& path) const {
  const auto bytes = serialize();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::kIo, "cannot write tagger model " + path.string());
}

TaggerModel TaggerModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open tagger model " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return deserialize(ss.str());
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

}  // namespace logiprep
