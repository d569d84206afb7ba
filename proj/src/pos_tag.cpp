#include "logiprep/pos_tag.hpp"

namespace logiprep {

namespace {

constexpr std::array<std::string_view, kNumPosTags> kNames = {
    "ADJ", "ADV", "INTJ", "NOUN", "PROPN", "VERB", "ADP",  "AUX", "CCONJ",
    "CONJ", "SCONJ", "DET", "NUM", "PART", "PRON", "PUNCT", "SYM", "X",
};

}  // namespace

std::string_view pos_tag_name(PosTag tag) { return kNames[static_cast<std::size_t>(tag)]; }

std::optional<PosTag> parse_pos_tag(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return static_cast<PosTag>(i);
  }
  return std::nullopt;
}

const std::array<PosTag, kNumPosTags>& all_pos_tags() {
  static const auto tags = [] {
    std::array<PosTag, kNumPosTags> a{};
    for (std::size_t i = 0; i < kNumPosTags; ++i) a[i] = static_cast<PosTag>(i);
    return a;
  }();
  return tags;
}

PosTagSet PosTagSet::full() {
  PosTagSet s;
  for (auto t : all_pos_tags()) s.insert(t);
  return s;
}

std::vector<PosTag> PosTagSet::tags() const {
  std::vector<PosTag> out;
  for (auto t : all_pos_tags()) {
    if (bits_.test(static_cast<std::size_t>(t))) out.push_back(t);
  }
  return out;
}

}  // namespace logiprep
