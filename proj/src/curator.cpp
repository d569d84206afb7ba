#include "logiprep/curator.hpp"

#include "logiprep/error.hpp"

namespace logiprep {

std::string_view cls_label_name(ClsLabel label) {
  return label == ClsLabel::kEntailment ? "Entailment" : "Contradiction";
}

std::string_view label_source_name(LabelSource source) {
  return source == LabelSource::kSinglePolarity ? "SinglePolarity" : "EarliestOfBoth";
}

std::string_view category_filter_name(CategoryFilter filter) {
  switch (filter) {
    case CategoryFilter::kBoth:
      return "both";
    case CategoryFilter::kPositiveOnly:
      return "positive";
    case CategoryFilter::kNegativeOnly:
      return "negative";
  }
  return "both";
}

std::optional<CategoryFilter> parse_category_filter(std::string_view name) {
  if (name == "both") return CategoryFilter::kBoth;
  if (name == "positive") return CategoryFilter::kPositiveOnly;
  if (name == "negative") return CategoryFilter::kNegativeOnly;
  return std::nullopt;
}

std::size_t governing_match_index(std::span<const KeywordMatch> matches,
                                  const KeywordLexicon& lexicon) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < matches.size(); ++i) {
    const auto& a = matches[i];
    const auto& b = matches[best];
    if (a.start != b.start) {
      if (a.start < b.start) best = i;
      continue;
    }
    const auto len_a = a.end - a.start;
    const auto len_b = b.end - b.start;
    if (len_a != len_b) {
      if (len_a > len_b) best = i;
      continue;
    }
    if (lexicon.entry(a.entry).polarity == Polarity::kPositive &&
        lexicon.entry(b.entry).polarity == Polarity::kNegative) {
      best = i;
    }
  }
  return best;
}

std::optional<CuratedSentence> curate(SegmentedSentence sentence, std::vector<PosTag> tags,
                                      const KeywordLexicon& lexicon) {
  if (tags.size() != sentence.words.size()) {
    throw Error(ErrorKind::kInvariant, "tags are not parallel to words");
  }
  auto matches = lexicon.match(sentence.words);
  if (matches.empty()) return std::nullopt;

  CuratedSentence out;
  out.governing = governing_match_index(matches, lexicon);
  bool has_pos = false;
  bool has_neg = false;
  for (const auto& m : matches) {
    (lexicon.entry(m.entry).polarity == Polarity::kPositive ? has_pos : has_neg) = true;
  }
  const auto polarity = lexicon.entry(matches[out.governing].entry).polarity;
  out.label = polarity == Polarity::kPositive ? ClsLabel::kEntailment : ClsLabel::kContradiction;
  out.label_source = (has_pos && has_neg) ? LabelSource::kEarliestOfBoth : LabelSource::kSinglePolarity;
  out.segmented = std::move(sentence);
  out.tags = std::move(tags);
  out.matches = std::move(matches);
  return out;
}

Polarity governing_polarity(const CuratedSentence& s, const KeywordLexicon& lexicon) {
  return lexicon.entry(s.governing_match().entry).polarity;
}

bool passes_category(const CuratedSentence& s, const KeywordLexicon& lexicon,
                     CategoryFilter filter) {
  switch (filter) {
    case CategoryFilter::kBoth:
      return true;
    case CategoryFilter::kPositiveOnly:
      return governing_polarity(s, lexicon) == Polarity::kPositive;
    case CategoryFilter::kNegativeOnly:
      return governing_polarity(s, lexicon) == Polarity::kNegative;
  }
  return true;
}

std::vector<CuratedSentence> curate_stream(std::vector<SegmentedSentence> sentences,
                                           const TagsProvider& tags_provider,
                                           const KeywordLexicon& lexicon,
                                           CategoryFilter category_filter,
                                           CurationCounters& counters) {
  std::vector<CuratedSentence> out;
  for (auto& s : sentences) {
    ++counters.seen;
    if (lexicon.match(s.words).empty()) {
      ++counters.no_keyword;
      continue;
    }
    auto tags = tags_provider(s);
    auto curated = curate(std::move(s), std::move(tags), lexicon);
    if (!passes_category(*curated, lexicon, category_filter)) {
      ++counters.filtered_by_category;
      continue;
    }
    if (governing_polarity(*curated, lexicon) == Polarity::kPositive) {
      ++counters.positive_governed;
    } else {
      ++counters.negative_governed;
    }
    counters.mixed_polarity += curated->label_source == LabelSource::kEarliestOfBoth;
    out.push_back(std::move(*curated));
  }
  return out;
}

}  // namespace logiprep
