#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "logiprep/lexicon.hpp"
#include "logiprep/pos_tag.hpp"
#include "logiprep/segmenter.hpp"

namespace logiprep {

enum class ClsLabel : std::uint8_t { kContradiction = 0, kEntailment = 1 };
enum class LabelSource : std::uint8_t { kSinglePolarity, kEarliestOfBoth };
enum class CategoryFilter : std::uint8_t { kBoth, kPositiveOnly, kNegativeOnly };

std::string_view cls_label_name(ClsLabel label);
std::string_view label_source_name(LabelSource source);
std::string_view category_filter_name(CategoryFilter filter);
std::optional<CategoryFilter> parse_category_filter(std::string_view name);

struct CuratedSentence {
  SegmentedSentence segmented;
  std::vector<PosTag> tags;  // parallel to segmented.words
  std::vector<KeywordMatch> matches;
  std::size_t governing = 0;  // index into matches
  ClsLabel label = ClsLabel::kEntailment;
  LabelSource label_source = LabelSource::kSinglePolarity;

  const KeywordMatch& governing_match() const { return matches[governing]; }
};

// Index of the governing match: smallest start, then longest phrase, then
// Positive before Negative. `matches` must be non-empty.
std::size_t governing_match_index(std::span<const KeywordMatch> matches,
                                  const KeywordLexicon& lexicon);

// Absent when the sentence has no keyword match.
std::optional<CuratedSentence> curate(SegmentedSentence sentence, std::vector<PosTag> tags,
                                      const KeywordLexicon& lexicon);

Polarity governing_polarity(const CuratedSentence& s, const KeywordLexicon& lexicon);

bool passes_category(const CuratedSentence& s, const KeywordLexicon& lexicon,
                     CategoryFilter filter);

struct CurationCounters {
  std::uint64_t seen = 0;
  std::uint64_t no_keyword = 0;
  std::uint64_t filtered_by_category = 0;
  std::uint64_t positive_governed = 0;
  std::uint64_t negative_governed = 0;
  std::uint64_t mixed_polarity = 0;
};

using TagsProvider = std::function<std::vector<PosTag>(const SegmentedSentence&)>;

// Curates a batch, keeping only sentences that pass the category filter.
// Tags are only computed for sentences with at least one keyword.
std::vector<CuratedSentence> curate_stream(std::vector<SegmentedSentence> sentences,
                                           const TagsProvider& tags_provider,
                                           const KeywordLexicon& lexicon,
                                           CategoryFilter category_filter,
                                           CurationCounters& counters);

}  // namespace logiprep
