#include "logiprep/masker.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "logiprep/counter_rng.hpp"
#include "logiprep/error.hpp"

namespace logiprep {

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string_view action_kind_name(ActionKind kind) {
  switch (kind) {
    case ActionKind::kMask:
      return "mask";
    case ActionKind::kRandom:
      return "random";
    case ActionKind::kKeep:
      return "keep";
  }
  return "mask";
}

void validate(const MaskPolicy& policy) {
  if (policy.candidate_tags.empty()) throw Error(ErrorKind::kConfig, "mask policy has no candidate tags");
  if (!(policy.mask_rate > 0.0 && policy.mask_rate <= 1.0)) {
    throw Error(ErrorKind::kConfig, "mask rate must lie in (0, 1]");
  }
  const auto& p = policy.action_probs;
  if (p.mask < 0.0 || p.random < 0.0 || p.keep < 0.0) {
    throw Error(ErrorKind::kConfig, "mask action probabilities must be non-negative");
  }
  if (std::abs(p.mask + p.random + p.keep - 1.0) > 1e-9) {
    throw Error(ErrorKind::kConfig, "mask action probabilities must sum to 1");
  }
}

std::string canonical_policy_json(const MaskPolicy& policy) {
  std::string out = "{\"action_probs\":[";
  out += format_double(policy.action_probs.mask) + "," + format_double(policy.action_probs.random) +
         "," + format_double(policy.action_probs.keep);
  out += "],\"candidate_tags\":[";
  bool first = true;
  for (auto t : policy.candidate_tags.tags()) {
    if (!first) out += ',';
    first = false;
    out += '"';
    out += pos_tag_name(t);
    out += '"';
  }
  out += "],\"mask_rate\":" + format_double(policy.mask_rate);
  out += ",\"seed\":" + std::to_string(policy.seed) + "}";
  return out;
}

MaskPolicy base_policy(std::uint64_t seed) {
  MaskPolicy p;
  p.candidate_tags = {PosTag::kAdj, PosTag::kAdv,   PosTag::kConj, PosTag::kCconj,
                      PosTag::kPart, PosTag::kSconj, PosTag::kVerb};
  p.mask_rate = 0.15;
  p.action_probs = {0.8, 0.1, 0.1};
  p.seed = seed;
  return p;
}

std::optional<AblationKind> parse_ablation_kind(std::string_view name) {
  if (name == "base") return AblationKind::kBase;
  if (name == "base+nouns") return AblationKind::kBaseNouns;
  if (name == "base+nouns+random") return AblationKind::kBaseNounsRandom;
  return std::nullopt;
}

MaskPolicy ablation_policy(AblationKind kind, std::uint64_t seed) {
  auto p = base_policy(seed);
  if (kind == AblationKind::kBaseNouns || kind == AblationKind::kBaseNounsRandom) {
    p.candidate_tags.insert(PosTag::kNoun);
    p.candidate_tags.insert(PosTag::kPron);
    p.candidate_tags.insert(PosTag::kPropn);
  }
  if (kind == AblationKind::kBaseNounsRandom) p.candidate_tags = PosTagSet::full();
  return p;
}

std::size_t masking_budget(std::size_t word_count, double mask_rate) {
  const auto r = std::llround(mask_rate * static_cast<double>(word_count));
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::max<long long>(r, 0)));
}

std::vector<std::size_t> mask_candidates(const std::vector<PosTag>& tags,
                                         const EncodedSentence& encoded,
                                         const SubwordVocab& vocab, const MaskPolicy& policy) {
  std::vector<std::size_t> out;
  for (std::size_t w = 0; w < tags.size(); ++w) {
    if (!policy.candidate_tags.contains(tags[w])) continue;
    const auto span = encoded.word_spans[w];
    const bool all_unk = std::all_of(encoded.ids.begin() + static_cast<std::ptrdiff_t>(span.begin),
                                     encoded.ids.begin() + static_cast<std::ptrdiff_t>(span.end),
                                     [&](TokenId id) { return id == vocab.specials().unk; });
    if (!all_unk) out.push_back(w);
  }
  return out;
}

std::optional<MaskingPlan> plan(const CuratedSentence& sentence, const EncodedSentence& encoded,
                                const SubwordVocab& vocab, const MaskPolicy& policy) {
  const auto& words = sentence.segmented.words;
  if (sentence.tags.size() != words.size() || encoded.word_spans.size() != words.size()) {
    throw Error(ErrorKind::kInvariant, "tags, words and word spans are not parallel");
  }
  auto candidates = mask_candidates(sentence.tags, encoded, vocab, policy);
  if (candidates.empty()) return std::nullopt;

  auto rng = CounterRng::keyed({policy.seed, sentence.segmented.doc_id, sentence.segmented.sent_idx});
  const std::size_t budget = std::min(masking_budget(words.size(), policy.mask_rate), candidates.size());
  for (std::size_t k = 0; k < budget; ++k) {
    const auto j = k + static_cast<std::size_t>(rng.below(candidates.size() - k));
    std::swap(candidates[k], candidates[j]);
  }
  MaskingPlan out;
  out.selected_words.assign(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(budget));
  std::sort(out.selected_words.begin(), out.selected_words.end());

  const auto& probs = policy.action_probs;
  const auto& pool = vocab.regular_ids();
  for (const auto w : out.selected_words) {
    const double u = rng.next_unit();
    ActionKind kind = ActionKind::kKeep;
    if (u < probs.mask) {
      kind = ActionKind::kMask;
    } else if (u < probs.mask + probs.random) {
      kind = ActionKind::kRandom;
    }
    out.word_actions.push_back(kind);
    const auto span = encoded.word_spans[w];
    for (std::size_t p = span.begin; p < span.end; ++p) {
      TokenId replacement = encoded.ids[p];
      if (kind == ActionKind::kMask) {
        replacement = vocab.specials().mask;
      } else if (kind == ActionKind::kRandom) {
        replacement = pool[rng.below(pool.size())];
      }
      out.actions.push_back({p, kind, replacement});
    }
  }
  return out;
}

TrainingRecord build_record(const CuratedSentence& sentence, const EncodedSentence& encoded,
                            const MaskingPlan& plan) {
  TrainingRecord r;
  r.input_ids = encoded.ids;
  r.mlm_targets.assign(encoded.ids.size(), kIgnoreTarget);
  for (const auto& a : plan.actions) {
    r.input_ids[a.position] = a.replacement;
    r.mlm_targets[a.position] = encoded.ids[a.position];
  }
  r.cls_label = sentence.label == ClsLabel::kEntailment ? 1 : 0;
  r.doc_id = sentence.segmented.doc_id;
  r.sent_idx = sentence.segmented.sent_idx;
  for (const auto w : plan.selected_words) {
    for (const auto& m : sentence.matches) {
      if (w >= m.start && w < m.end) r.keyword_masked = true;
    }
  }
  return r;
}

}  // namespace logiprep
