#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "logiprep/curator.hpp"
#include "logiprep/pos_tag.hpp"
#include "logiprep/record.hpp"
#include "logiprep/tokenizer.hpp"

namespace logiprep {

enum class ActionKind : std::uint8_t { kMask, kRandom, kKeep };

std::string_view action_kind_name(ActionKind kind);

struct ActionProbs {
  double mask = 0.8;
  double random = 0.1;
  double keep = 0.1;
};

struct MaskPolicy {
  PosTagSet candidate_tags;
  double mask_rate = 0.15;
  ActionProbs action_probs;
  std::uint64_t seed = 0;
};

// Throws Error(kConfig) when the policy violates its invariants.
void validate(const MaskPolicy& policy);

// Canonical JSON text of the policy; its SHA-256 goes into the manifest.
std::string canonical_policy_json(const MaskPolicy& policy);

// {ADJ, ADV, CCONJ (CONJ), PART, SCONJ, VERB}, rate 0.15, actions 80/10/10.
MaskPolicy base_policy(std::uint64_t seed);

enum class AblationKind : std::uint8_t { kBase, kBaseNouns, kBaseNounsRandom };

std::optional<AblationKind> parse_ablation_kind(std::string_view name);

// BaseNouns adds NOUN, PRON, PROPN; BaseNounsRandom admits every tag.
MaskPolicy ablation_policy(AblationKind kind, std::uint64_t seed);

// max(1, round(rate * word_count)).
std::size_t masking_budget(std::size_t word_count, double mask_rate);

struct SubwordAction {
  std::size_t position = 0;  // index into EncodedSentence::ids
  ActionKind kind = ActionKind::kMask;
  TokenId replacement = 0;  // id written into the input at `position`
};

struct MaskingPlan {
  std::vector<std::size_t> selected_words;  // ascending
  std::vector<ActionKind> word_actions;     // parallel to selected_words
  std::vector<SubwordAction> actions;       // ascending positions
};

// Words eligible for selection: tag in the policy set and not encoded as a
// lone [UNK].
std::vector<std::size_t> mask_candidates(const std::vector<PosTag>& tags,
                                         const EncodedSentence& encoded,
                                         const SubwordVocab& vocab, const MaskPolicy& policy);

// Absent when the sentence has no candidate word. Draws come from a counter
// RNG keyed by (policy.seed, doc_id, sent_idx).
std::optional<MaskingPlan> plan(const CuratedSentence& sentence, const EncodedSentence& encoded,
                                const SubwordVocab& vocab, const MaskPolicy& policy);

// Applies a plan, producing the serialized training example.
TrainingRecord build_record(const CuratedSentence& sentence, const EncodedSentence& encoded,
                            const MaskingPlan& plan);

}  // namespace logiprep
