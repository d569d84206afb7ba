#pragma once

#include <cstdint>
#include <vector>

#include "logiprep/tokenizer.hpp"

namespace logiprep {

inline constexpr std::int32_t kIgnoreTarget = -1;

// One serialized training example. `input_ids` already has the mask
// actions applied; `mlm_targets` carries the original id at every selected
// position and kIgnoreTarget elsewhere. One masked sequence serves both
// the s-MLM and the e-CLS objective.
struct TrainingRecord {
  std::vector<TokenId> input_ids;
  std::vector<std::int32_t> mlm_targets;
  std::int32_t cls_label = 0;  // 1 = Entailment, 0 = Contradiction
  std::uint64_t doc_id = 0;
  std::uint32_t sent_idx = 0;
  bool keyword_masked = false;

  friend bool operator==(const TrainingRecord&, const TrainingRecord&) = default;
};

}  // namespace logiprep
