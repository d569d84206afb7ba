#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "logiprep/pos_tag.hpp"

namespace logiprep {

struct TaggedSentence {
  std::vector<std::string> words;
  std::vector<PosTag> tags;  // CONJ already normalized to CCONJ
};

// Reads FORM and UPOS columns; multiword-token ranges and empty nodes are
// skipped. Throws Error(kInput) with the line number on malformed lines.
std::vector<TaggedSentence> read_conllu(std::istream& in, std::string_view source);
std::vector<TaggedSentence> read_conllu_file(const std::filesystem::path& path);

struct TaggerMetadata {
  std::string corpus;
  std::uint32_t epochs = 0;
  std::uint64_t seed = 0;
  double heldout_accuracy = -1.0;  // negative when not measured
};

// Greedy left-to-right averaged perceptron. Weights are the finalized
// averages; the training accumulators are not kept.
class TaggerModel {
 public:
  std::vector<PosTag> tag(std::span<const std::string> words) const;

  // Tags this model can emit, sorted by tag name (the tie-break order).
  const std::vector<PosTag>& tag_set() const { return classes_; }
  const TaggerMetadata& metadata() const { return metadata_; }
  TaggerMetadata& metadata() { return metadata_; }
  std::size_t feature_count() const { return weights_.size(); }

  void save(const std::filesystem::path& path) const;
  static TaggerModel load(const std::filesystem::path& path);

  std::string serialize() const;
  static TaggerModel deserialize(std::string_view bytes);

 private:
  friend TaggerModel train_tagger(std::span<const TaggedSentence>, std::uint32_t,
                                  std::uint64_t, std::string);

  std::size_t predict(const std::vector<std::string>& features) const;

  std::vector<PosTag> classes_;
  std::unordered_map<std::string, std::vector<double>> weights_;
  TaggerMetadata metadata_;
};

// Throws Error(kConfig) when epochs == 0 and Error(kInput) on empty data.
TaggerModel train_tagger(std::span<const TaggedSentence> data, std::uint32_t epochs,
                         std::uint64_t seed, std::string corpus_name = "");
TaggerModel train_tagger(const std::filesystem::path& conllu, std::uint32_t epochs,
                         std::uint64_t seed);

// Token-level accuracy in [0, 1].
double evaluate_tagger(const TaggerModel& model, std::span<const TaggedSentence> data);

}  // namespace logiprep
