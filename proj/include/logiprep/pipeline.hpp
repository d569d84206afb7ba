#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "logiprep/curator.hpp"
#include "logiprep/lexicon.hpp"
#include "logiprep/masker.hpp"
#include "logiprep/segmenter.hpp"
#include "logiprep/shards.hpp"
#include "logiprep/stats.hpp"
#include "logiprep/tagger.hpp"
#include "logiprep/tokenizer.hpp"

namespace logiprep {

struct RunConfig {
  std::filesystem::path input;
  InputFormat input_format = InputFormat::kJsonLines;
  bool one_doc_per_file = false;
  std::optional<std::filesystem::path> lexicon;  // builtin when absent
  std::filesystem::path tagger_model;
  std::filesystem::path vocab;
  std::string policy = "base";  // base | base+nouns | base+nouns+random
  std::optional<PosTagSet> candidate_tags;  // replaces the policy's tag set
  double mask_rate = 0.15;
  ActionProbs action_probs;
  CategoryFilter category_filter = CategoryFilter::kBoth;
  std::size_t records_per_shard = 1000;
  std::filesystem::path output_dir;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

// `key = value` lines; `#` starts a comment, blank lines and `[section]`
// headers are ignored. Strings may be double-quoted. Unknown keys and
// malformed values throw Error(kConfig) naming the line.
RunConfig parse_run_config(std::istream& in, std::string_view source);
RunConfig load_run_config(const std::filesystem::path& path);

// Sets one key using the config-file syntax for the value.
void set_config_value(RunConfig& config, const std::string& key, const std::string& value);

// LOGIPREP_SEED, when set, replaces config.seed.
void apply_environment(RunConfig& config);

enum class ConfigUse { kPack, kInspect };

// Referenced files must exist; throws Error(kConfig).
void validate(const RunConfig& config, ConfigUse use = ConfigUse::kPack);

MaskPolicy resolve_policy(const RunConfig& config);

// Loaded resources shared read-only by all workers.
struct PipelineContext {
  KeywordLexicon lexicon;
  TaggerModel tagger;
  SubwordVocab vocab;
  MaskPolicy policy;
  CategoryFilter category_filter = CategoryFilter::kBoth;
  nlohmann::json resolved_config;  // embedded in the manifest
  std::string config_digest;

  static PipelineContext load(const RunConfig& config);
};

enum class DropReason { kLength, kNoKeyword, kCategory, kOverLength, kNoCandidate };

std::string_view drop_reason_name(DropReason reason);

struct SentenceOutcome {
  SegmentedSentence sentence;
  std::vector<KeywordMatch> matches;
  std::vector<PosTag> tags;  // empty unless the sentence had a keyword
  std::optional<CuratedSentence> curated;
  std::optional<EncodedSentence> encoded;
  std::optional<MaskingPlan> plan;
  std::optional<TrainingRecord> record;
  std::optional<DropReason> dropped;
};

// Runs one sentence through curation, tokenization and masking.
SentenceOutcome process_sentence(const PipelineContext& ctx, SegmentedSentence sentence);

struct DocumentResult {
  std::vector<TrainingRecord> records;
  RunReport report;
};

DocumentResult process_document(const PipelineContext& ctx, const RawDocument& doc);

// Records and merged report for a set of documents; output does not depend
// on the worker count.
DocumentResult process_corpus(const PipelineContext& ctx, const std::vector<RawDocument>& docs,
                              unsigned workers);

struct PackResult {
  ShardManifest manifest;
  RunReport report;
};

// Full pipeline: shards, manifest.json and report.json into
// config.output_dir. A failed run leaves no partial output behind.
PackResult pack(const RunConfig& config);

inline constexpr const char* kReportFileName = "report.json";

// Finds one sentence of the input and runs it through the pipeline.
// Throws Error(kInput) when the document or sentence does not exist.
SentenceOutcome inspect(const RunConfig& config, std::uint64_t doc_id, std::uint32_t sent_idx);

}  // namespace logiprep
