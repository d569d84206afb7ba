#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "logiprep/record.hpp"

namespace logiprep {

inline constexpr int kShardFormatVersion = 1;

// manifest.json; keys are exactly version, vocab_sha256, policy_sha256,
// n_records, n_entailment, n_contradiction and config.
struct ShardManifest {
  int version = kShardFormatVersion;
  std::string vocab_sha256;
  std::string policy_sha256;
  std::uint64_t n_records = 0;
  std::uint64_t n_entailment = 0;
  std::uint64_t n_contradiction = 0;
  // Resolved run configuration. Always carries records_per_shard; when
  // special_ids is present the reader also checks [CLS]/[SEP]/[MASK] use.
  nlohmann::json config = nlohmann::json::object();

  nlohmann::json to_json() const;
  static ShardManifest from_json(const nlohmann::json& j);
};

struct ShardWriteOptions {
  std::size_t records_per_shard = 1000;
  std::string vocab_sha256;
  std::string policy_sha256;
  nlohmann::json config = nlohmann::json::object();
};

std::string shard_file_name(std::size_t index);  // shard-%05d.jsonl

// One JSON line (keys ids, tgt, cls, doc, sent, kwm; integers only), no LF.
std::string record_to_json_line(const TrainingRecord& r);

// Sorts by (doc_id, sent_idx), chunks into shard files and writes the
// manifest. Existing shard files in out_dir are replaced.
ShardManifest write_shards(std::vector<TrainingRecord> records,
                           const std::filesystem::path& out_dir, const ShardWriteOptions& options);

struct ShardExpectations {
  std::optional<std::string> vocab_sha256;
  std::optional<std::string> policy_sha256;
};

struct ShardSet {
  ShardManifest manifest;
  std::vector<TrainingRecord> records;
};

// Reads every shard in manifest order and validates each record. Errors
// name the shard file and line.
ShardSet read_shards(const std::filesystem::path& dir, const ShardExpectations& expect = {});

struct SpecialIdsView {
  std::optional<TokenId> cls;
  std::optional<TokenId> sep;
  std::optional<TokenId> mask;
};

// Throws Error(kInvariant) prefixed with `locus` on the first violation.
void validate_record(const TrainingRecord& r, const std::string& locus,
                     const SpecialIdsView& specials = {});

}  // namespace logiprep
