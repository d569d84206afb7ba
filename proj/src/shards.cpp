#include "logiprep/shards.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "logiprep/error.hpp"

namespace logiprep {

namespace fs = std::filesystem;

namespace {

constexpr const char* kManifestName = "manifest.json";

const char* const kRecordKeys[] = {"ids", "tgt", "cls", "doc", "sent", "kwm"};

template <typename T>
void append_int_array(std::string& out, const std::vector<T>& v) {
  out += '[';
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  out += ']';
}

std::int64_t require_int(const nlohmann::json& j, const std::string& what, const std::string& locus) {
  if (!j.is_number_integer()) throw Error(ErrorKind::kInvariant, locus + ": " + what + " must be an integer");
  return j.get<std::int64_t>();
}

TrainingRecord parse_record(const std::string& line, const std::string& locus) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorKind::kInvariant, locus + ": malformed JSON record");
  }
  if (!j.is_object() || j.size() != std::size(kRecordKeys)) {
    throw Error(ErrorKind::kInvariant, locus + ": record must have exactly the keys ids,tgt,cls,doc,sent,kwm");
  }
  for (const char* k : kRecordKeys) {
    if (!j.contains(k)) throw Error(ErrorKind::kInvariant, locus + ": record lacks key \"" + k + "\"");
  }
  TrainingRecord r;
  for (const auto& [key, out] : {std::pair{"ids", &r.input_ids}, std::pair{"tgt", &r.mlm_targets}}) {
    if (!j[key].is_array()) throw Error(ErrorKind::kInvariant, locus + ": " + key + " must be an array");
    for (const auto& v : j[key]) {
      const auto x = require_int(v, key, locus);
      if (x < INT32_MIN || x > INT32_MAX) throw Error(ErrorKind::kInvariant, locus + ": " + key + " value out of range");
      out->push_back(static_cast<std::int32_t>(x));
    }
  }
  r.cls_label = static_cast<std::int32_t>(require_int(j["cls"], "cls", locus));
  const auto doc = require_int(j["doc"], "doc", locus);
  if (doc < 0 && !j["doc"].is_number_unsigned()) throw Error(ErrorKind::kInvariant, locus + ": doc must be unsigned");
  r.doc_id = j["doc"].get<std::uint64_t>();
  const auto sent = require_int(j["sent"], "sent", locus);
  if (sent < 0 || sent > UINT32_MAX) throw Error(ErrorKind::kInvariant, locus + ": sent out of range");
  r.sent_idx = static_cast<std::uint32_t>(sent);
  const auto kwm = require_int(j["kwm"], "kwm", locus);
  if (kwm != 0 && kwm != 1) throw Error(ErrorKind::kInvariant, locus + ": kwm must be 0 or 1");
  r.keyword_masked = kwm == 1;
  return r;
}

std::optional<TokenId> special_from(const nlohmann::json& config, const char* name) {
  if (!config.contains("special_ids")) return std::nullopt;
  const auto& s = config["special_ids"];
  if (!s.is_object() || !s.contains(name) || !s[name].is_number_integer()) return std::nullopt;
  return s[name].get<TokenId>();
}

}  // namespace

nlohmann::json ShardManifest::to_json() const {
  nlohmann::json j;
  j["version"] = version;
  j["vocab_sha256"] = vocab_sha256;
  j["policy_sha256"] = policy_sha256;
  j["n_records"] = n_records;
  j["n_entailment"] = n_entailment;
  j["n_contradiction"] = n_contradiction;
  j["config"] = config;
  return j;
}

ShardManifest ShardManifest::from_json(const nlohmann::json& j) {
  static const char* const keys[] = {"version",  "vocab_sha256",  "policy_sha256", "n_records",
                                     "n_entailment", "n_contradiction", "config"};
  if (!j.is_object() || j.size() != std::size(keys)) {
    throw Error(ErrorKind::kInput, "manifest must have exactly the keys version, vocab_sha256, "
                                   "policy_sha256, n_records, n_entailment, n_contradiction, config");
  }
  ShardManifest m;
  try {
    m.version = j.at("version").get<int>();
    m.vocab_sha256 = j.at("vocab_sha256").get<std::string>();
    m.policy_sha256 = j.at("policy_sha256").get<std::string>();
    m.n_records = j.at("n_records").get<std::uint64_t>();
    m.n_entailment = j.at("n_entailment").get<std::uint64_t>();
    m.n_contradiction = j.at("n_contradiction").get<std::uint64_t>();
    m.config = j.at("config");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kInput, std::string("malformed manifest: ") + e.what());
  }
  return m;
}

std::string shard_file_name(std::size_t index) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "shard-%05zu.jsonl", index);
  return buf;
}

std::string record_to_json_line(const TrainingRecord& r) {
  std::string out = "{\"ids\":";
  append_int_array(out, r.input_ids);
  out += ",\"tgt\":";
  append_int_array(out, r.mlm_targets);
  out += ",\"cls\":" + std::to_string(r.cls_label);
  out += ",\"doc\":" + std::to_string(r.doc_id);
  out += ",\"sent\":" + std::to_string(r.sent_idx);
  out += ",\"kwm\":";
  out += r.keyword_masked ? '1' : '0';
  out += '}';
  return out;
}

void validate_record(const TrainingRecord& r, const std::string& locus, const SpecialIdsView& sp) {
  auto fail = [&](const std::string& msg) { throw Error(ErrorKind::kInvariant, locus + ": " + msg); };
  if (r.input_ids.size() != r.mlm_targets.size()) fail("ids and tgt lengths differ");
  if (r.input_ids.size() < 2) fail("record shorter than [CLS] [SEP]");
  if (r.input_ids.size() > kMaxSequenceLength) fail("record longer than " + std::to_string(kMaxSequenceLength));
  if (r.cls_label != 0 && r.cls_label != 1) fail("cls must be 0 or 1");
  if (r.mlm_targets.front() != kIgnoreTarget || r.mlm_targets.back() != kIgnoreTarget) {
    fail("first and last positions must carry the ignore target");
  }
  bool any_target = false;
  for (std::size_t p = 0; p < r.input_ids.size(); ++p) {
    if (r.input_ids[p] < 0) fail("negative token id at position " + std::to_string(p));
    if (r.mlm_targets[p] < kIgnoreTarget) fail("target below -1 at position " + std::to_string(p));
    any_target = any_target || r.mlm_targets[p] != kIgnoreTarget;
    if (sp.mask && r.input_ids[p] == *sp.mask && r.mlm_targets[p] == kIgnoreTarget) {
      fail("[MASK] at position " + std::to_string(p) + " has no target");
    }
  }
  if (!any_target) fail("no s-MLM target (all targets are -1)");
  if (sp.cls && r.input_ids.front() != *sp.cls) fail("position 0 is not [CLS]");
  if (sp.sep && r.input_ids.back() != *sp.sep) fail("last position is not [SEP]");
}

ShardManifest write_shards(std::vector<TrainingRecord> records, const fs::path& out_dir,
                           const ShardWriteOptions& options) {
  if (options.records_per_shard == 0) throw Error(ErrorKind::kConfig, "records_per_shard must be positive");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create output directory " + out_dir.string() + ": " + ec.message());
  for (const auto& e : fs::directory_iterator(out_dir, ec)) {
    const auto name = e.path().filename().string();
    if (name == kManifestName || (name.starts_with("shard-") && name.ends_with(".jsonl"))) {
      fs::remove(e.path(), ec);
    }
  }

  std::stable_sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
    return std::tie(a.doc_id, a.sent_idx) < std::tie(b.doc_id, b.sent_idx);
  });

  ShardManifest m;
  m.vocab_sha256 = options.vocab_sha256;
  m.policy_sha256 = options.policy_sha256;
  m.config = options.config;
  m.config["records_per_shard"] = options.records_per_shard;

  for (std::size_t begin = 0, shard = 0; begin < records.size(); begin += options.records_per_shard, ++shard) {
    const auto path = out_dir / shard_file_name(shard);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::kIo, "cannot open shard file " + path.string());
    const auto end = std::min(records.size(), begin + options.records_per_shard);
    std::string buf;
    for (std::size_t i = begin; i < end; ++i) {
      buf += record_to_json_line(records[i]);
      buf += '\n';
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    out.flush();
    if (!out) throw Error(ErrorKind::kIo, "write failed for shard file " + path.string());
  }
  for (const auto& r : records) (r.cls_label == 1 ? m.n_entailment : m.n_contradiction)++;
  m.n_records = records.size();

  const auto manifest_path = out_dir / kManifestName;
  std::ofstream out(manifest_path, std::ios::binary | std::ios::trunc);
  out << m.to_json().dump(2) << '\n';
  out.flush();
  if (!out) throw Error(ErrorKind::kIo, "write failed for " + manifest_path.string());
  return m;
}

ShardSet read_shards(const fs::path& dir, const ShardExpectations& expect) {
  const auto manifest_path = dir / kManifestName;
  std::ifstream min(manifest_path, std::ios::binary);
  if (!min) throw Error(ErrorKind::kIo, "cannot open " + manifest_path.string());
  nlohmann::json mj;
  try {
    mj = nlohmann::json::parse(min);
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorKind::kInput, manifest_path.string() + ": malformed JSON");
  }
  ShardSet set;
  set.manifest = ShardManifest::from_json(mj);
  const auto& m = set.manifest;
  if (m.version != kShardFormatVersion) {
    throw Error(ErrorKind::kInput, "unsupported shard format version " + std::to_string(m.version) +
                                       " (expected " + std::to_string(kShardFormatVersion) + ")");
  }
  if (expect.vocab_sha256 && *expect.vocab_sha256 != m.vocab_sha256) {
    throw Error(ErrorKind::kConfig, "vocab digest mismatch: manifest " + m.vocab_sha256 + ", config " + *expect.vocab_sha256);
  }
  if (expect.policy_sha256 && *expect.policy_sha256 != m.policy_sha256) {
    throw Error(ErrorKind::kConfig, "policy digest mismatch: manifest " + m.policy_sha256 + ", config " + *expect.policy_sha256);
  }
  if (m.n_entailment + m.n_contradiction != m.n_records) {
    throw Error(ErrorKind::kInvariant, "manifest label counts do not sum to n_records");
  }
  if (!m.config.contains("records_per_shard") || !m.config["records_per_shard"].is_number_unsigned() ||
      m.config["records_per_shard"].get<std::uint64_t>() == 0) {
    throw Error(ErrorKind::kInput, "manifest config lacks a positive records_per_shard");
  }
  const auto per_shard = m.config["records_per_shard"].get<std::uint64_t>();
  const SpecialIdsView specials{special_from(m.config, "cls"), special_from(m.config, "sep"),
                                special_from(m.config, "mask")};

  const std::uint64_t n_files = (m.n_records + per_shard - 1) / per_shard;
  std::uint64_t n_ent = 0;
  for (std::uint64_t f = 0; f < n_files; ++f) {
    const auto name = shard_file_name(f);
    std::ifstream in(dir / name, std::ios::binary);
    if (!in) throw Error(ErrorKind::kIo, "missing shard file " + (dir / name).string());
    const std::uint64_t expected = std::min(per_shard, m.n_records - f * per_shard);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (!content.empty() && content.back() != '\n') {
      throw Error(ErrorKind::kInput, name + ": truncated (last line has no terminator)");
    }
    std::uint64_t lineno = 0;
    std::size_t pos = 0;
    while (pos < content.size()) {
      const auto nl = content.find('\n', pos);
      const std::string line = content.substr(pos, nl - pos);
      pos = nl + 1;
      ++lineno;
      const auto locus = name + ":" + std::to_string(lineno);
      if (lineno > expected) {
        throw Error(ErrorKind::kInvariant, locus + ": more records than the manifest declares");
      }
      auto r = parse_record(line, locus);
      validate_record(r, locus, specials);
      if (!set.records.empty()) {
        const auto& prev = set.records.back();
        if (std::tie(r.doc_id, r.sent_idx) <= std::tie(prev.doc_id, prev.sent_idx)) {
          throw Error(ErrorKind::kInvariant, locus + ": records out of (doc, sent) order");
        }
      }
      n_ent += r.cls_label == 1;
      set.records.push_back(std::move(r));
    }
    if (lineno != expected) {
      throw Error(ErrorKind::kInvariant, name + ": holds " + std::to_string(lineno) + " records, manifest implies " +
                                             std::to_string(expected));
    }
  }
  if (set.records.size() != m.n_records || n_ent != m.n_entailment) {
    throw Error(ErrorKind::kInvariant, "record or label counts differ from the manifest");
  }
  return set;
}

}  // namespace logiprep
