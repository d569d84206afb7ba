#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>
#include <random>
#include <set>

#include "logiprep/error.hpp"
#include "logiprep/sha256.hpp"
#include "logiprep/shards.hpp"
#include "support.hpp"

using namespace logiprep;
namespace fs = std::filesystem;
using test_support::read_file;
using test_support::TempDir;
using test_support::write_file;

namespace {

constexpr TokenId kCls = 2, kSep = 3, kMask = 4;

TrainingRecord random_record(std::mt19937_64& rng, std::uint64_t doc, std::uint32_t sent) {
  std::uniform_int_distribution<int> len(1, 40), tok(5, 999), coin(0, 3);
  TrainingRecord r;
  const int n = len(rng);
  r.input_ids.push_back(kCls);
  r.mlm_targets.push_back(kIgnoreTarget);
  for (int i = 0; i < n; ++i) {
    const TokenId orig = tok(rng);
    const bool target = i == 0 || coin(rng) == 0;
    r.input_ids.push_back(target && coin(rng) != 0 ? kMask : orig);
    r.mlm_targets.push_back(target ? orig : kIgnoreTarget);
  }
  r.input_ids.push_back(kSep);
  r.mlm_targets.push_back(kIgnoreTarget);
  r.cls_label = coin(rng) & 1;
  r.doc_id = doc;
  r.sent_idx = sent;
  r.keyword_masked = coin(rng) == 1;
  return r;
}

std::vector<TrainingRecord> random_records(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<TrainingRecord> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(random_record(rng, 1000 + i / 4, i % 4));
  return out;
}

ShardWriteOptions options(std::size_t per_shard) {
  ShardWriteOptions o;
  o.records_per_shard = per_shard;
  o.vocab_sha256 = sha256_hex("vocab");
  o.policy_sha256 = sha256_hex("policy");
  o.config["special_ids"] = {{"pad", 0}, {"unk", 1}, {"cls", kCls}, {"sep", kSep}, {"mask", kMask}};
  return o;
}

std::size_t count_shard_files(const fs::path& dir) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir)) n += e.path().extension() == ".jsonl";
  return n;
}

std::size_t line_count(const fs::path& p) {
  const auto s = read_file(p);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

void expect_error(const fs::path& dir, ErrorKind kind, const std::string& fragment,
                  const ShardExpectations& ex = {}) {
  try {
    read_shards(dir, ex);
    FAIL("no error raised");
  } catch (const Error& e) {
    CHECK(e.kind() == kind);
    INFO(e.what());
    CHECK(std::string(e.what()).find(fragment) != std::string::npos);
  }
}

// Rewrites line `n` (1-based) of a file.
void replace_line(const fs::path& p, std::size_t n, const std::string& line) {
  std::istringstream in(read_file(p));
  std::string out, l;
  for (std::size_t i = 1; std::getline(in, l); ++i) out += (i == n ? line : l) + "\n";
  write_file(p, out);
}

}  // namespace

TEST_CASE("shard file names") {
  CHECK(shard_file_name(0) == "shard-00000.jsonl");
  CHECK(shard_file_name(12345) == "shard-12345.jsonl");
}

TEST_CASE("record line matches an independent JSON reading") {
  auto recs = random_records(200, 1);
  for (const auto& r : recs) {
    const auto line = record_to_json_line(r);
    CHECK(line.find('\n') == std::string::npos);
    auto j = nlohmann::json::parse(line);
    CHECK(j.size() == 6);
    CHECK(j["ids"].get<std::vector<TokenId>>() == r.input_ids);
    CHECK(j["tgt"].get<std::vector<std::int32_t>>() == r.mlm_targets);
    CHECK(j["cls"].get<int>() == r.cls_label);
    CHECK(j["doc"].get<std::uint64_t>() == r.doc_id);
    CHECK(j["sent"].get<std::uint32_t>() == r.sent_idx);
    CHECK(j["kwm"].get<int>() == (r.keyword_masked ? 1 : 0));
  }
}

TEST_CASE("round trip with 2500 records in shards of 1000") {
  TempDir dir;
  auto recs = random_records(2500, 2);
  auto shuffled = recs;
  std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937_64(3));
  auto m = write_shards(shuffled, dir.path(), options(1000));
  CHECK(m.n_records == 2500);
  CHECK(count_shard_files(dir.path()) == 3);
  CHECK(line_count(dir / "shard-00000.jsonl") == 1000);
  CHECK(line_count(dir / "shard-00001.jsonl") == 1000);
  CHECK(line_count(dir / "shard-00002.jsonl") == 500);

  auto manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
  std::set<std::string> keys;
  for (auto& [k, v] : manifest.items()) keys.insert(k);
  CHECK(keys == std::set<std::string>{"version", "vocab_sha256", "policy_sha256", "n_records", "n_entailment",
                                      "n_contradiction", "config"});
  const auto ent = std::count_if(recs.begin(), recs.end(), [](auto& r) { return r.cls_label == 1; });
  CHECK(manifest["n_entailment"].get<long>() == ent);
  CHECK(manifest["n_contradiction"].get<long>() == 2500 - ent);

  auto set = read_shards(dir.path(), {sha256_hex("vocab"), sha256_hex("policy")});
  CHECK(set.records == recs);
  CHECK(set.manifest.n_entailment == static_cast<std::uint64_t>(ent));
}

TEST_CASE("zero records produce a manifest and no shard files") {
  TempDir dir;
  auto m = write_shards({}, dir.path(), options(1000));
  CHECK(m.n_records == 0);
  CHECK(count_shard_files(dir.path()) == 0);
  CHECK(fs::exists(dir / "manifest.json"));
  CHECK(read_shards(dir.path()).records.empty());
}

TEST_CASE("rewriting replaces stale shards and is byte-identical") {
  TempDir dir;
  auto recs = random_records(30, 4);
  write_shards(random_records(100, 5), dir.path(), options(10));
  CHECK(count_shard_files(dir.path()) == 10);
  write_shards(recs, dir.path(), options(10));
  CHECK(count_shard_files(dir.path()) == 3);
  std::vector<std::string> first;
  for (auto f : {"manifest.json", "shard-00000.jsonl", "shard-00001.jsonl", "shard-00002.jsonl"}) {
    first.push_back(sha256_file_hex(dir / f));
  }
  write_shards(recs, dir.path(), options(10));
  std::size_t i = 0;
  for (auto f : {"manifest.json", "shard-00000.jsonl", "shard-00001.jsonl", "shard-00002.jsonl"}) {
    CHECK(sha256_file_hex(dir / f) == first[i++]);
  }
}

TEST_CASE("records_per_shard 0 is a config error") {
  TempDir dir;
  CHECK_THROWS_AS(write_shards({}, dir.path(), options(0)), Error);
}

TEST_CASE("reader rejects corrupted shard sets") {
  TempDir dir;
  auto recs = random_records(25, 6);
  auto reset = [&] { write_shards(recs, dir.path(), options(10)); };

  SUBCASE("record with no targets") {
    reset();
    auto r = recs[12];
    std::fill(r.mlm_targets.begin(), r.mlm_targets.end(), kIgnoreTarget);
    std::replace(r.input_ids.begin(), r.input_ids.end(), kMask, TokenId{7});
    replace_line(dir / "shard-00001.jsonl", 3, record_to_json_line(r));
    expect_error(dir.path(), ErrorKind::kInvariant, "shard-00001.jsonl:3");
  }
  SUBCASE("mask without target") {
    reset();
    auto r = recs[0];
    r.input_ids[r.input_ids.size() - 2] = kMask;
    r.mlm_targets[r.input_ids.size() - 2] = kIgnoreTarget;
    r.mlm_targets[1] = 9;
    replace_line(dir / "shard-00000.jsonl", 1, record_to_json_line(r));
    expect_error(dir.path(), ErrorKind::kInvariant, "shard-00000.jsonl:1");
  }
  SUBCASE("length mismatch") {
    reset();
    auto r = recs[4];
    r.mlm_targets.pop_back();
    replace_line(dir / "shard-00000.jsonl", 5, record_to_json_line(r));
    expect_error(dir.path(), ErrorKind::kInvariant, "shard-00000.jsonl:5");
  }
  SUBCASE("missing [CLS]") {
    reset();
    auto r = recs[20];
    r.input_ids[0] = 17;
    replace_line(dir / "shard-00002.jsonl", 1, record_to_json_line(r));
    expect_error(dir.path(), ErrorKind::kInvariant, "shard-00002.jsonl:1");
  }
  SUBCASE("extra key") {
    reset();
    auto j = nlohmann::json::parse(record_to_json_line(recs[3]));
    j["extra"] = 1;
    replace_line(dir / "shard-00000.jsonl", 4, j.dump());
    expect_error(dir.path(), ErrorKind::kInvariant, "shard-00000.jsonl:4");
  }
  SUBCASE("out of order") {
    reset();
    replace_line(dir / "shard-00000.jsonl", 2, record_to_json_line(recs[0]));
    expect_error(dir.path(), ErrorKind::kInvariant, "shard-00000.jsonl:2");
  }
  SUBCASE("manifest count too small") {
    reset();
    auto m = nlohmann::json::parse(read_file(dir / "manifest.json"));
    m["n_records"] = 24;
    m["n_contradiction"] = m["n_contradiction"].get<int>() - 1;
    write_file(dir / "manifest.json", m.dump());
    expect_error(dir.path(), ErrorKind::kInvariant, "shard-00002.jsonl");
  }
  SUBCASE("manifest label counts inconsistent") {
    reset();
    auto m = nlohmann::json::parse(read_file(dir / "manifest.json"));
    m["n_entailment"] = m["n_entailment"].get<int>() + 1;
    write_file(dir / "manifest.json", m.dump());
    expect_error(dir.path(), ErrorKind::kInvariant, "sum to n_records");
  }
  SUBCASE("unknown version") {
    reset();
    auto m = nlohmann::json::parse(read_file(dir / "manifest.json"));
    m["version"] = 2;
    write_file(dir / "manifest.json", m.dump());
    expect_error(dir.path(), ErrorKind::kInput, "version");
  }
  SUBCASE("extra manifest key") {
    reset();
    auto m = nlohmann::json::parse(read_file(dir / "manifest.json"));
    m["workers"] = 8;
    write_file(dir / "manifest.json", m.dump());
    expect_error(dir.path(), ErrorKind::kInput, "exactly the keys");
  }
  SUBCASE("digest mismatch") {
    reset();
    expect_error(dir.path(), ErrorKind::kConfig, "vocab digest", {sha256_hex("other"), std::nullopt});
    expect_error(dir.path(), ErrorKind::kConfig, "policy digest", {std::nullopt, sha256_hex("other")});
  }
  SUBCASE("truncated file") {
    reset();
    auto s = read_file(dir / "shard-00001.jsonl");
    write_file(dir / "shard-00001.jsonl", s.substr(0, s.size() - 20));
    expect_error(dir.path(), ErrorKind::kInput, "truncated");
  }
  SUBCASE("missing shard") {
    reset();
    fs::remove(dir / "shard-00002.jsonl");
    expect_error(dir.path(), ErrorKind::kIo, "shard-00002.jsonl");
  }
  SUBCASE("missing manifest") {
    reset();
    fs::remove(dir / "manifest.json");
    CHECK_THROWS_AS(read_shards(dir.path()), Error);
  }
}
