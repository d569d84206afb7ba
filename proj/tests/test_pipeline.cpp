#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <sys/wait.h>

#include "logiprep/error.hpp"
#include "logiprep/pipeline.hpp"
#include "logiprep/sha256.hpp"
#include "support.hpp"

using namespace logiprep;
namespace fs = std::filesystem;
using test_support::read_file;
using test_support::TempDir;
using test_support::write_file;

namespace {

RunConfig fixture_config(const fs::path& out) {
  RunConfig c;
  c.input = test_support::corpus_path();
  c.tagger_model = test_support::fixture_tagger_path();
  c.vocab = test_support::vocab_path();
  c.output_dir = out;
  return c;
}

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_run_config(in, "test.toml");
}

std::string config_error(const std::string& text) {
  try {
    parse(text);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kConfig);
    return e.what();
  }
  FAIL("no error for: " << text);
  return {};
}

std::map<std::string, std::string> digests(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) out[e.path().filename().string()] = sha256_file_hex(e.path());
  return out;
}

struct CliResult {
  int code;
  std::string output;
};

CliResult cli(const std::string& args) {
  const std::string cmd = std::string(LOGIPREP_CLI_PATH) + " " + args + " 2>&1";
  FILE* p = ::popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::string out;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, p)) out.append(buf, n);
  const int status = ::pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string fixture_flags() {
  return "--input " + test_support::corpus_path().string() + " --tagger " +
         test_support::fixture_tagger_path().string() + " --vocab " + test_support::vocab_path().string();
}

}  // namespace

TEST_CASE("config file parsing") {
  auto c = parse(R"(# run settings
[run]
input = "corpus dir/a.jsonl"   # quoted, with a space
input_format = text
one_doc_per_file = true
tagger = model.bin
vocab = vocab.txt
policy = base+nouns
candidate_tags = ADJ, ADV ,VERB
mask_rate = 0.2
mask_prob = 0.7
random_prob = 0.2
keep_prob = 0.1
category = positive
records_per_shard = 250
output = out
seed = 17
workers = 4
lexicon = builtin
)");
  CHECK(c.input == "corpus dir/a.jsonl");
  CHECK(c.input_format == InputFormat::kPlainText);
  CHECK(c.one_doc_per_file);
  CHECK(!c.lexicon);
  CHECK(c.policy == "base+nouns");
  REQUIRE(c.candidate_tags);
  CHECK(*c.candidate_tags == PosTagSet{PosTag::kAdj, PosTag::kAdv, PosTag::kVerb});
  CHECK(c.mask_rate == 0.2);
  CHECK(c.action_probs.mask == 0.7);
  CHECK(c.category_filter == CategoryFilter::kPositiveOnly);
  CHECK(c.records_per_shard == 250);
  CHECK(c.seed == 17);
  CHECK(c.workers == 4);

  auto p = resolve_policy(c);
  CHECK(p.candidate_tags == *c.candidate_tags);
  CHECK(p.mask_rate == 0.2);
  CHECK(p.seed == 17);
}

TEST_CASE("config errors name the line") {
  CHECK(config_error("seed = 1\nbogus = 2\n").find("test.toml:2") != std::string::npos);
  CHECK(config_error("seed\n").find("test.toml:1") != std::string::npos);
  CHECK(config_error("seed = -3\n").find("seed") != std::string::npos);
  CHECK(config_error("mask_rate = fast\n").find("mask_rate") != std::string::npos);
  CHECK(config_error("policy = nouns\n").find("policy") != std::string::npos);
  CHECK(config_error("candidate_tags = ADJ, FOO\n").find("FOO") != std::string::npos);
  CHECK(config_error("workers = 0\n").find("workers") != std::string::npos);
  CHECK(config_error("records_per_shard = 0\n").find("records_per_shard") != std::string::npos);
  CHECK(config_error("one_doc_per_file = maybe\n").find("one_doc_per_file") != std::string::npos);
}

TEST_CASE("policy validation reaches the run config") {
  TempDir dir;
  auto c = fixture_config(dir / "out");
  c.action_probs = {0.5, 0.1, 0.1};
  CHECK_THROWS_AS(validate(c), Error);
  CHECK_THROWS_AS(pack(c), Error);
  c = fixture_config(dir / "out");
  c.tagger_model = dir / "missing.bin";
  CHECK_THROWS_AS(validate(c), Error);
  c = fixture_config("");
  CHECK_THROWS_AS(validate(c), Error);
  validate(c, ConfigUse::kInspect);
}

TEST_CASE("LOGIPREP_SEED overrides the configured seed") {
  RunConfig c;
  c.seed = 3;
  ::unsetenv("LOGIPREP_SEED");
  apply_environment(c);
  CHECK(c.seed == 3);
  ::setenv("LOGIPREP_SEED", "99", 1);
  apply_environment(c);
  CHECK(c.seed == 99);
  ::setenv("LOGIPREP_SEED", "x", 1);
  CHECK_THROWS_AS(apply_environment(c), Error);
  ::unsetenv("LOGIPREP_SEED");
}

TEST_CASE("pack output is byte-identical across worker counts and reruns") {
  TempDir dir;
  auto c = fixture_config(dir / "one");
  auto r1 = pack(c);
  c.output_dir = dir / "eight";
  c.workers = 8;
  auto r8 = pack(c);
  CHECK(r1.report == r8.report);
  auto d1 = digests(dir / "one");
  CHECK(d1 == digests(dir / "eight"));
  CHECK(d1.contains("manifest.json"));
  CHECK(d1.contains("report.json"));
  CHECK(d1.contains("shard-00000.jsonl"));

  c.workers = 3;
  pack(c);
  CHECK(digests(dir / "eight") == d1);

  c.seed = 1;
  pack(c);
  CHECK(digests(dir / "eight") != d1);
  CHECK(!fs::exists(dir / "eight.partial"));
}

TEST_CASE("pack writes a consistent report and manifest") {
  TempDir dir;
  auto c = fixture_config(dir / "out");
  c.records_per_shard = 300;
  auto res = pack(c);
  auto set = read_shards(dir / "out");
  CHECK(set.records.size() == res.report.sentences_kept);
  CHECK(res.manifest.n_entailment == res.report.kept_positive);
  CHECK(res.manifest.n_contradiction == res.report.kept_negative);
  CHECK(res.report.sentences_seen == 1000);
  CHECK(report_from_json(nlohmann::json::parse(read_file(dir / "out" / "report.json"))) == res.report);
  const auto& cfg = set.manifest.config;
  CHECK(cfg["vocab_size"] == 352);
  CHECK(cfg["special_ids"]["mask"] == 4);
  CHECK(cfg["deduplicated"] == false);
  CHECK(!cfg.contains("workers"));
  CHECK(!cfg.contains("output"));
  CHECK(set.manifest.vocab_sha256 == sha256_file_hex(test_support::vocab_path()));
}

TEST_CASE("category filter keeps one polarity") {
  TempDir dir;
  auto c = fixture_config(dir / "out");
  c.category_filter = CategoryFilter::kPositiveOnly;
  auto res = pack(c);
  CHECK(res.report.kept_negative == 0);
  CHECK(res.report.kept_positive > 0);
  CHECK(res.report.dropped.category > 0);
  for (const auto& r : read_shards(dir / "out").records) CHECK(r.cls_label == 1);
}

TEST_CASE("a failed run leaves earlier output untouched") {
  TempDir dir;
  auto c = fixture_config(dir / "out");
  pack(c);
  const auto before = digests(dir / "out");

  // Malformed UTF-8 in the last document fails the run late.
  auto corpus = read_file(test_support::corpus_path());
  corpus += "{\"id\": 999999, \"title\": \"x\", \"text\": \"Bad \xff byte. So it goes.\"}\n";
  write_file(dir / "bad.jsonl", corpus);
  c.input = dir / "bad.jsonl";
  try {
    pack(c);
    FAIL("pack succeeded");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kInput);
  }
  CHECK(digests(dir / "out") == before);
  CHECK(!fs::exists(dir / "out.partial"));

  c.output_dir = dir / "fresh";
  CHECK_THROWS_AS(pack(c), Error);
  CHECK(!fs::exists(dir / "fresh/manifest.json"));
  CHECK(!fs::exists(dir / "fresh.partial"));
}

TEST_CASE("inspect") {
  auto c = fixture_config("");
  auto o = inspect(c, 1065, 2);
  REQUIRE(o.curated);
  CHECK(o.curated->label == ClsLabel::kEntailment);
  CHECK(!o.dropped);
  REQUIRE(o.record);
  CHECK(o.record->cls_label == 1);
  CHECK_THROWS_AS(inspect(c, 1065, 99), Error);
  CHECK_THROWS_AS(inspect(c, 5, 0), Error);
}

TEST_CASE("CLI exit codes and messages") {
  TempDir dir;
  const auto out = (dir / "out").string();

  auto packed = cli("pack " + fixture_flags() + " -o " + out);
  CHECK(packed.code == 0);
  auto ok = cli("verify " + out + " --vocab " + test_support::vocab_path().string());
  CHECK(ok.code == 0);
  CHECK(ok.output.find("ok:") != std::string::npos);

  auto insp = cli("inspect 1065 2 " + fixture_flags());
  CHECK(insp.code == 0);
  CHECK(insp.output.find("Entailment") != std::string::npos);
  CHECK(insp.output.find("hence") != std::string::npos);

  auto missing = cli("inspect 1065 99 " + fixture_flags());
  CHECK(missing.code == 3);
  CHECK(missing.output.find("input-error") != std::string::npos);

  auto bad_key = cli("pack --set bogus=1 -o " + out);
  CHECK(bad_key.code == 2);
  CHECK(bad_key.output.find("config-error") != std::string::npos);
  CHECK(cli("pack --no-such-flag").code == 2);
  CHECK(cli("").code == 2);

  // Strip every target from the fifth record.
  auto shard = fs::path(out) / "shard-00000.jsonl";
  std::istringstream in(read_file(shard));
  std::string line, rewritten;
  for (int i = 1; std::getline(in, line); ++i) {
    if (i == 5) {
      auto j = nlohmann::json::parse(line);
      for (auto& t : j["tgt"]) t = -1;
      for (auto& id : j["ids"]) if (id == 4) id = 10;
      line = j.dump();
    }
    rewritten += line + "\n";
  }
  write_file(shard, rewritten);
  auto broken = cli("verify " + out);
  CHECK(broken.code == 4);
  CHECK(broken.output.find("invariant-violation") != std::string::npos);
  CHECK(broken.output.find("shard-00000.jsonl:5") != std::string::npos);

  auto stats = cli("stats " + out + " --format csv");
  CHECK(stats.code == 0);
  CHECK(stats.output.starts_with("section,key,value\n"));
}

TEST_CASE("CLI train-toy writes a loss curve") {
  TempDir dir;
  const auto out = (dir / "out").string();
  REQUIRE(cli("pack " + fixture_flags() + " -o " + out).code == 0);
  const auto curve = (dir / "curve.csv").string();
  auto r = cli("train-toy " + out + " --steps 50 --curve " + curve);
  CHECK(r.code == 0);
  auto text = read_file(curve);
  CHECK(text.starts_with("step,l_smlm,l_ecls,total\n"));
  CHECK(std::count(text.begin(), text.end(), '\n') == 51);
}
