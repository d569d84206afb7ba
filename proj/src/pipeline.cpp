#include "logiprep/pipeline.hpp"

#include <atomic>
#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "logiprep/error.hpp"
#include "logiprep/sha256.hpp"
#include "logiprep/strings.hpp"

namespace logiprep {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string unquote(const std::string& v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
  return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty()) {
    throw Error(ErrorKind::kConfig, key + ": expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  errno = 0;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || errno != 0) {
    throw Error(ErrorKind::kConfig, key + ": expected a number, got '" + v + "'");
  }
  return d;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw Error(ErrorKind::kConfig, key + ": expected true or false, got '" + v + "'");
}

PosTagSet parse_tag_list(const std::string& key, const std::string& v) {
  PosTagSet set;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    auto tag = parse_pos_tag(item);
    if (!tag) throw Error(ErrorKind::kConfig, key + ": unknown POS tag '" + item + "'");
    set.insert(*tag);
  }
  if (set.empty()) throw Error(ErrorKind::kConfig, key + ": empty tag list");
  return set;
}

std::string input_format_name(InputFormat f) { return f == InputFormat::kJsonLines ? "jsonl" : "text"; }

std::string tag_list(const PosTagSet& set) {
  std::string out;
  for (auto t : set.tags()) {
    if (!out.empty()) out += ",";
    out += pos_tag_name(t);
  }
  return out;
}

void require_file(const fs::path& p, const char* what) {
  if (p.empty()) throw Error(ErrorKind::kConfig, std::string(what) + " is not set");
  std::error_code ec;
  if (!fs::exists(p, ec)) throw Error(ErrorKind::kConfig, std::string(what) + " not found: " + p.string());
}

void accumulate(RunReport& report, const SentenceOutcome& o, const PipelineContext& ctx) {
  ++report.sentences_seen;
  if (o.dropped) {
    switch (*o.dropped) {
      case DropReason::kLength: ++report.dropped.length; break;
      case DropReason::kNoKeyword: ++report.dropped.no_keyword; break;
      case DropReason::kCategory: ++report.dropped.category; break;
      case DropReason::kOverLength: ++report.dropped.over_length; break;
      case DropReason::kNoCandidate: ++report.dropped.no_candidate; break;
    }
    return;
  }
  const CuratedSentence& c = *o.curated;
  ++report.sentences_kept;
  if (c.label == ClsLabel::kEntailment) {
    ++report.kept_positive;
  } else {
    ++report.kept_negative;
  }
  if (c.label_source == LabelSource::kEarliestOfBoth) ++report.kept_mixed_polarity;
  for (const auto& m : c.matches) ++report.keyword_frequency[ctx.lexicon.entry(m.entry).text()];
  if (o.record->keyword_masked) ++report.keyword_masked;
  report.words_selected += o.plan->selected_words.size();
  for (auto w : mask_candidates(c.tags, *o.encoded, ctx.vocab, ctx.policy)) {
    ++report.candidate_tag_frequency[std::string(pos_tag_name(normalize_pos_tag(c.tags[w])))];
  }
}

}  // namespace

void set_config_value(RunConfig& c, const std::string& key, const std::string& raw) {
  const std::string v = unquote(trim(raw));
  if (key == "input") {
    c.input = v;
  } else if (key == "input_format") {
    if (v == "jsonl") {
      c.input_format = InputFormat::kJsonLines;
    } else if (v == "text") {
      c.input_format = InputFormat::kPlainText;
    } else {
      throw Error(ErrorKind::kConfig, "input_format: expected jsonl or text, got '" + v + "'");
    }
  } else if (key == "one_doc_per_file") {
    c.one_doc_per_file = parse_bool(key, v);
  } else if (key == "lexicon") {
    if (v.empty() || v == "builtin") {
      c.lexicon.reset();
    } else {
      c.lexicon = v;
    }
  } else if (key == "tagger") {
    c.tagger_model = v;
  } else if (key == "vocab") {
    c.vocab = v;
  } else if (key == "policy") {
    if (!parse_ablation_kind(v)) throw Error(ErrorKind::kConfig, "policy: unknown policy '" + v + "'");
    c.policy = v;
  } else if (key == "candidate_tags") {
    c.candidate_tags = parse_tag_list(key, v);
  } else if (key == "mask_rate") {
    c.mask_rate = parse_double(key, v);
  } else if (key == "mask_prob") {
    c.action_probs.mask = parse_double(key, v);
  } else if (key == "random_prob") {
    c.action_probs.random = parse_double(key, v);
  } else if (key == "keep_prob") {
    c.action_probs.keep = parse_double(key, v);
  } else if (key == "category") {
    auto f = parse_category_filter(v);
    if (!f) throw Error(ErrorKind::kConfig, "category: expected both, positive or negative, got '" + v + "'");
    c.category_filter = *f;
  } else if (key == "records_per_shard") {
    c.records_per_shard = parse_u64(key, v);
    if (c.records_per_shard == 0) throw Error(ErrorKind::kConfig, "records_per_shard must be positive");
  } else if (key == "output") {
    c.output_dir = v;
  } else if (key == "seed") {
    c.seed = parse_u64(key, v);
  } else if (key == "workers") {
    const auto w = parse_u64(key, v);
    if (w == 0 || w > 1024) throw Error(ErrorKind::kConfig, "workers must be in [1, 1024]");
    c.workers = static_cast<unsigned>(w);
  } else {
    throw Error(ErrorKind::kConfig, "unknown config key '" + key + "'");
  }
}

RunConfig parse_run_config(std::istream& in, std::string_view source) {
  RunConfig c;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // A '#' inside a quoted value is kept.
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line.resize(i);
        break;
      }
    }
    const std::string t = trim(line);
    if (t.empty() || t.front() == '[') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::kConfig, std::string(source) + ":" + std::to_string(lineno) + ": expected key = value");
    }
    try {
      set_config_value(c, trim(t.substr(0, eq)), t.substr(eq + 1));
    } catch (const Error& e) {
      throw Error(ErrorKind::kConfig, std::string(source) + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kConfig, "cannot open config " + path.string());
  return parse_run_config(in, path.string());
}

void apply_environment(RunConfig& config) {
  if (const char* s = std::getenv("LOGIPREP_SEED"); s != nullptr && *s != '\0') {
    config.seed = parse_u64("LOGIPREP_SEED", s);
  }
}

void validate(const RunConfig& c, ConfigUse use) {
  require_file(c.input, "input");
  require_file(c.tagger_model, "tagger");
  require_file(c.vocab, "vocab");
  if (c.lexicon) require_file(*c.lexicon, "lexicon");
  if (use == ConfigUse::kPack && c.output_dir.empty()) throw Error(ErrorKind::kConfig, "output is not set");
  if (c.workers == 0) throw Error(ErrorKind::kConfig, "workers must be positive");
  if (c.records_per_shard == 0) throw Error(ErrorKind::kConfig, "records_per_shard must be positive");
  validate(resolve_policy(c));
}

MaskPolicy resolve_policy(const RunConfig& c) {
  auto kind = parse_ablation_kind(c.policy);
  if (!kind) throw Error(ErrorKind::kConfig, "unknown policy '" + c.policy + "'");
  MaskPolicy p = ablation_policy(*kind, c.seed);
  if (c.candidate_tags) p.candidate_tags = *c.candidate_tags;
  p.mask_rate = c.mask_rate;
  p.action_probs = c.action_probs;
  return p;
}

PipelineContext PipelineContext::load(const RunConfig& c) {
  MaskPolicy policy = resolve_policy(c);
  validate(policy);
  PipelineContext ctx{c.lexicon ? KeywordLexicon::load(*c.lexicon) : KeywordLexicon::builtin(),
                      TaggerModel::load(c.tagger_model),
                      SubwordVocab::load(c.vocab),
                      policy,
                      c.category_filter,
                      {},
                      {}};
  const SpecialIds& s = ctx.vocab.specials();
  nlohmann::json j;
  j["input"] = c.input.generic_string();
  j["input_format"] = input_format_name(c.input_format);
  j["one_doc_per_file"] = c.one_doc_per_file;
  j["lexicon"] = c.lexicon ? c.lexicon->generic_string() : std::string("builtin");
  j["lexicon_sha256"] = sha256_hex(ctx.lexicon.serialize());
  j["tagger"] = c.tagger_model.generic_string();
  j["tagger_sha256"] = sha256_hex(ctx.tagger.serialize());
  j["vocab"] = c.vocab.generic_string();
  j["vocab_size"] = ctx.vocab.size();
  j["special_ids"] = {{"pad", s.pad}, {"unk", s.unk}, {"cls", s.cls}, {"sep", s.sep}, {"mask", s.mask}};
  j["mask_id"] = s.mask;
  j["policy"] = c.policy;
  j["candidate_tags"] = tag_list(policy.candidate_tags);
  j["mask_policy"] = nlohmann::json::parse(canonical_policy_json(policy));
  j["category_filter"] = category_filter_name(c.category_filter);
  j["records_per_shard"] = c.records_per_shard;
  j["seed"] = c.seed;
  j["deduplicated"] = false;
  j["min_sentence_words"] = kMinSentenceWords;
  j["max_sentence_words"] = kMaxSentenceWords;
  j["max_sequence_length"] = kMaxSequenceLength;
  ctx.resolved_config = j;
  ctx.config_digest = sha256_hex(j.dump());
  return ctx;
}

std::string_view drop_reason_name(DropReason r) {
  switch (r) {
    case DropReason::kLength: return "length";
    case DropReason::kNoKeyword: return "no_keyword";
    case DropReason::kCategory: return "category";
    case DropReason::kOverLength: return "over_length";
    case DropReason::kNoCandidate: return "no_candidate";
  }
  return "?";
}

SentenceOutcome process_sentence(const PipelineContext& ctx, SegmentedSentence sentence) {
  SentenceOutcome o;
  o.sentence = std::move(sentence);
  if (!within_length_limits(o.sentence)) {
    o.dropped = DropReason::kLength;
    return o;
  }
  o.matches = ctx.lexicon.match(o.sentence.words);
  if (o.matches.empty()) {
    o.dropped = DropReason::kNoKeyword;
    return o;
  }
  o.tags = ctx.tagger.tag(o.sentence.words);
  o.curated = curate(o.sentence, o.tags, ctx.lexicon);
  if (!passes_category(*o.curated, ctx.lexicon, ctx.category_filter)) {
    o.dropped = DropReason::kCategory;
    return o;
  }
  try {
    o.encoded = encode(ctx.vocab, o.sentence.words);
  } catch (const OverLengthError&) {
    o.dropped = DropReason::kOverLength;
    return o;
  }
  o.plan = plan(*o.curated, *o.encoded, ctx.vocab, ctx.policy);
  if (!o.plan) {
    o.dropped = DropReason::kNoCandidate;
    return o;
  }
  o.record = build_record(*o.curated, *o.encoded, *o.plan);
  return o;
}

DocumentResult process_document(const PipelineContext& ctx, const RawDocument& doc) {
  DocumentResult out;
  out.report.config_digest = ctx.config_digest;
  for (auto& s : split_sentences(doc)) {
    SentenceOutcome o = process_sentence(ctx, std::move(s));
    accumulate(out.report, o, ctx);
    if (o.record) out.records.push_back(std::move(*o.record));
  }
  return out;
}

DocumentResult process_corpus(const PipelineContext& ctx, const std::vector<RawDocument>& docs,
                              unsigned workers) {
  if (workers == 0) workers = 1;
  std::vector<std::vector<TrainingRecord>> per_doc(docs.size());
  std::vector<RunReport> per_worker(workers);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mu;

  auto work = [&](unsigned w) {
    try {
      for (std::size_t i = next++; i < docs.size() && !failed; i = next++) {
        DocumentResult r = process_document(ctx, docs[i]);
        per_doc[i] = std::move(r.records);
        per_worker[w] = merge(per_worker[w], r.report);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mu);
      if (!error) error = std::current_exception();
      failed = true;
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  DocumentResult out;
  out.report.config_digest = ctx.config_digest;
  for (const auto& r : per_worker) out.report = merge(out.report, r);
  for (auto& recs : per_doc) {
    for (auto& r : recs) out.records.push_back(std::move(r));
  }
  out.report.check();
  return out;
}

PackResult pack(const RunConfig& config) {
  validate(config, ConfigUse::kPack);
  PipelineContext ctx = PipelineContext::load(config);
  std::vector<RawDocument> docs =
      DocumentReader(config.input, config.input_format, config.one_doc_per_file).read_all();
  DocumentResult result = process_corpus(ctx, docs, config.workers);

  const fs::path out = config.output_dir;
  fs::path staging = out;
  staging += ".partial";
  PackResult packed;
  try {
    fs::remove_all(staging);
    fs::create_directories(staging);
    ShardWriteOptions opts;
    opts.records_per_shard = config.records_per_shard;
    opts.vocab_sha256 = ctx.vocab.digest();
    opts.policy_sha256 = sha256_hex(canonical_policy_json(ctx.policy));
    opts.config = ctx.resolved_config;
    packed.manifest = write_shards(std::move(result.records), staging, opts);
    packed.report = result.report;
    {
      std::ofstream rep(staging / kReportFileName, std::ios::binary);
      rep << render(result.report, ReportFormat::kJson);
      if (!rep.flush()) throw Error(ErrorKind::kIo, "cannot write " + (staging / kReportFileName).string());
    }
    fs::create_directories(out);
    for (const auto& e : fs::directory_iterator(out)) {
      const std::string name = e.path().filename().string();
      if (name == "manifest.json" || name == kReportFileName ||
          (name.starts_with("shard-") && name.ends_with(".jsonl"))) {
        fs::remove(e.path());
      }
    }
    for (const auto& e : fs::directory_iterator(staging)) fs::rename(e.path(), out / e.path().filename());
    fs::remove_all(staging);
  } catch (const fs::filesystem_error& e) {
    std::error_code ec;
    fs::remove_all(staging, ec);
    throw Error(ErrorKind::kIo, e.what());
  } catch (...) {
    std::error_code ec;
    fs::remove_all(staging, ec);
    throw;
  }
  return packed;
}

SentenceOutcome inspect(const RunConfig& config, std::uint64_t doc_id, std::uint32_t sent_idx) {
  validate(config, ConfigUse::kInspect);
  PipelineContext ctx = PipelineContext::load(config);
  DocumentReader reader(config.input, config.input_format, config.one_doc_per_file);
  while (auto doc = reader.next()) {
    if (doc->doc_id != doc_id) continue;
    auto sentences = split_sentences(*doc);
    if (sent_idx >= sentences.size()) {
      throw Error(ErrorKind::kInput, "doc " + std::to_string(doc_id) + " has " +
                                         std::to_string(sentences.size()) + " sentences, no index " +
                                         std::to_string(sent_idx));
    }
    return process_sentence(ctx, std::move(sentences[sent_idx]));
  }
  throw Error(ErrorKind::kInput, "doc " + std::to_string(doc_id) + " not found in " + config.input.string());
}

}  // namespace logiprep
