// logiprep command-line driver.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "logiprep/error.hpp"
#include "logiprep/pipeline.hpp"
#include "logiprep/sha256.hpp"
#include "logiprep/toyloss.hpp"

namespace fs = std::filesystem;
using namespace logiprep;

namespace {

// Options shared by the subcommands that run the pipeline.
struct PipelineFlags {
  std::string config_file;
  std::vector<std::string> sets;
  std::string input, format, lexicon, tagger, vocab, policy, category, output;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::optional<std::size_t> records_per_shard;
  bool one_doc_per_file = false;

  void attach(CLI::App* app, bool with_output) {
    app->add_option("-c,--config", config_file, "key = value config file");
    app->add_option("--set", sets, "override one config key (key=value)");
    app->add_option("--input", input, "corpus file or directory");
    app->add_option("--format", format, "jsonl or text");
    app->add_flag("--one-doc-per-file", one_doc_per_file, "plain text: each file is one document");
    app->add_option("--lexicon", lexicon, "keyword lexicon file or 'builtin'");
    app->add_option("--tagger", tagger, "tagger model file");
    app->add_option("--vocab", vocab, "WordPiece vocab file");
    app->add_option("--policy", policy, "base, base+nouns or base+nouns+random");
    app->add_option("--category", category, "both, positive or negative");
    app->add_option("--seed", seed, "masking seed");
    if (with_output) {
      app->add_option("-o,--output", output, "output directory");
      app->add_option("--workers", workers, "worker threads");
      app->add_option("--records-per-shard", records_per_shard, "records per shard file");
    }
  }

  RunConfig resolve() const {
    RunConfig c = config_file.empty() ? RunConfig{} : load_run_config(config_file);
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw Error(ErrorKind::kConfig, "--set expects key=value, got '" + s + "'");
      set_config_value(c, s.substr(0, eq), s.substr(eq + 1));
    }
    if (!input.empty()) set_config_value(c, "input", input);
    if (!format.empty()) set_config_value(c, "input_format", format);
    if (one_doc_per_file) c.one_doc_per_file = true;
    if (!lexicon.empty()) set_config_value(c, "lexicon", lexicon);
    if (!tagger.empty()) set_config_value(c, "tagger", tagger);
    if (!vocab.empty()) set_config_value(c, "vocab", vocab);
    if (!policy.empty()) set_config_value(c, "policy", policy);
    if (!category.empty()) set_config_value(c, "category", category);
    if (!output.empty()) set_config_value(c, "output", output);
    if (seed) c.seed = *seed;
    if (workers) set_config_value(c, "workers", std::to_string(*workers));
    if (records_per_shard) set_config_value(c, "records_per_shard", std::to_string(*records_per_shard));
    apply_environment(c);
    return c;
  }
};

InputFormat parse_format(const std::string& f) {
  if (f.empty() || f == "jsonl") return InputFormat::kJsonLines;
  if (f == "text") return InputFormat::kPlainText;
  throw Error(ErrorKind::kConfig, "--format: expected jsonl or text, got '" + f + "'");
}

std::string join_tags(const std::vector<std::string>& words, const std::vector<PosTag>& tags) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out += ' ';
    out += words[i];
    if (i < tags.size()) {
      out += '/';
      out += pos_tag_name(tags[i]);
    }
  }
  return out;
}

nlohmann::json matches_json(const std::vector<KeywordMatch>& matches, const KeywordLexicon& lex) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& m : matches) {
    const auto& e = lex.entry(m.entry);
    a.push_back({{"keyword", e.text()}, {"polarity", polarity_name(e.polarity)}, {"start", m.start}, {"end", m.end}});
  }
  return a;
}

void print_inspection(const SentenceOutcome& o, const PipelineContext& ctx) {
  std::cout << "doc " << o.sentence.doc_id << " sentence " << o.sentence.sent_idx << "\n";
  std::cout << "text:    " << o.sentence.text << "\n";
  std::cout << "words:   " << o.sentence.words.size() << "\n";
  if (!o.tags.empty()) std::cout << "tagged:  " << join_tags(o.sentence.words, o.tags) << "\n";
  std::cout << "matches:";
  if (o.matches.empty()) std::cout << " none";
  for (const auto& m : o.matches) {
    const auto& e = ctx.lexicon.entry(m.entry);
    std::cout << " \"" << e.text() << "\"(" << polarity_name(e.polarity) << ",[" << m.start << "," << m.end << "))";
  }
  std::cout << "\n";
  if (o.curated) {
    const auto& g = o.curated->governing_match();
    std::cout << "label:   " << cls_label_name(o.curated->label) << " (governed by \""
              << ctx.lexicon.entry(g.entry).text() << "\", " << label_source_name(o.curated->label_source)
              << ")\n";
  }
  if (o.dropped) {
    std::cout << "dropped: " << drop_reason_name(*o.dropped) << "\n";
    return;
  }
  std::cout << "subwords:";
  for (auto id : o.encoded->ids) std::cout << ' ' << ctx.vocab.token(id);
  std::cout << "\n";
  std::cout << "plan:\n";
  for (std::size_t i = 0; i < o.plan->selected_words.size(); ++i) {
    const auto w = o.plan->selected_words[i];
    std::cout << "  word " << w << " \"" << o.sentence.words[w] << "\" " << pos_tag_name(o.curated->tags[w])
              << " -> " << action_kind_name(o.plan->word_actions[i]) << "\n";
  }
  std::cout << "record:  " << record_to_json_line(*o.record) << "\n";
  std::cout << "input:  ";
  for (auto id : o.record->input_ids) std::cout << ' ' << ctx.vocab.token(id);
  std::cout << "\n";
}

int run(int argc, char** argv) {
  CLI::App app{"logiprep: implication-corpus curation and selective-masking shards"};
  app.require_subcommand(1);

  // segment
  auto* seg = app.add_subcommand("segment", "split a corpus into sentences (JSONL preview)");
  std::string seg_input, seg_format;
  bool seg_one = false;
  std::size_t seg_limit = 0;
  seg->add_option("input", seg_input, "corpus file or directory")->required();
  seg->add_option("--format", seg_format, "jsonl or text");
  seg->add_flag("--one-doc-per-file", seg_one, "plain text: each file is one document");
  seg->add_option("--limit", seg_limit, "stop after this many sentences (0 = all)");

  // tag-train
  auto* tt = app.add_subcommand("tag-train", "train the averaged-perceptron tagger on CoNLL-U");
  std::string tt_train, tt_dev, tt_out;
  std::uint32_t tt_epochs = 5;
  std::uint64_t tt_seed = 0;
  tt->add_option("--train", tt_train, "training treebank (.conllu)")->required();
  tt->add_option("--dev", tt_dev, "held-out treebank for accuracy");
  tt->add_option("-o,--out", tt_out, "model output path")->required();
  tt->add_option("--epochs", tt_epochs, "training epochs");
  tt->add_option("--seed", tt_seed, "shuffle seed");

  // tag
  auto* tg = app.add_subcommand("tag", "POS-tag the sentences of a corpus");
  std::string tg_model, tg_input, tg_format;
  std::size_t tg_limit = 0;
  tg->add_option("--model", tg_model, "tagger model")->required();
  tg->add_option("input", tg_input, "corpus file or directory")->required();
  tg->add_option("--format", tg_format, "jsonl or text");
  tg->add_option("--limit", tg_limit, "stop after this many sentences (0 = all)");

  // curate
  auto* cu = app.add_subcommand("curate", "keyword-filter and label sentences (JSONL)");
  PipelineFlags cu_flags;
  cu_flags.attach(cu, false);

  // pack
  auto* pk = app.add_subcommand("pack", "full pipeline: shards, manifest and report");
  PipelineFlags pk_flags;
  pk_flags.attach(pk, true);

  // stats
  auto* st = app.add_subcommand("stats", "re-render a run report");
  std::string st_path, st_format = "text";
  st->add_option("report", st_path, "report.json or a pack output directory")->required();
  st->add_option("--format", st_format, "text, json or csv");

  // verify
  auto* vf = app.add_subcommand("verify", "re-validate shard invariants");
  std::string vf_dir, vf_vocab, vf_policy;
  vf->add_option("dir", vf_dir, "shard directory")->required();
  vf->add_option("--vocab", vf_vocab, "vocab file the shards must have been built with");
  vf->add_option("--policy-sha256", vf_policy, "expected policy digest");

  // train-toy
  auto* ty = app.add_subcommand("train-toy", "train the tiny reference encoder on shards");
  std::string ty_dir, ty_curve;
  ToyTrainOptions ty_opts;
  ty->add_option("shards", ty_dir, "shard directory")->required();
  ty->add_option("--steps", ty_opts.steps, "gradient steps");
  ty->add_option("--lr", ty_opts.learning_rate, "learning rate");
  ty->add_option("--seed", ty_opts.seed, "initialization seed");
  ty->add_option("--width", ty_opts.width, "model width d");
  ty->add_option("--cls-weight", ty_opts.cls_weight, "weight of the e-CLS term");
  ty->add_option("--curve", ty_curve, "write the loss curve CSV here (default stdout)");

  // inspect
  auto* in = app.add_subcommand("inspect", "trace one sentence through the pipeline");
  PipelineFlags in_flags;
  in_flags.attach(in, false);
  std::uint64_t in_doc = 0;
  std::uint32_t in_sent = 0;
  in->add_option("doc_id", in_doc, "document id")->required();
  in->add_option("sent_idx", in_sent, "sentence index within the document")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    throw Error(ErrorKind::kConfig, e.what());
  }

  if (*seg) {
    DocumentReader reader(seg_input, parse_format(seg_format), seg_one);
    std::size_t n = 0;
    while (auto doc = reader.next()) {
      for (const auto& s : split_sentences(*doc)) {
        nlohmann::json j{{"doc", s.doc_id}, {"sent", s.sent_idx}, {"text", s.text}, {"words", s.words}};
        std::cout << j.dump() << "\n";
        if (seg_limit && ++n >= seg_limit) return 0;
      }
    }
    return 0;
  }
  if (*tt) {
    TaggerModel model = train_tagger(fs::path(tt_train), tt_epochs, tt_seed);
    if (!tt_dev.empty()) {
      auto dev = read_conllu_file(tt_dev);
      model.metadata().heldout_accuracy = evaluate_tagger(model, dev);
      std::printf("dev accuracy %.4f on %zu sentences\n", model.metadata().heldout_accuracy, dev.size());
    }
    model.save(tt_out);
    std::printf("saved %s (%zu features, %u epochs)\n", tt_out.c_str(), model.feature_count(), tt_epochs);
    return 0;
  }
  if (*tg) {
    TaggerModel model = TaggerModel::load(tg_model);
    DocumentReader reader(tg_input, parse_format(tg_format));
    std::size_t n = 0;
    while (auto doc = reader.next()) {
      for (const auto& s : split_sentences(*doc)) {
        std::cout << s.doc_id << "\t" << s.sent_idx << "\t" << join_tags(s.words, model.tag(s.words)) << "\n";
        if (tg_limit && ++n >= tg_limit) return 0;
      }
    }
    return 0;
  }
  if (*cu) {
    RunConfig c = cu_flags.resolve();
    validate(c, ConfigUse::kInspect);
    PipelineContext ctx = PipelineContext::load(c);
    DocumentReader reader(c.input, c.input_format, c.one_doc_per_file);
    CurationCounters counters;
    while (auto doc = reader.next()) {
      std::vector<SegmentedSentence> kept_len;
      for (auto& s : split_sentences(*doc)) {
        if (within_length_limits(s)) kept_len.push_back(std::move(s));
      }
      auto curated = curate_stream(
          std::move(kept_len), [&](const SegmentedSentence& s) { return ctx.tagger.tag(s.words); },
          ctx.lexicon, c.category_filter, counters);
      for (const auto& cs : curated) {
        nlohmann::json j{{"doc", cs.segmented.doc_id},
                         {"sent", cs.segmented.sent_idx},
                         {"label", cls_label_name(cs.label)},
                         {"label_source", label_source_name(cs.label_source)},
                         {"governing", ctx.lexicon.entry(cs.governing_match().entry).text()},
                         {"matches", matches_json(cs.matches, ctx.lexicon)},
                         {"text", cs.segmented.text}};
        std::cout << j.dump() << "\n";
      }
    }
    std::fprintf(stderr, "seen %llu, no keyword %llu, category-filtered %llu, positive %llu, negative %llu\n",
                 static_cast<unsigned long long>(counters.seen),
                 static_cast<unsigned long long>(counters.no_keyword),
                 static_cast<unsigned long long>(counters.filtered_by_category),
                 static_cast<unsigned long long>(counters.positive_governed),
                 static_cast<unsigned long long>(counters.negative_governed));
    return 0;
  }
  if (*pk) {
    RunConfig c = pk_flags.resolve();
    PackResult r = pack(c);
    std::printf("wrote %llu records to %s (vocab %s, policy %s)\n",
                static_cast<unsigned long long>(r.manifest.n_records), c.output_dir.c_str(),
                r.manifest.vocab_sha256.substr(0, 12).c_str(), r.manifest.policy_sha256.substr(0, 12).c_str());
    std::cout << render(r.report, ReportFormat::kText);
    return 0;
  }
  if (*st) {
    fs::path p = st_path;
    if (fs::is_directory(p)) p /= kReportFileName;
    std::ifstream f(p);
    if (!f) throw Error(ErrorKind::kIo, "cannot open " + p.string());
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::kInput, p.string() + ": " + e.what());
    }
    RunReport report = report_from_json(j);
    report.check();
    ReportFormat fmt;
    if (st_format == "text") {
      fmt = ReportFormat::kText;
    } else if (st_format == "json") {
      fmt = ReportFormat::kJson;
    } else if (st_format == "csv") {
      fmt = ReportFormat::kCsv;
    } else {
      throw Error(ErrorKind::kConfig, "--format: expected text, json or csv");
    }
    std::cout << render(report, fmt);
    return 0;
  }
  if (*vf) {
    ShardExpectations expect;
    if (!vf_vocab.empty()) expect.vocab_sha256 = SubwordVocab::load(vf_vocab).digest();
    if (!vf_policy.empty()) expect.policy_sha256 = vf_policy;
    ShardSet set = read_shards(vf_dir, expect);
    std::printf("ok: %zu records (%llu entailment, %llu contradiction)\n", set.records.size(),
                static_cast<unsigned long long>(set.manifest.n_entailment),
                static_cast<unsigned long long>(set.manifest.n_contradiction));
    return 0;
  }
  if (*ty) {
    ToyTrainResult r = train_toy(fs::path(ty_dir), ty_opts);
    if (ty_curve.empty()) {
      write_loss_curve_csv(std::cout, r.curve);
    } else {
      std::ofstream out(ty_curve);
      write_loss_curve_csv(out, r.curve);
      if (!out.flush()) throw Error(ErrorKind::kIo, "cannot write " + ty_curve);
    }
    const ToyEvaluation before = evaluate_toy(r.initial, r.records, {1.0, ty_opts.cls_weight});
    const ToyEvaluation after = evaluate_toy(r.params, r.records, {1.0, ty_opts.cls_weight});
    std::fprintf(stderr, "mean total loss %.4f -> %.4f, e-CLS accuracy %.4f -> %.4f over %zu records\n",
                 before.total, after.total, before.cls_accuracy, after.cls_accuracy, r.records.size());
    return 0;
  }
  if (*in) {
    RunConfig c = in_flags.resolve();
    SentenceOutcome o = inspect(c, in_doc, in_sent);
    print_inspection(o, PipelineContext::load(c));
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    std::cerr << "logiprep: " << error_class_name(e.kind()) << ": " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "logiprep: " << error_class_name(ErrorKind::kInvariant) << ": " << e.what() << "\n";
    return static_cast<int>(ErrorKind::kInvariant);
  }
}
