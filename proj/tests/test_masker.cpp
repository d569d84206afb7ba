#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include "logiprep/error.hpp"
#include "logiprep/masker.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace logiprep;

namespace {

struct Synthetic {
  SubwordVocab vocab;
  CuratedSentence sentence;
  EncodedSentence encoded;
};

// A sentence of distinct whole-word tokens w0..w(n-1) with the given tags.
Synthetic synthetic(const std::vector<PosTag>& tags, std::uint64_t doc = 1, std::uint32_t idx = 0) {
  std::vector<std::string> toks = {"[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]", "##x"};
  CuratedSentence c;
  c.segmented.doc_id = doc;
  c.segmented.sent_idx = idx;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    toks.push_back("w" + std::to_string(i));
    c.segmented.words.push_back("w" + std::to_string(i));
    c.segmented.offsets.push_back(i * 3);
  }
  c.tags = tags;
  c.matches = {{0, 0, 1}};
  Synthetic s{SubwordVocab(toks), c, {}};
  s.encoded = encode(s.vocab, s.sentence.segmented.words);
  return s;
}

}  // namespace

TEST_CASE("base policy") {
  auto p = base_policy(3);
  CHECK(p.candidate_tags.contains(PosTag::kAdv));
  CHECK(!p.candidate_tags.contains(PosTag::kNoun));
  CHECK(!p.candidate_tags.contains(PosTag::kAux));
  CHECK(p.candidate_tags.contains(PosTag::kConj));
  CHECK(p.candidate_tags.contains(PosTag::kCconj));
  CHECK(p.candidate_tags.size() == 7);
  CHECK(p.mask_rate == 0.15);
  CHECK(p.action_probs.mask + p.action_probs.random + p.action_probs.keep == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p.seed == 3);
  validate(p);
}

TEST_CASE("ablation policies") {
  auto base = ablation_policy(AblationKind::kBase, 0);
  auto nouns = ablation_policy(AblationKind::kBaseNouns, 0);
  auto random = ablation_policy(AblationKind::kBaseNounsRandom, 0);
  CHECK(base.candidate_tags == base_policy(0).candidate_tags);
  CHECK(nouns.candidate_tags.is_superset_of(base.candidate_tags));
  CHECK(!(nouns.candidate_tags == base.candidate_tags));
  for (auto t : {PosTag::kNoun, PosTag::kPron, PosTag::kPropn}) {
    CHECK(!base.candidate_tags.contains(t));
    CHECK(nouns.candidate_tags.contains(t));
  }
  CHECK(random.candidate_tags == PosTagSet::full());
  CHECK(parse_ablation_kind("base+nouns+random") == AblationKind::kBaseNounsRandom);
  CHECK(!parse_ablation_kind("nouns"));
}

TEST_CASE("policy validation") {
  auto p = base_policy(0);
  p.candidate_tags = {};
  CHECK_THROWS_AS(validate(p), Error);
  p = base_policy(0);
  p.mask_rate = 0.0;
  CHECK_THROWS_AS(validate(p), Error);
  p.mask_rate = 1.5;
  CHECK_THROWS_AS(validate(p), Error);
  p = base_policy(0);
  p.action_probs = {0.8, 0.1, 0.2};
  CHECK_THROWS_AS(validate(p), Error);
  p.action_probs = {1.1, -0.1, 0.0};
  CHECK_THROWS_AS(validate(p), Error);
  p.action_probs = {1.0, 0.0, 0.0};
  validate(p);
}

TEST_CASE("canonical policy JSON is stable and parseable") {
  auto j = nlohmann::json::parse(canonical_policy_json(base_policy(9)));
  CHECK(j["mask_rate"].get<double>() == 0.15);
  CHECK(j["seed"].get<std::uint64_t>() == 9);
  CHECK(j["candidate_tags"].size() == 7);
  CHECK(canonical_policy_json(base_policy(9)) == canonical_policy_json(base_policy(9)));
  CHECK(canonical_policy_json(base_policy(9)) != canonical_policy_json(base_policy(10)));
}

TEST_CASE("budget") {
  CHECK(masking_budget(20, 0.15) == 3);
  CHECK(masking_budget(5, 0.15) == 1);
  CHECK(masking_budget(1, 0.15) == 1);
  CHECK(masking_budget(10, 0.15) == 2);  // 1.5 rounds half away from zero
  CHECK(masking_budget(128, 0.15) == 19);
  CHECK(masking_budget(7, 1.0) == 7);
}

TEST_CASE("single candidate is always selected") {
  std::vector<PosTag> tags = {PosTag::kNoun, PosTag::kNoun, PosTag::kAdv, PosTag::kNoun, PosTag::kPunct};
  auto s = synthetic(tags);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto p = plan(s.sentence, s.encoded, s.vocab, base_policy(seed));
    REQUIRE(p);
    CHECK(p->selected_words == std::vector<std::size_t>{2});
  }
}

TEST_CASE("all-NOUN sentence has no plan under Base") {
  auto s = synthetic(std::vector<PosTag>(8, PosTag::kNoun));
  CHECK(!plan(s.sentence, s.encoded, s.vocab, base_policy(1)));
  CHECK(plan(s.sentence, s.encoded, s.vocab, ablation_policy(AblationKind::kBaseNouns, 1)));
}

TEST_CASE("[UNK]-only words are not candidates") {
  std::vector<PosTag> tags = {PosTag::kVerb, PosTag::kVerb, PosTag::kNoun, PosTag::kNoun, PosTag::kNoun};
  auto s = synthetic(tags);
  s.sentence.segmented.words[0] = "unknownword";
  s.encoded = encode(s.vocab, s.sentence.segmented.words);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto p = plan(s.sentence, s.encoded, s.vocab, base_policy(seed));
    REQUIRE(p);
    CHECK(p->selected_words == std::vector<std::size_t>{1});
  }
}

TEST_CASE("20 words, 10 candidates: 3 selected, each with frequency 0.3") {
  std::vector<PosTag> tags;
  for (int i = 0; i < 20; ++i) tags.push_back(i % 2 ? PosTag::kVerb : PosTag::kNoun);
  auto s = synthetic(tags);
  std::vector<double> hits(20, 0.0);
  const int seeds = 10000;
  for (int seed = 0; seed < seeds; ++seed) {
    auto p = plan(s.sentence, s.encoded, s.vocab, base_policy(static_cast<std::uint64_t>(seed)));
    REQUIRE(p);
    REQUIRE(p->selected_words.size() == 3);
    for (auto w : p->selected_words) hits[w] += 1.0;
  }
  for (int w = 0; w < 20; ++w) {
    if (w % 2) {
      CHECK(std::abs(hits[w] / seeds - 0.3) <= 0.02);
    } else {
      CHECK(hits[w] == 0.0);
    }
  }
}

TEST_CASE("action split and whole-word consistency on multi-piece words") {
  std::vector<std::string> toks = {"[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]", "ab", "##cd", "##ef", "x"};
  SubwordVocab vocab(toks);
  CuratedSentence c;
  c.segmented.words = {"abcdef", "x", "x", "x", "x"};
  c.segmented.offsets = {0, 7, 9, 11, 13};
  c.tags = {PosTag::kVerb, PosTag::kNoun, PosTag::kNoun, PosTag::kNoun, PosTag::kNoun};
  c.matches = {{0, 1, 2}};
  auto enc = encode(vocab, c.segmented.words);
  REQUIRE(enc.word_spans[0] == IndexSpan{1, 4});
  std::map<ActionKind, int> kinds;
  int random_mixed = 0;
  const int n = 20000;
  for (int seed = 0; seed < n; ++seed) {
    c.segmented.sent_idx = static_cast<std::uint32_t>(seed);
    auto policy = base_policy(1);
    auto p = plan(c, enc, vocab, policy);
    REQUIRE(p);
    REQUIRE(oracle::plan_violation(c.tags, enc, vocab, policy, p).empty());
    REQUIRE(p->actions.size() == 3);
    ++kinds[p->word_actions[0]];
    if (p->word_actions[0] == ActionKind::kRandom) {
      random_mixed += !(p->actions[0].replacement == p->actions[1].replacement &&
                        p->actions[1].replacement == p->actions[2].replacement);
    }
    auto r = build_record(c, enc, *p);
    for (std::size_t i = 1; i < 4; ++i) CHECK(r.mlm_targets[i] == enc.ids[i]);
    CHECK(r.mlm_targets[0] == kIgnoreTarget);
    CHECK(r.mlm_targets[4] == kIgnoreTarget);
    CHECK(!r.keyword_masked);
  }
  CHECK(std::abs(kinds[ActionKind::kMask] / double(n) - 0.8) < 0.015);
  CHECK(std::abs(kinds[ActionKind::kRandom] / double(n) - 0.1) < 0.01);
  CHECK(std::abs(kinds[ActionKind::kKeep] / double(n) - 0.1) < 0.01);
  // Random replacements are drawn per subword.
  CHECK(random_mixed > 0);
}

TEST_CASE("plans are a pure function of sentence identity and policy") {
  std::vector<PosTag> tags(30, PosTag::kAdj);
  auto a = synthetic(tags, 5, 7);
  auto b = synthetic(tags, 5, 7);
  auto c = synthetic(tags, 5, 8);
  auto pa = plan(a.sentence, a.encoded, a.vocab, base_policy(11));
  auto pb = plan(b.sentence, b.encoded, b.vocab, base_policy(11));
  auto pc = plan(c.sentence, c.encoded, c.vocab, base_policy(11));
  CHECK(pa->selected_words == pb->selected_words);
  CHECK(pa->selected_words != pc->selected_words);
}

TEST_CASE("keyword_masked flags plans touching a keyword") {
  std::vector<PosTag> tags = {PosTag::kAdv, PosTag::kNoun, PosTag::kNoun, PosTag::kNoun, PosTag::kNoun};
  auto s = synthetic(tags);
  auto p = plan(s.sentence, s.encoded, s.vocab, base_policy(0));
  REQUIRE(p);
  CHECK(build_record(s.sentence, s.encoded, *p).keyword_masked);
}

TEST_CASE("laws hold on every plan of the fixture corpus, all policies") {
  const auto& tagger = test_support::fixture_tagger();
  auto vocab = SubwordVocab::load(test_support::vocab_path());
  auto lex = KeywordLexicon::builtin();
  auto docs = DocumentReader(test_support::corpus_path(), InputFormat::kJsonLines).read_all();
  std::size_t plans = 0;
  for (auto kind : {AblationKind::kBase, AblationKind::kBaseNouns, AblationKind::kBaseNounsRandom}) {
    for (std::uint64_t seed : {0ull, 1ull, 77ull}) {
      const auto policy = ablation_policy(kind, seed);
      for (const auto& d : docs) {
        for (auto& s : split_sentences(d)) {
          auto tags = tagger.tag(s.words);
          auto c = curate(s, tags, lex);
          if (!c) continue;
          auto enc = encode(vocab, s.words);
          auto p = plan(*c, enc, vocab, policy);
          INFO(s.text);
          REQUIRE(oracle::plan_violation(tags, enc, vocab, policy, p) == "");
          plans += p.has_value();
        }
      }
    }
  }
  CHECK(plans > 5000);
}

TEST_CASE("BaseNounsRandom selects words uniformly (chi-square, alpha 0.01)") {
  std::vector<PosTag> tags = {PosTag::kDet, PosTag::kNoun, PosTag::kAux, PosTag::kVerb, PosTag::kAdp,
                              PosTag::kDet, PosTag::kNoun, PosTag::kPunct, PosTag::kCconj, PosTag::kPron,
                              PosTag::kVerb, PosTag::kAdv, PosTag::kPunct};
  auto s = synthetic(tags);
  const auto policy_base = ablation_policy(AblationKind::kBaseNounsRandom, 0);
  std::vector<double> counts(tags.size(), 0.0);
  for (std::uint32_t draw = 0; draw < 20000; ++draw) {
    s.sentence.segmented.sent_idx = draw;
    auto p = plan(s.sentence, s.encoded, s.vocab, policy_base);
    REQUIRE(p);
    for (auto w : p->selected_words) counts[w] += 1.0;
  }
  const double pvalue = oracle::chi_square_uniform_p(counts);
  MESSAGE("chi-square p = " << pvalue);
  CHECK(pvalue > 0.01);

  // The same statistic rejects the Base policy, which never picks nouns.
  std::vector<double> base_counts(tags.size(), 0.0);
  for (std::uint32_t draw = 0; draw < 2000; ++draw) {
    s.sentence.segmented.sent_idx = draw;
    auto p = plan(s.sentence, s.encoded, s.vocab, base_policy(0));
    for (auto w : p->selected_words) base_counts[w] += 1.0;
  }
  CHECK(oracle::chi_square_uniform_p(base_counts) < 0.01);
}
