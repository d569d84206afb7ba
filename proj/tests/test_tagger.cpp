#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "logiprep/error.hpp"
#include "logiprep/tagger.hpp"
#include "support.hpp"

using namespace logiprep;
using test_support::TempDir;

namespace {

const char* kToyTreebank =
    "# sent_id = 1\n"
    "1\tThe\tthe\tDET\t_\t_\t2\tdet\t_\t_\n"
    "2\tcat\tcat\tNOUN\t_\t_\t3\tnsubj\t_\t_\n"
    "3\tsleeps\tsleep\tVERB\t_\t_\t0\troot\t_\t_\n"
    "4\t.\t.\tPUNCT\t_\t_\t3\tpunct\t_\t_\n"
    "\n"
    "1-2\tdon't\t_\t_\t_\t_\t_\t_\t_\t_\n"
    "1\tdo\tdo\tAUX\t_\t_\t3\taux\t_\t_\n"
    "2\tn't\tnot\tPART\t_\t_\t3\tadvmod\t_\t_\n"
    "3\trun\trun\tVERB\t_\t_\t0\troot\t_\t_\n"
    "3.1\tquickly\t_\t_\t_\t_\t_\t_\t_\t_\n"
    "4\tquickly\tquickly\tADV\t_\t_\t3\tadvmod\t_\t_\n"
    "\n"
    "1\tBut\tbut\tCONJ\t_\t_\t3\tcc\t_\t_\n"
    "2\tdogs\tdog\tNOUN\t_\t_\t3\tnsubj\t_\t_\n"
    "3\tbark\tbark\tVERB\t_\t_\t0\troot\t_\t_\n"
    "4\t12\t12\tNUM\t_\t_\t3\tobj\t_\t_\n"
    "5\tloudly\tloudly\tADV\t_\t_\t3\tadvmod\t_\t_\n"
    "6\t!\t!\tPUNCT\t_\t_\t3\tpunct\t_\t_\n";

std::vector<TaggedSentence> toy() {
  std::istringstream in(kToyTreebank);
  return read_conllu(in, "toy.conllu");
}

std::vector<std::string> words(std::initializer_list<const char*> ws) { return {ws.begin(), ws.end()}; }

}  // namespace

TEST_CASE("CoNLL-U reading skips ranges and empty nodes, normalizes CONJ") {
  auto data = toy();
  REQUIRE(data.size() == 3);
  CHECK(data[1].words == words({"do", "n't", "run", "quickly"}));
  CHECK(data[2].tags[0] == PosTag::kCconj);
}

TEST_CASE("CoNLL-U errors carry the line number") {
  auto fails_with = [](const std::string& text, const std::string& needle) {
    std::istringstream in(text);
    try {
      read_conllu(in, "bad.conllu");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kInput);
      INFO(e.what());
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
      return;
    }
    FAIL("expected an error");
  };
  fails_with("1\ta\ta\tDET\t_\t_\t0\troot\t_\t_\n2\tb\tb\n", "bad.conllu:2");
  fails_with("1\ta\ta\tDETX\t_\t_\t0\troot\t_\t_\n", "bad.conllu:1");
  fails_with("\n\nx\ta\ta\tDET\t_\t_\t0\troot\t_\t_\n", "bad.conllu:3");
}

TEST_CASE("toy treebank is learned perfectly in 5 epochs") {
  auto data = toy();
  auto model = train_tagger(data, 5, 1, "toy");
  CHECK(evaluate_tagger(model, data) == doctest::Approx(1.0));
  CHECK(model.metadata().epochs == 5);
  CHECK(model.metadata().corpus == "toy");
}

TEST_CASE("zero epochs is rejected") {
  auto data = toy();
  CHECK_THROWS_AS(train_tagger(data, 0, 1), Error);
  try {
    train_tagger(data, 0, 1);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kConfig);
  }
  CHECK_THROWS_AS(train_tagger(std::vector<TaggedSentence>{}, 3, 1), Error);
}

TEST_CASE("tagging shape, tag set membership and determinism") {
  const auto& model = test_support::fixture_tagger();
  const std::vector<std::vector<std::string>> probes = {
      words({"the"}), words({","}), words({"Zyxwv", "glorped", "7", "!"}),
      words({"It", "froze", ",", "hence", "lakes", "were", "more", "reflective", "."})};
  for (const auto& p : probes) {
    auto tags = model.tag(p);
    CHECK(tags.size() == p.size());
    for (auto t : tags) {
      CHECK(std::find(model.tag_set().begin(), model.tag_set().end(), t) != model.tag_set().end());
    }
    CHECK(model.tag(p) == tags);
  }
  CHECK(model.tag(words({"the"})) == std::vector<PosTag>{PosTag::kDet});
  CHECK(model.tag(words({","})) == std::vector<PosTag>{PosTag::kPunct});
  CHECK(model.tag(std::vector<std::string>{}).empty());
  CHECK(std::is_sorted(model.tag_set().begin(), model.tag_set().end(),
                       [](PosTag a, PosTag b) { return pos_tag_name(a) < pos_tag_name(b); }));
}

TEST_CASE("training is reproducible and seed-dependent in order only") {
  auto data = read_conllu_file(test_support::treebank_train());
  data.resize(300);
  auto a = train_tagger(data, 3, 42);
  auto b = train_tagger(data, 3, 42);
  CHECK(a.serialize() == b.serialize());
  auto dev = read_conllu_file(test_support::treebank_dev());
  for (const auto& s : dev) CHECK(a.tag(s.words) == b.tag(s.words));
}

TEST_CASE("fixture treebank dev accuracy (synthetic stand-in for a UD dev split)") {
  const auto& model = test_support::fixture_tagger();
  auto dev = read_conllu_file(test_support::treebank_dev());
  const double acc = evaluate_tagger(model, dev);
  MESSAGE("fixture dev accuracy " << acc);
  CHECK(acc >= 0.90);
}

TEST_CASE("save / load round trip") {
  TempDir dir;
  const auto& model = test_support::fixture_tagger();
  TaggerModel m = model;
  m.metadata().heldout_accuracy = 0.5;
  m.save(dir / "m.bin");
  auto loaded = TaggerModel::load(dir / "m.bin");
  CHECK(loaded.tag(words({"the", "cat"})) == m.tag(words({"the", "cat"})));
  CHECK(loaded.serialize() == m.serialize());
  CHECK(loaded.metadata().heldout_accuracy == 0.5);
  auto dev = read_conllu_file(test_support::treebank_dev());
  for (const auto& s : dev) REQUIRE(loaded.tag(s.words) == m.tag(s.words));
}

TEST_CASE("load errors") {
  TempDir dir;
  auto fails_with = [&](const std::string& bytes, const std::string& needle) {
    test_support::write_file(dir / "x.bin", bytes);
    try {
      TaggerModel::load(dir / "x.bin");
    } catch (const Error& e) {
      INFO(e.what());
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
      return;
    }
    FAIL("expected an error");
  };
  const std::string good = test_support::fixture_tagger().serialize();
  fails_with("", "empty");
  std::string flipped = good;
  flipped[0] = 'X';
  fails_with(flipped, "expected magic \"LPTG\"");
  std::string version = good;
  version[4] = 9;
  fails_with(version, "version");
  fails_with(good.substr(0, good.size() / 2), "truncated");
  fails_with(good + "x", "trailing");
  CHECK_THROWS_AS(TaggerModel::load(dir / "missing.bin"), Error);
}
