#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>

#include "logiprep/tagger.hpp"

namespace test_support {

namespace fs = std::filesystem;

inline fs::path data_dir() { return fs::path(LOGIPREP_DATA_DIR); }
inline fs::path corpus_path() { return data_dir() / "corpus.jsonl"; }
inline fs::path vocab_path() { return data_dir() / "vocab.txt"; }
inline fs::path treebank_train() { return data_dir() / "treebank-train.conllu"; }
inline fs::path treebank_dev() { return data_dir() / "treebank-dev.conllu"; }

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("logiprep-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Tagger trained on the fixture treebank; trained once per process.
inline const logiprep::TaggerModel& fixture_tagger() {
  static const logiprep::TaggerModel model = logiprep::train_tagger(treebank_train(), 5, 0);
  return model;
}

// The fixture tagger saved to a per-process file.
inline fs::path fixture_tagger_path() {
  static const fs::path p = [] {
    auto path = fs::temp_directory_path() / ("logiprep-tagger-" + std::to_string(::getpid()) + ".bin");
    fixture_tagger().save(path);
    return path;
  }();
  return p;
}

}  // namespace test_support
