#pragma once

#include <cstdint>
#include <map>
#include <string>

#include <json.hpp>

namespace logiprep {

struct DropCounts {
  std::uint64_t length = 0;        // < 5 or > 128 words
  std::uint64_t no_keyword = 0;    // failed the implication filter
  std::uint64_t category = 0;      // removed by the polarity category filter
  std::uint64_t no_candidate = 0;  // no maskable word under the policy
  std::uint64_t over_length = 0;   // > 128 subwords after encoding

  std::uint64_t total() const { return length + no_keyword + category + no_candidate + over_length; }
  friend bool operator==(const DropCounts&, const DropCounts&) = default;
};

// Corpus-run statistics. Reports from independent workers combine with
// merge(); the zero report (default-constructed) is the identity.
struct RunReport {
  std::string config_digest;  // empty only for the zero report
  std::uint64_t sentences_seen = 0;
  std::uint64_t sentences_kept = 0;
  DropCounts dropped;
  std::uint64_t kept_positive = 0;
  std::uint64_t kept_negative = 0;
  std::uint64_t kept_mixed_polarity = 0;
  std::uint64_t keyword_masked = 0;  // kept records whose plan hit a keyword word
  std::uint64_t words_selected = 0;
  std::map<std::string, std::uint64_t> keyword_frequency;  // every match in kept sentences
  std::map<std::string, std::uint64_t> candidate_tag_frequency;
  bool deduplicated = false;

  double keyword_masked_fraction() const;
  double positive_ratio() const;
  double negative_ratio() const;

  // Throws Error(kInvariant) if the bookkeeping identities do not hold.
  void check() const;

  friend bool operator==(const RunReport&, const RunReport&) = default;
};

// Componentwise sum; throws Error(kConfig) if both reports carry different
// non-empty config digests.
RunReport merge(const RunReport& a, const RunReport& b);

enum class ReportFormat { kText, kJson, kCsv };

std::string render(const RunReport& report, ReportFormat format);

nlohmann::json report_to_json(const RunReport& report);
RunReport report_from_json(const nlohmann::json& j);

}  // namespace logiprep
