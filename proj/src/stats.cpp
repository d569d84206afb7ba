#include "logiprep/stats.hpp"

#include <cstdio>
#include <sstream>

#include "logiprep/error.hpp"

namespace logiprep {

namespace {

double ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

void add_into(std::map<std::string, std::uint64_t>& dst, const std::map<std::string, std::uint64_t>& src) {
  for (const auto& [k, v] : src) dst[k] += v;
}

}  // namespace

double RunReport::keyword_masked_fraction() const { return ratio(keyword_masked, sentences_kept); }
double RunReport::positive_ratio() const { return ratio(kept_positive, sentences_kept); }
double RunReport::negative_ratio() const { return ratio(kept_negative, sentences_kept); }

void RunReport::check() const {
  if (sentences_kept + dropped.total() != sentences_seen) {
    throw Error(ErrorKind::kInvariant, "report: kept + dropped != seen");
  }
  if (kept_positive + kept_negative != sentences_kept) {
    throw Error(ErrorKind::kInvariant, "report: per-polarity counts do not sum to kept");
  }
  if (keyword_masked > sentences_kept) throw Error(ErrorKind::kInvariant, "report: keyword_masked > kept");
}

RunReport merge(const RunReport& a, const RunReport& b) {
  if (!a.config_digest.empty() && !b.config_digest.empty() && a.config_digest != b.config_digest) {
    throw Error(ErrorKind::kConfig, "cannot merge reports from different run configs");
  }
  RunReport r;
  r.config_digest = a.config_digest.empty() ? b.config_digest : a.config_digest;
  r.sentences_seen = a.sentences_seen + b.sentences_seen;
  r.sentences_kept = a.sentences_kept + b.sentences_kept;
  r.dropped.length = a.dropped.length + b.dropped.length;
  r.dropped.no_keyword = a.dropped.no_keyword + b.dropped.no_keyword;
  r.dropped.category = a.dropped.category + b.dropped.category;
  r.dropped.no_candidate = a.dropped.no_candidate + b.dropped.no_candidate;
  r.dropped.over_length = a.dropped.over_length + b.dropped.over_length;
  r.kept_positive = a.kept_positive + b.kept_positive;
  r.kept_negative = a.kept_negative + b.kept_negative;
  r.kept_mixed_polarity = a.kept_mixed_polarity + b.kept_mixed_polarity;
  r.keyword_masked = a.keyword_masked + b.keyword_masked;
  r.words_selected = a.words_selected + b.words_selected;
  r.keyword_frequency = a.keyword_frequency;
  add_into(r.keyword_frequency, b.keyword_frequency);
  r.candidate_tag_frequency = a.candidate_tag_frequency;
  add_into(r.candidate_tag_frequency, b.candidate_tag_frequency);
  r.deduplicated = a.deduplicated || b.deduplicated;
  return r;
}

nlohmann::json report_to_json(const RunReport& r) {
  nlohmann::json j;
  j["config_digest"] = r.config_digest;
  j["sentences_seen"] = r.sentences_seen;
  j["sentences_kept"] = r.sentences_kept;
  j["dropped_by_reason"] = {{"length", r.dropped.length},
                            {"no_keyword", r.dropped.no_keyword},
                            {"category", r.dropped.category},
                            {"no_candidate", r.dropped.no_candidate},
                            {"over_length", r.dropped.over_length}};
  j["kept_positive"] = r.kept_positive;
  j["kept_negative"] = r.kept_negative;
  j["kept_mixed_polarity"] = r.kept_mixed_polarity;
  j["keyword_masked"] = r.keyword_masked;
  j["words_selected"] = r.words_selected;
  j["keyword_frequency"] = r.keyword_frequency;
  j["candidate_tag_frequency"] = r.candidate_tag_frequency;
  j["deduplicated"] = r.deduplicated;
  // Derived values, informational only.
  j["keyword_masked_fraction"] = fixed4(r.keyword_masked_fraction());
  j["positive_ratio"] = fixed4(r.positive_ratio());
  j["negative_ratio"] = fixed4(r.negative_ratio());
  return j;
}

RunReport report_from_json(const nlohmann::json& j) {
  RunReport r;
  try {
    r.config_digest = j.at("config_digest").get<std::string>();
    r.sentences_seen = j.at("sentences_seen").get<std::uint64_t>();
    r.sentences_kept = j.at("sentences_kept").get<std::uint64_t>();
    const auto& d = j.at("dropped_by_reason");
    r.dropped.length = d.at("length").get<std::uint64_t>();
    r.dropped.no_keyword = d.at("no_keyword").get<std::uint64_t>();
    r.dropped.category = d.at("category").get<std::uint64_t>();
    r.dropped.no_candidate = d.at("no_candidate").get<std::uint64_t>();
    r.dropped.over_length = d.at("over_length").get<std::uint64_t>();
    r.kept_positive = j.at("kept_positive").get<std::uint64_t>();
    r.kept_negative = j.at("kept_negative").get<std::uint64_t>();
    r.kept_mixed_polarity = j.at("kept_mixed_polarity").get<std::uint64_t>();
    r.keyword_masked = j.at("keyword_masked").get<std::uint64_t>();
    r.words_selected = j.at("words_selected").get<std::uint64_t>();
    r.keyword_frequency = j.at("keyword_frequency").get<std::map<std::string, std::uint64_t>>();
    r.candidate_tag_frequency = j.at("candidate_tag_frequency").get<std::map<std::string, std::uint64_t>>();
    r.deduplicated = j.at("deduplicated").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kInput, std::string("malformed report: ") + e.what());
  }
  return r;
}

std::string render(const RunReport& r, ReportFormat format) {
  if (format == ReportFormat::kJson) return report_to_json(r).dump(2) + "\n";
  std::ostringstream out;
  if (format == ReportFormat::kCsv) {
    out << "section,key,value\n";
    out << "count,sentences_seen," << r.sentences_seen << "\n";
    out << "count,sentences_kept," << r.sentences_kept << "\n";
    out << "count,kept_positive," << r.kept_positive << "\n";
    out << "count,kept_negative," << r.kept_negative << "\n";
    out << "dropped,length," << r.dropped.length << "\n";
    out << "dropped,no_keyword," << r.dropped.no_keyword << "\n";
    out << "dropped,category," << r.dropped.category << "\n";
    out << "dropped,no_candidate," << r.dropped.no_candidate << "\n";
    out << "dropped,over_length," << r.dropped.over_length << "\n";
    for (const auto& [k, v] : r.keyword_frequency) out << "keyword," << k << "," << v << "\n";
    for (const auto& [k, v] : r.candidate_tag_frequency) out << "candidate_tag," << k << "," << v << "\n";
    return out.str();
  }
  auto row = [&](const std::string& k, const std::string& v) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "  %-28s %14s\n", k.c_str(), v.c_str());
    out << buf;
  };
  out << "run report\n";
  row("sentences_seen", std::to_string(r.sentences_seen));
  row("sentences_kept", std::to_string(r.sentences_kept));
  row("dropped.length", std::to_string(r.dropped.length));
  row("dropped.no_keyword", std::to_string(r.dropped.no_keyword));
  row("dropped.category", std::to_string(r.dropped.category));
  row("dropped.no_candidate", std::to_string(r.dropped.no_candidate));
  row("dropped.over_length", std::to_string(r.dropped.over_length));
  row("kept_positive", std::to_string(r.kept_positive));
  row("kept_negative", std::to_string(r.kept_negative));
  row("kept_mixed_polarity", std::to_string(r.kept_mixed_polarity));
  row("positive_ratio", fixed4(r.positive_ratio()));
  row("negative_ratio", fixed4(r.negative_ratio()));
  row("keyword_masked_fraction", fixed4(r.keyword_masked_fraction()));
  row("words_selected", std::to_string(r.words_selected));
  row("deduplicated", r.deduplicated ? "yes" : "no");
  out << "keyword frequency\n";
  for (const auto& [k, v] : r.keyword_frequency) row(k, std::to_string(v));
  out << "candidate tag frequency\n";
  for (const auto& [k, v] : r.candidate_tag_frequency) row(k, std::to_string(v));
  return out.str();
}

}  // namespace logiprep
