#pragma once

// Calibration profile (JSON). Numbers are written in their shortest
// round-trip decimal form, so thresholds survive a save/load bit for bit.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hazscreen/calibration.hpp"
#include "hazscreen/error.hpp"
#include "hazscreen/io/files.hpp"
#include "hazscreen/io/json_util.hpp"
#include "hazscreen/io/prompts.hpp"

namespace hazscreen::io {

inline constexpr int kProfileSchemaVersion = 1;

inline Json report_json(const TiouReport& r) {
  Json per_video = Json::array();
  for (const auto& c : r.per_video) {
    per_video.push_back({{"video_id", c.video_id},
                         {"positive", c.positive ? Json(*c.positive) : Json(nullptr)},
                         {"negative", c.negative}});
  }
  return {{"global_tiou", r.global_tiou},
          {"positive_tiou", r.positive_tiou},
          {"negative_tiou", r.negative_tiou},
          {"per_video", per_video}};
}

inline TiouReport report_from_json(const Json& j, const std::string& where) {
  TiouReport r;
  r.global_tiou = get_as<double>(member(j, "global_tiou", where), where + ".global_tiou");
  r.positive_tiou = get_as<double>(member(j, "positive_tiou", where), where + ".positive_tiou");
  r.negative_tiou = get_as<double>(member(j, "negative_tiou", where), where + ".negative_tiou");
  const Json& pv = member(j, "per_video", where);
  if (!pv.is_array()) throw Error(ErrorCode::ParseError, where + ".per_video: expected an array");
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const std::string w = where + ".per_video[" + std::to_string(i) + "]";
    VideoContribution c;
    c.video_id = get_as<std::string>(member(pv[i], "video_id", w), w + ".video_id");
    const Json& pos = member(pv[i], "positive", w);
    if (!pos.is_null()) c.positive = get_as<double>(pos, w + ".positive");
    c.negative = get_as<double>(member(pv[i], "negative", w), w + ".negative");
    r.per_video.push_back(std::move(c));
  }
  return r;
}

inline std::string format_profile(const CalibrationProfile& p) {
  Json doc;
  doc["schema_version"] = kProfileSchemaVersion;
  doc["created_at"] = p.created_at;
  doc["prompt_set_digest"] = p.prompt_set_digest;
  doc["corpus_digest"] = p.corpus_digest;
  doc["step"] = p.step;
  Json entries = Json::array();
  for (const auto& [category, e] : p.entries) {
    entries.push_back({{"category", category}, {"threshold", e.threshold}, {"report", report_json(e.report)}});
  }
  doc["entries"] = entries;
  return dump(doc);
}

inline CalibrationProfile parse_profile(const std::string& text, const std::string& source) {
  const Json doc = parse_json(text, source);
  check_schema_version(doc, kProfileSchemaVersion, source);
  CalibrationProfile p;
  p.created_at = get_as<std::string>(member(doc, "created_at", source), source + ".created_at");
  p.prompt_set_digest = get_as<std::string>(member(doc, "prompt_set_digest", source), source + ".prompt_set_digest");
  p.corpus_digest = get_as<std::string>(member(doc, "corpus_digest", source), source + ".corpus_digest");
  p.step = get_as<double>(member(doc, "step", source), source + ".step");
  const Json& entries = member(doc, "entries", source);
  if (!entries.is_array()) throw Error(ErrorCode::ParseError, source + ".entries: expected an array");
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const std::string where = source + ".entries[" + std::to_string(i) + "]";
    const auto category = get_as<std::string>(member(entries[i], "category", where), where + ".category");
    ProfileEntry e;
    e.threshold = get_as<double>(member(entries[i], "threshold", where), where + ".threshold");
    if (!std::isfinite(e.threshold)) throw Error(ErrorCode::ParseError, where + ".threshold: not finite");
    if (auto it = entries[i].find("report"); it != entries[i].end()) e.report = report_from_json(*it, where + ".report");
    if (!p.entries.emplace(category, std::move(e)).second) {
      throw Error(ErrorCode::ValidationError, where + ": duplicate category '" + category + "'");
    }
  }
  return p;
}

inline CalibrationProfile load_profile(const std::filesystem::path& path) {
  return parse_profile(read_text(path), path.string());
}

inline void save_profile(const CalibrationProfile& p, const std::filesystem::path& path) {
  write_atomic(path, format_profile(p));
}

/// Categories of the prompt set that the profile does not cover.
inline std::vector<std::string> missing_entries(const CalibrationProfile& p, const PromptSet& prompts) {
  std::vector<std::string> out;
  for (const auto& c : prompts.categories()) {
    if (!p.entries.count(c)) out.push_back(c);
  }
  return out;
}

inline void validate_profile(const CalibrationProfile& p, const PromptSet& prompts) {
  const auto missing = missing_entries(p, prompts);
  if (missing.empty()) return;
  std::string names;
  for (const auto& m : missing) names += (names.empty() ? "" : ", ") + m;
  throw Error(ErrorCode::ValidationError, "profile has no entry for categories: " + names);
}

}  // namespace hazscreen::io
