#pragma once

// Per-video ground truth, one JSON object per file. Frame indices are 0-based
// and intervals inclusive:
//
//   {"video_id": "v001", "is_hazard": true, "category": "animal",
//    "visible": [10, 50], "active": [30, 50]}

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>

#include "hazscreen/error.hpp"
#include "hazscreen/io/files.hpp"
#include "hazscreen/io/json_util.hpp"
#include "hazscreen/temporal_metrics.hpp"

namespace hazscreen::io {

namespace detail {

inline std::optional<Interval> interval_field(const Json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  const std::string w = where + "." + key;
  if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number_unsigned() || !(*it)[1].is_number_unsigned()) {
    throw Error(ErrorCode::ParseError, w + ": expected [start, end] with nonnegative integers");
  }
  return Interval{(*it)[0].get<std::size_t>(), (*it)[1].get<std::size_t>()};
}

}  // namespace detail

inline HazardAnnotation parse_annotation(const std::string& text, const std::string& source, std::size_t frame_count) {
  const Json doc = parse_json(text, source);
  HazardAnnotation a;
  a.frame_count = frame_count;
  a.video_id = get_as<std::string>(member(doc, "video_id", source), source + ".video_id");
  a.is_hazard_video = get_as<bool>(member(doc, "is_hazard", source), source + ".is_hazard");
  if (auto it = doc.find("category"); it != doc.end() && !it->is_null()) {
    a.category = get_as<std::string>(*it, source + ".category");
  }
  a.visible_interval = detail::interval_field(doc, "visible", source);
  a.active_interval = detail::interval_field(doc, "active", source);
  try {
    validate(a);
  } catch (const Error& e) {
    throw Error(e.code(), source + ": " + e.what());
  }
  return a;
}

inline HazardAnnotation load_annotations(const std::filesystem::path& path, std::size_t frame_count) {
  return parse_annotation(read_text(path), path.string(), frame_count);
}

inline std::string format_annotation(const HazardAnnotation& a) {
  Json doc;
  doc["video_id"] = a.video_id;
  doc["is_hazard"] = a.is_hazard_video;
  doc["category"] = a.category ? Json(*a.category) : Json(nullptr);
  doc["visible"] = a.visible_interval ? Json::array({a.visible_interval->start, a.visible_interval->end}) : Json(nullptr);
  doc["active"] = a.active_interval ? Json::array({a.active_interval->start, a.active_interval->end}) : Json(nullptr);
  return dump(doc);
}

inline void save_annotation(const std::filesystem::path& path, const HazardAnnotation& a) {
  write_atomic(path, format_annotation(a));
}

}  // namespace hazscreen::io
