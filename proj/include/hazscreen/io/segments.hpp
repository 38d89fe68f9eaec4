#pragma once

// Alert segment file:
//
//   video_id,start_frame,end_frame,policy
//   v003,12,40,dual

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include "hazscreen/error.hpp"
#include "hazscreen/fusion.hpp"
#include "hazscreen/io/files.hpp"
#include "hazscreen/io/text.hpp"

namespace hazscreen::io {

inline std::string format_segments(std::vector<AlertSegment> segments) {
  std::sort(segments.begin(), segments.end(), [](const auto& a, const auto& b) {
    return a.video_id != b.video_id ? a.video_id < b.video_id : a.start_frame < b.start_frame;
  });
  std::string out = "video_id,start_frame,end_frame,policy\n";
  for (const auto& s : segments) {
    out += s.video_id + "," + std::to_string(s.start_frame) + "," + std::to_string(s.end_frame) + "," +
           std::string(to_string(s.policy)) + "\n";
  }
  return out;
}

inline std::vector<AlertSegment> parse_segments(const std::string& text, const std::string& source) {
  const auto rows = lines(text);
  if (rows.empty()) throw parse_error(source, 1, "missing header row");
  const char delim = detect_delimiter(rows[0]);
  const std::vector<std::string_view> expected{"video_id", "start_frame", "end_frame", "policy"};
  if (split(rows[0], delim) != expected) throw parse_error(source, 1, "header must be video_id,start_frame,end_frame,policy");
  std::vector<AlertSegment> out;
  for (std::size_t ln = 1; ln < rows.size(); ++ln) {
    if (trim(rows[ln]).empty()) continue;
    const auto f = split(rows[ln], delim);
    if (f.size() != 4) throw parse_error(source, ln + 1, "expected 4 fields");
    const auto start = parse_index(f[1]);
    const auto end = parse_index(f[2]);
    const auto policy = parse_policy(f[3]);
    if (f[0].empty()) throw parse_error(source, ln + 1, "empty video_id");
    if (!start || !end) throw parse_error(source, ln + 1, "frame bounds must be nonnegative integers");
    if (*start > *end) throw parse_error(source, ln + 1, "start_frame after end_frame");
    if (!policy) throw parse_error(source, ln + 1, "unknown policy '" + std::string(f[3]) + "'");
    out.push_back({std::string(f[0]), *start, *end, *policy});
  }
  return out;
}

inline std::vector<AlertSegment> read_segments(const std::filesystem::path& path) {
  return parse_segments(read_text(path), path.string());
}

inline void write_segments(const std::filesystem::path& path, const std::vector<AlertSegment>& segments) {
  write_atomic(path, format_segments(segments));
}

}  // namespace hazscreen::io
