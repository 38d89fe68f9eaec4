#pragma once

// Precomputed score tables: one row per (frame, category) with the positive
// and negative prompt scores. Margins are positive minus negative.
//
//   frame_index,category,positive_score,negative_score
//   0,animal,21.5,20.25

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hazscreen/error.hpp"
#include "hazscreen/io/files.hpp"
#include "hazscreen/io/text.hpp"
#include "hazscreen/signal.hpp"

namespace hazscreen::io {

struct ScoreRow {
  std::size_t frame_index = 0;
  std::string category;
  double positive_score = 0.0;
  double negative_score = 0.0;
};

inline const char* kScoreTableHeader = "frame_index,category,positive_score,negative_score";

inline std::vector<ScoreRow> parse_score_table(const std::string& text, const std::string& source,
                                               std::size_t frame_count) {
  const auto rows = lines(text);
  if (rows.empty() || trim(rows[0]).empty()) throw parse_error(source, 1, "missing header row");
  const char delim = detect_delimiter(rows[0]);
  const auto header = split(rows[0], delim);
  const std::vector<std::string_view> expected{"frame_index", "category", "positive_score", "negative_score"};
  if (header != expected) throw parse_error(source, 1, "header must be frame_index,category,positive_score,negative_score");

  std::vector<ScoreRow> out;
  std::map<std::pair<std::string, std::size_t>, std::size_t> seen;
  for (std::size_t ln = 1; ln < rows.size(); ++ln) {
    if (trim(rows[ln]).empty()) continue;
    const auto f = split(rows[ln], delim);
    if (f.size() != 4) throw parse_error(source, ln + 1, "expected 4 fields, got " + std::to_string(f.size()));
    const auto frame = parse_index(f[0]);
    if (!frame) throw parse_error(source, ln + 1, "frame_index is not a nonnegative integer");
    if (*frame >= frame_count) {
      throw parse_error(source, ln + 1, "frame_index " + std::to_string(*frame) + " outside [0, " +
                                            std::to_string(frame_count) + ")");
    }
    if (f[1].empty()) throw parse_error(source, ln + 1, "empty category");
    const auto pos = parse_double(f[2]);
    const auto neg = parse_double(f[3]);
    if (!pos || !std::isfinite(*pos)) throw parse_error(source, ln + 1, "positive_score is not a finite number");
    if (!neg || !std::isfinite(*neg)) throw parse_error(source, ln + 1, "negative_score is not a finite number");
    const std::string category(f[1]);
    if (auto [it, fresh] = seen.emplace(std::pair{category, *frame}, ln + 1); !fresh) {
      throw parse_error(source, ln + 1, "duplicate row for frame " + std::to_string(*frame) + ", category '" +
                                            category + "' (first at line " + std::to_string(it->second) + ")");
    }
    out.push_back({*frame, category, *pos, *neg});
  }
  return out;
}

/// Margin series per category. Every category present must cover every frame.
inline std::map<std::string, MarginSeries> score_table_margins(const std::vector<ScoreRow>& rows,
                                                               const std::string& video_id, std::size_t frame_count,
                                                               const std::string& source) {
  std::map<std::string, std::vector<std::optional<double>>> by_category;
  for (const auto& r : rows) {
    auto& v = by_category.try_emplace(r.category, frame_count).first->second;
    v[r.frame_index] = margin(r.positive_score, r.negative_score);
  }
  std::map<std::string, MarginSeries> out;
  for (auto& [category, values] : by_category) {
    std::vector<double> margins;
    margins.reserve(frame_count);
    for (std::size_t f = 0; f < frame_count; ++f) {
      if (!values[f]) {
        throw Error(ErrorCode::ValidationError, source + ": category '" + category + "' has no row for frame " +
                                                    std::to_string(f));
      }
      margins.push_back(*values[f]);
    }
    out.emplace(category, MarginSeries(video_id, category, std::move(margins)));
  }
  return out;
}

inline std::string format_score_table(const std::vector<ScoreRow>& rows) {
  std::string out = std::string(kScoreTableHeader) + "\n";
  for (const auto& r : rows) {
    out += std::to_string(r.frame_index) + "," + r.category + "," + format_number(r.positive_score) + "," +
           format_number(r.negative_score) + "\n";
  }
  return out;
}

inline std::vector<ScoreRow> read_score_table(const std::filesystem::path& path, std::size_t frame_count) {
  return parse_score_table(read_text(path), path.string(), frame_count);
}

inline void write_score_table(const std::filesystem::path& path, const std::vector<ScoreRow>& rows) {
  write_atomic(path, format_score_table(rows));
}

}  // namespace hazscreen::io
