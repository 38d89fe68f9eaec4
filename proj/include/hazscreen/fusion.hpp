#pragma once

// Thresholding of margin signals and composition of per-category detectors
// into one hazard mask.

#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hazscreen/error.hpp"
#include "hazscreen/signal.hpp"
#include "hazscreen/temporal_metrics.hpp"

namespace hazscreen {

/// A frame fires iff its margin strictly exceeds the threshold.
inline FrameMask threshold_mask(const MarginSeries& series, double threshold) {
  if (!std::isfinite(threshold)) throw Error(ErrorCode::NonFiniteValue, "threshold must be finite");
  FrameMask mask{series.video_id(), std::vector<bool>(series.frame_count(), false)};
  for (std::size_t i = 0; i < series.frame_count(); ++i) mask.flags[i] = series[i] > threshold;
  return mask;
}

struct DetectorChannel {
  MarginSeries series;
  double threshold = 0.0;
};

struct DetectorBank {
  std::string video_id;
  std::map<std::string, DetectorChannel> category_channels;
  std::optional<DetectorChannel> general_channel;
};

enum class FusionPolicy {
  CategoriesOnly,         // any category fires
  CategoriesPlusGeneral,  // any category or the general channel fires
  HazardGated,            // general channel and at least one category fire on the same frame
};

constexpr std::string_view to_string(FusionPolicy p) noexcept {
  switch (p) {
    case FusionPolicy::CategoriesOnly: return "categories";
    case FusionPolicy::CategoriesPlusGeneral: return "with-general";
    case FusionPolicy::HazardGated: return "dual";
  }
  return "?";
}

inline std::optional<FusionPolicy> parse_policy(std::string_view name) {
  if (name == "categories") return FusionPolicy::CategoriesOnly;
  if (name == "with-general") return FusionPolicy::CategoriesPlusGeneral;
  if (name == "dual") return FusionPolicy::HazardGated;
  return std::nullopt;
}

constexpr bool requires_general(FusionPolicy p) noexcept { return p != FusionPolicy::CategoriesOnly; }

inline FrameMask fuse(const DetectorBank& bank, FusionPolicy policy) {
  if (requires_general(policy) && !bank.general_channel) {
    throw Error(ErrorCode::MissingGeneralChannel,
                "policy '" + std::string(to_string(policy)) + "' needs a general hazard channel (video '" +
                    bank.video_id + "')");
  }

  std::optional<std::size_t> frames;
  auto check_frames = [&](const DetectorChannel& ch) {
    if (!frames) frames = ch.series.frame_count();
    if (*frames != ch.series.frame_count()) {
      throw Error(ErrorCode::FrameCountMismatch, "channels of video '" + bank.video_id + "' differ in frame count");
    }
  };
  for (const auto& [_, ch] : bank.category_channels) check_frames(ch);
  if (bank.general_channel) check_frames(*bank.general_channel);
  if (!frames) throw Error(ErrorCode::ValidationError, "detector bank for video '" + bank.video_id + "' is empty");

  std::vector<bool> any_category(*frames, false);
  for (const auto& [_, ch] : bank.category_channels) {
    const FrameMask m = threshold_mask(ch.series, ch.threshold);
    for (std::size_t i = 0; i < *frames; ++i) any_category[i] = any_category[i] || m.flags[i];
  }

  FrameMask out{bank.video_id, std::move(any_category)};
  if (policy == FusionPolicy::CategoriesOnly) return out;

  const FrameMask general = threshold_mask(bank.general_channel->series, bank.general_channel->threshold);
  for (std::size_t i = 0; i < *frames; ++i) {
    out.flags[i] = policy == FusionPolicy::HazardGated ? (general.flags[i] && out.flags[i])
                                                       : (general.flags[i] || out.flags[i]);
  }
  return out;
}

struct AlertSegment {
  std::string video_id;
  std::size_t start_frame = 0;
  std::size_t end_frame = 0;  // inclusive
  FusionPolicy policy = FusionPolicy::CategoriesOnly;

  std::size_t length() const noexcept { return end_frame - start_frame + 1; }
  friend bool operator==(const AlertSegment&, const AlertSegment&) = default;
};

/// Maximal runs of firing frames, in ascending order.
inline std::vector<AlertSegment> extract_segments(const FrameMask& mask, FusionPolicy policy) {
  std::vector<AlertSegment> out;
  const auto& f = mask.flags;
  std::size_t i = 0;
  while (i < f.size()) {
    if (!f[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < f.size() && f[j + 1]) ++j;
    out.push_back({mask.video_id, i, j, policy});
    i = j + 1;
  }
  return out;
}

/// Drops segments shorter than `min_frames`; 1 keeps everything.
inline std::vector<AlertSegment> drop_short_segments(std::vector<AlertSegment> segments, std::size_t min_frames) {
  std::erase_if(segments, [&](const AlertSegment& s) { return s.length() < min_frames; });
  return segments;
}

inline FrameMask rasterize(const std::vector<AlertSegment>& segments, const std::string& video_id,
                           std::size_t frame_count) {
  FrameMask mask{video_id, std::vector<bool>(frame_count, false)};
  for (const auto& s : segments) {
    if (s.video_id != video_id) continue;
    if (s.start_frame > s.end_frame || s.end_frame >= frame_count) {
      throw Error(ErrorCode::IntervalOutOfRange, "segment [" + std::to_string(s.start_frame) + ", " +
                                                     std::to_string(s.end_frame) + "] outside video '" + video_id +
                                                     "' of " + std::to_string(frame_count) + " frames");
    }
    for (std::size_t f = s.start_frame; f <= s.end_frame; ++f) mask.flags[f] = true;
  }
  return mask;
}

}  // namespace hazscreen
