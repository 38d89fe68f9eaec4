#pragma once

// Frame-level temporal IoU, the combined Global tIoU score, and video-level
// alerting rates. Per-video values are averaged uniformly across videos in
// ascending video_id order.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "hazscreen/error.hpp"

namespace hazscreen {

/// Inclusive frame range [start, end].
struct Interval {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const noexcept { return end - start + 1; }
  bool contains(std::size_t frame) const noexcept { return frame >= start && frame <= end; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

struct FrameMask {
  std::string video_id;
  std::vector<bool> flags;

  std::size_t frame_count() const noexcept { return flags.size(); }
  std::size_t count() const noexcept { return static_cast<std::size_t>(std::count(flags.begin(), flags.end(), true)); }
  bool any() const noexcept { return std::find(flags.begin(), flags.end(), true) != flags.end(); }
  friend bool operator==(const FrameMask&, const FrameMask&) = default;
};

using MaskSet = std::map<std::string, FrameMask>;

struct HazardAnnotation {
  std::string video_id;
  std::size_t frame_count = 0;
  bool is_hazard_video = false;
  std::optional<std::string> category;
  std::optional<Interval> visible_interval;
  std::optional<Interval> active_interval;

  /// Ground-truth positive frames: the active interval (empty for non-hazard videos).
  std::vector<bool> positive_frames() const {
    std::vector<bool> out(frame_count, false);
    if (is_hazard_video && active_interval) {
      for (std::size_t f = active_interval->start; f <= active_interval->end && f < frame_count; ++f) out[f] = true;
    }
    return out;
  }

  std::size_t positive_count() const noexcept {
    return is_hazard_video && active_interval ? active_interval->length() : 0;
  }

  friend bool operator==(const HazardAnnotation&, const HazardAnnotation&) = default;
};

/// Checks interval bounds and ordering; throws the matching typed error.
inline void validate(const HazardAnnotation& a) {
  auto check = [&](const Interval& iv, const char* name) {
    if (iv.start > iv.end || iv.end >= a.frame_count) {
      throw Error(ErrorCode::IntervalOutOfRange,
                  "video '" + a.video_id + "': " + name + " interval [" + std::to_string(iv.start) + ", " +
                      std::to_string(iv.end) + "] outside [0, " + std::to_string(a.frame_count) + ")");
    }
  };
  if (a.frame_count == 0) throw Error(ErrorCode::ValidationError, "video '" + a.video_id + "' has zero frames");
  if (a.visible_interval) check(*a.visible_interval, "visible");
  if (a.active_interval) check(*a.active_interval, "active");
  if (a.is_hazard_video && !a.active_interval) {
    throw Error(ErrorCode::MissingActiveInterval, "hazard video '" + a.video_id + "' has no active interval");
  }
  if (a.visible_interval && a.active_interval && a.visible_interval->start > a.active_interval->start) {
    throw Error(ErrorCode::OrderViolation, "video '" + a.video_id + "': visible interval starts after active interval");
  }
}

struct VideoContribution {
  std::string video_id;
  std::optional<double> positive;  // hazard videos only
  double negative = 0.0;
  friend bool operator==(const VideoContribution&, const VideoContribution&) = default;
};

struct TiouReport {
  double positive_tiou = 0.0;
  double negative_tiou = 0.0;
  double global_tiou = 0.0;
  std::vector<VideoContribution> per_video;
  friend bool operator==(const TiouReport&, const TiouReport&) = default;
};

/// IoU from counts; the empty-vs-empty case counts as perfect agreement.
constexpr double iou_from_counts(std::size_t intersection, std::size_t union_size) noexcept {
  if (union_size == 0) return 1.0;
  return static_cast<double>(intersection) / static_cast<double>(union_size);
}

inline double frame_iou(const std::set<std::size_t>& a, const std::set<std::size_t>& b) {
  std::size_t inter = 0;
  for (std::size_t f : a) inter += b.count(f);
  return iou_from_counts(inter, a.size() + b.size() - inter);
}

/// IoU of two equal-length flag vectors, optionally comparing their complements.
inline double mask_iou(const std::vector<bool>& a, const std::vector<bool>& b, bool complement = false) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::FrameCountMismatch,
                "mask lengths differ: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool x = a[i] != complement;
    const bool y = b[i] != complement;
    inter += (x && y) ? 1 : 0;
    uni += (x || y) ? 1 : 0;
  }
  return iou_from_counts(inter, uni);
}

inline double global_tiou(double positive, double negative) {
  if (!(positive >= 0.0 && positive <= 1.0) || !(negative >= 0.0 && negative <= 1.0)) {
    throw Error(ErrorCode::OutOfRange, "tIoU inputs must lie in [0, 1]");
  }
  const double dp = 1.0 - positive;
  const double dn = 1.0 - negative;
  return 1.0 - std::sqrt(dp * dp + dn * dn) / std::sqrt(2.0);
}

namespace detail {

inline std::vector<const HazardAnnotation*> sorted_by_id(std::span<const HazardAnnotation> gts) {
  std::vector<const HazardAnnotation*> out;
  out.reserve(gts.size());
  for (const auto& g : gts) out.push_back(&g);
  std::sort(out.begin(), out.end(), [](auto* a, auto* b) { return a->video_id < b->video_id; });
  return out;
}

inline const FrameMask& mask_for(const MaskSet& masks, const HazardAnnotation& gt) {
  auto it = masks.find(gt.video_id);
  if (it == masks.end()) throw Error(ErrorCode::MissingMask, "no mask for video '" + gt.video_id + "'");
  if (it->second.frame_count() != gt.frame_count) {
    throw Error(ErrorCode::FrameCountMismatch, "mask for video '" + gt.video_id + "' has " +
                                                   std::to_string(it->second.frame_count()) + " frames, expected " +
                                                   std::to_string(gt.frame_count));
  }
  return it->second;
}

}  // namespace detail

inline double positive_tiou(const MaskSet& masks, std::span<const HazardAnnotation> gts) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto* gt : detail::sorted_by_id(gts)) {
    if (!gt->is_hazard_video) continue;
    sum += mask_iou(detail::mask_for(masks, *gt).flags, gt->positive_frames());
    ++n;
  }
  if (n == 0) throw Error(ErrorCode::NoHazardVideos, "positive tIoU needs at least one hazard video");
  return sum / static_cast<double>(n);
}

inline double negative_tiou(const MaskSet& masks, std::span<const HazardAnnotation> gts) {
  if (gts.empty()) throw Error(ErrorCode::EmptyCorpus, "negative tIoU needs at least one video");
  double sum = 0.0;
  for (const auto* gt : detail::sorted_by_id(gts)) {
    sum += mask_iou(detail::mask_for(masks, *gt).flags, gt->positive_frames(), /*complement=*/true);
  }
  return sum / static_cast<double>(gts.size());
}

inline TiouReport evaluate_tiou(const MaskSet& masks, std::span<const HazardAnnotation> gts) {
  TiouReport report;
  report.positive_tiou = positive_tiou(masks, gts);
  report.negative_tiou = negative_tiou(masks, gts);
  report.global_tiou = global_tiou(report.positive_tiou, report.negative_tiou);
  for (const auto* gt : detail::sorted_by_id(gts)) {
    const auto& flags = detail::mask_for(masks, *gt).flags;
    const auto truth = gt->positive_frames();
    VideoContribution c{gt->video_id, std::nullopt, mask_iou(flags, truth, true)};
    if (gt->is_hazard_video) c.positive = mask_iou(flags, truth);
    report.per_video.push_back(std::move(c));
  }
  return report;
}

inline double video_tpr(const MaskSet& masks, std::span<const HazardAnnotation> gts) {
  std::size_t hits = 0;
  std::size_t n = 0;
  for (const auto& gt : gts) {
    if (!gt.is_hazard_video) continue;
    hits += detail::mask_for(masks, gt).any() ? 1 : 0;
    ++n;
  }
  if (n == 0) throw Error(ErrorCode::NoHazardVideos, "Video-TPR needs at least one hazard video");
  return static_cast<double>(hits) / static_cast<double>(n);
}

inline double video_tnr(const MaskSet& masks, std::span<const HazardAnnotation> gts) {
  std::size_t silent = 0;
  std::size_t n = 0;
  for (const auto& gt : gts) {
    if (gt.is_hazard_video) continue;
    silent += detail::mask_for(masks, gt).any() ? 0 : 1;
    ++n;
  }
  if (n == 0) throw Error(ErrorCode::NoNonHazardVideos, "Video-TNR needs at least one non-hazard video");
  return static_cast<double>(silent) / static_cast<double>(n);
}

/// The five screening metrics of one system over a corpus. Video-TNR is
/// absent when the corpus holds no non-hazard video.
struct ScreeningReport {
  TiouReport tiou;
  double video_tpr = 0.0;
  std::optional<double> video_tnr;
};

inline ScreeningReport evaluate_screening(const MaskSet& masks, std::span<const HazardAnnotation> gts) {
  ScreeningReport r;
  r.tiou = evaluate_tiou(masks, gts);
  r.video_tpr = video_tpr(masks, gts);
  const bool has_negative = std::any_of(gts.begin(), gts.end(), [](const auto& g) { return !g.is_hazard_video; });
  if (has_negative) r.video_tnr = video_tnr(masks, gts);
  return r;
}

}  // namespace hazscreen
