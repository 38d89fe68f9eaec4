#pragma once

// Per-category threshold selection: exhaustive sweep of a fixed grid anchored
// at the minimum observed margin, maximizing Global tIoU.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hazscreen/error.hpp"
#include "hazscreen/fusion.hpp"
#include "hazscreen/signal.hpp"
#include "hazscreen/temporal_metrics.hpp"

namespace hazscreen {

/// Category id of the catch-all hazard prompt.
inline const std::string kGeneralCategory = "hazard";

/// Frames are flagged by strict `margin > threshold`; among equally scoring
/// grid points the lowest threshold wins. Neither rule is configurable.
struct SweepConfig {
  double step = 0.001;
};

struct SweepResult {
  double threshold = 0.0;
  TiouReport report;
};

/// Grid point k of a sweep anchored at `min_observed`.
inline double grid_value(double min_observed, std::size_t k, double step) noexcept {
  return min_observed + static_cast<double>(k) * step;
}

namespace detail {

struct SweepVideo {
  const MarginSeries* series = nullptr;
  const HazardAnnotation* gt = nullptr;
  std::size_t frames = 0;
  std::size_t truth = 0;    // ground-truth positive frames
  std::size_t flagged = 0;  // frames above the current threshold
  std::size_t hits = 0;     // flagged and ground-truth positive
};

inline double sweep_score(const std::vector<SweepVideo>& videos) {
  double pos_sum = 0.0;
  double neg_sum = 0.0;
  std::size_t hazard_videos = 0;
  for (const auto& v : videos) {
    const std::size_t either = v.truth + v.flagged - v.hits;
    if (v.gt->is_hazard_video) {
      pos_sum += iou_from_counts(v.hits, either);
      ++hazard_videos;
    }
    neg_sum += iou_from_counts(v.frames - either, v.frames - v.hits);
  }
  return global_tiou(pos_sum / static_cast<double>(hazard_videos), neg_sum / static_cast<double>(videos.size()));
}

}  // namespace detail

/// Selects the grid threshold maximizing Global tIoU over `series`, one
/// series per video, each matched to its annotation by video id.
///
/// Only grid points where the flagged frame set changes are scored; between
/// them the score is constant, so the first point of each run is the lowest
/// maximizer of that run.
inline SweepResult sweep_threshold(std::span<const MarginSeries> series, std::span<const HazardAnnotation> gts,
                                   const SweepConfig& cfg = {}) {
  if (!(cfg.step > 0.0) || !std::isfinite(cfg.step)) {
    throw Error(ErrorCode::ValidationError, "sweep step must be finite and > 0");
  }
  if (series.empty()) throw Error(ErrorCode::EmptySignal, "no margin series to sweep");

  std::map<std::string, const HazardAnnotation*> by_id;
  for (const auto& g : gts) by_id[g.video_id] = &g;

  std::vector<detail::SweepVideo> videos;
  std::set<std::string> seen;
  for (const auto& s : series) {
    if (!seen.insert(s.video_id()).second) {
      throw Error(ErrorCode::DuplicateVideoId, "video '" + s.video_id() + "' appears twice in the sweep");
    }
    auto it = by_id.find(s.video_id());
    if (it == by_id.end()) throw Error(ErrorCode::ValidationError, "no annotation for video '" + s.video_id() + "'");
    if (it->second->frame_count != s.frame_count()) {
      throw Error(ErrorCode::FrameCountMismatch, "video '" + s.video_id() + "': series has " +
                                                     std::to_string(s.frame_count()) + " frames, annotation " +
                                                     std::to_string(it->second->frame_count));
    }
    videos.push_back({&s, it->second, s.frame_count(), it->second->positive_count(), 0, 0});
  }
  std::sort(videos.begin(), videos.end(),
            [](const auto& a, const auto& b) { return a.series->video_id() < b.series->video_id(); });

  std::size_t total_frames = 0;
  std::size_t negative_frames = 0;
  bool any_hazard = false;
  for (const auto& v : videos) {
    total_frames += v.frames;
    negative_frames += v.frames - v.truth;
    any_hazard = any_hazard || v.gt->is_hazard_video;
  }
  if (total_frames == 0) throw Error(ErrorCode::EmptySignal, "margin series contain no frames");
  if (!any_hazard) throw Error(ErrorCode::InsufficientCorpus, "sweep needs at least one hazard video");
  if (negative_frames == 0) throw Error(ErrorCode::InsufficientCorpus, "sweep needs at least one non-hazard frame");

  struct Event {
    double margin;
    std::size_t video;
    bool truth;
  };
  std::vector<Event> events;
  events.reserve(total_frames);
  for (std::size_t vi = 0; vi < videos.size(); ++vi) {
    const auto truth = videos[vi].gt->positive_frames();
    for (std::size_t f = 0; f < videos[vi].frames; ++f) {
      events.push_back({(*videos[vi].series)[f], vi, static_cast<bool>(truth[f])});
    }
  }
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.margin < b.margin; });

  const double lo = events.front().margin;
  const double hi = events.back().margin;
  const double span_steps = std::ceil((hi - lo) / cfg.step);
  if (span_steps > 1e12) throw Error(ErrorCode::ValidationError, "sweep grid too fine for the observed range");
  const auto last_k = static_cast<std::size_t>(span_steps);

  // Everything starts flagged; frames drop out as the grid passes them.
  for (const auto& e : events) {
    ++videos[e.video].flagged;
    if (e.truth) ++videos[e.video].hits;
  }

  std::size_t next_event = 0;
  std::size_t k = 0;
  std::size_t best_k = 0;
  double best_score = -1.0;
  while (true) {
    const double t = grid_value(lo, k, cfg.step);
    while (next_event < events.size() && events[next_event].margin <= t) {
      auto& v = videos[events[next_event].video];
      --v.flagged;
      if (events[next_event].truth) --v.hits;
      ++next_event;
    }
    const double score = detail::sweep_score(videos);
    if (score > best_score) {
      best_score = score;
      best_k = k;
    }
    if (next_event == events.size()) break;

    // Smallest grid index past k whose value reaches the next flagged margin.
    const double target = events[next_event].margin;
    const double guess = std::ceil((target - lo) / cfg.step);
    std::size_t nk = std::max(k + 1, static_cast<std::size_t>(std::max(guess, 0.0)));
    while (nk > k + 1 && grid_value(lo, nk - 1, cfg.step) >= target) --nk;
    while (nk <= last_k && grid_value(lo, nk, cfg.step) < target) ++nk;
    if (nk > last_k) break;
    k = nk;
  }

  SweepResult result;
  result.threshold = grid_value(lo, best_k, cfg.step);
  MaskSet masks;
  std::vector<HazardAnnotation> used;
  for (const auto& v : videos) {
    masks.emplace(v.series->video_id(), threshold_mask(*v.series, result.threshold));
    used.push_back(*v.gt);
  }
  result.report = evaluate_tiou(masks, used);
  return result;
}

/// One video's annotation together with its margin series, keyed by category.
struct VideoSignals {
  HazardAnnotation annotation;
  std::map<std::string, MarginSeries> channels;
  bool nominal = false;
};

struct TuneOptions {
  SweepConfig sweep;
  // When false, nominal (normal-driving) clips are left out of every sweep.
  bool include_nominal = true;
};

struct ProfileEntry {
  double threshold = 0.0;
  TiouReport report;
  friend bool operator==(const ProfileEntry&, const ProfileEntry&) = default;
};

struct CalibrationProfile {
  std::map<std::string, ProfileEntry> entries;
  std::string prompt_set_digest;
  std::string corpus_digest;
  std::string created_at;
  double step = 0.001;
  friend bool operator==(const CalibrationProfile&, const CalibrationProfile&) = default;
};

/// Tunes each requested category on its own labeled hazard videos plus the
/// non-hazard footage. The general category is tuned on every hazard video.
inline CalibrationProfile tune_categories(std::span<const VideoSignals> corpus, std::span<const std::string> categories,
                                          const TuneOptions& opts = {}) {
  std::vector<std::string> missing;
  for (const auto& c : categories) {
    if (c == kGeneralCategory) continue;
    const bool present = std::any_of(corpus.begin(), corpus.end(), [&](const VideoSignals& v) {
      return v.annotation.is_hazard_video && v.annotation.category == c;
    });
    if (!present) missing.push_back(c);
  }
  if (!missing.empty()) {
    std::string names;
    for (const auto& m : missing) names += (names.empty() ? "" : ", ") + m;
    throw Error(ErrorCode::MissingCategorySubset, "no labeled hazard videos for categories: " + names);
  }

  CalibrationProfile profile;
  profile.step = opts.sweep.step;
  for (const auto& c : categories) {
    std::vector<MarginSeries> series;
    std::vector<HazardAnnotation> gts;
    for (const auto& v : corpus) {
      const auto& a = v.annotation;
      bool use = false;
      if (a.is_hazard_video) {
        use = c == kGeneralCategory || a.category == c;
      } else {
        use = opts.include_nominal || !v.nominal;
      }
      if (!use) continue;
      auto it = v.channels.find(c);
      if (it == v.channels.end()) {
        throw Error(ErrorCode::ValidationError, "video '" + a.video_id + "' has no signal for category '" + c + "'");
      }
      series.push_back(it->second);
      gts.push_back(a);
    }
    SweepResult result;
    try {
      result = sweep_threshold(series, gts, opts.sweep);
    } catch (const Error& e) {
      throw Error(e.code(), "category '" + c + "': " + e.what());
    }
    profile.entries[c] = {result.threshold, std::move(result.report)};
  }
  return profile;
}

}  // namespace hazscreen
