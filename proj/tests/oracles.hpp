#pragma once

// Independent reference computations and random generators shared by the
// unit and acceptance suites. Nothing here calls the code path it checks:
// the sweep oracle rescans every grid point, segments come from a state
// machine, ADE from an explicit loop.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "hazscreen/calibration.hpp"
#include "hazscreen/fusion.hpp"
#include "hazscreen/temporal_metrics.hpp"
#include "hazscreen/trajectory.hpp"

namespace hazscreen::oracle {

struct Corpus {
  std::vector<MarginSeries> series;
  std::vector<HazardAnnotation> gts;
};

struct SweepAnswer {
  double threshold = 0.0;
  double global = -1.0;
  double positive = 0.0;
  double negative = 0.0;
};

/// Scores every point of the grid {min + k * step}, keeping the first maximum.
inline SweepAnswer brute_force_sweep(const Corpus& c, double step) {
  double lo = INFINITY;
  double hi = -INFINITY;
  for (const auto& s : c.series) {
    for (double m : s.margins()) {
      lo = std::min(lo, m);
      hi = std::max(hi, m);
    }
  }
  const auto last = static_cast<std::size_t>(std::ceil((hi - lo) / step));
  SweepAnswer best;
  for (std::size_t k = 0; k <= last; ++k) {
    const double t = lo + static_cast<double>(k) * step;
    MaskSet masks;
    for (const auto& s : c.series) masks.emplace(s.video_id(), threshold_mask(s, t));
    const double p = positive_tiou(masks, c.gts);
    const double n = negative_tiou(masks, c.gts);
    const double g = global_tiou(p, n);
    if (g > best.global) best = {t, g, p, n};
  }
  return best;
}

/// Random corpus with at least one hazard video and one non-hazard frame.
inline Corpus random_corpus(std::mt19937_64& rng, std::size_t max_videos = 10, std::size_t max_frames = 100,
                            double offset = 0.0, double spread = 1.0) {
  std::uniform_int_distribution<std::size_t> nv(1, max_videos);
  std::uniform_int_distribution<std::size_t> nf(2, max_frames);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  Corpus c;
  const std::size_t videos = nv(rng);
  for (std::size_t v = 0; v < videos; ++v) {
    const std::size_t frames = nf(rng);
    HazardAnnotation a;
    a.video_id = "vid" + std::to_string(100 + v);
    a.frame_count = frames;
    a.is_hazard_video = v == 0 || coin(rng);
    if (a.is_hazard_video) {
      std::uniform_int_distribution<std::size_t> pick(0, frames - 1);
      std::size_t s = pick(rng);
      std::size_t e = pick(rng);
      if (s > e) std::swap(s, e);
      // keep at least one non-hazard frame in the first video
      if (v == 0 && s == 0 && e == frames - 1) e = frames - 2;
      a.active_interval = Interval{s, e};
      a.category = "animal";
    }
    const double lift = std::uniform_real_distribution<double>(0.0, 2.0)(rng);
    std::vector<double> m(frames);
    for (std::size_t f = 0; f < frames; ++f) {
      m[f] = offset + spread * u(rng);
      if (a.active_interval && a.active_interval->contains(f)) m[f] += lift;
    }
    c.series.emplace_back(a.video_id, "animal", std::move(m));
    c.gts.push_back(std::move(a));
  }
  return c;
}

inline Corpus shifted(const Corpus& c, double delta) {
  Corpus out{{}, c.gts};
  for (const auto& s : c.series) {
    std::vector<double> m(s.margins().begin(), s.margins().end());
    for (double& x : m) x += delta;
    out.series.emplace_back(s.video_id(), s.category(), std::move(m));
  }
  return out;
}

/// Segment boundaries from a two-state scan over the mask.
inline std::vector<std::pair<std::size_t, std::size_t>> run_length_segments(const std::vector<bool>& flags) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  bool inside = false;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= flags.size(); ++i) {
    const bool on = i < flags.size() && flags[i];
    if (on && !inside) start = i;
    if (!on && inside) out.emplace_back(start, i - 1);
    inside = on;
  }
  return out;
}

inline double ade_loop(const Trajectory& a, const Trajectory& b) {
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double dx = a.waypoints()[i].x - b.waypoints()[i].x;
    const double dy = a.waypoints()[i].y - b.waypoints()[i].y;
    total += std::sqrt(dx * dx + dy * dy);
  }
  return total / static_cast<double>(a.size());
}

inline Trajectory random_trajectory(std::mt19937_64& rng, std::size_t n, double scale = 50.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<Waypoint> w;
  for (std::size_t i = 0; i < n; ++i) w.push_back({0.5 * static_cast<double>(i + 1), u(rng), u(rng)});
  return Trajectory(std::move(w));
}

inline DetectorBank random_bank(std::mt19937_64& rng, std::size_t categories, std::size_t frames) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  auto series = [&](const std::string& cat) {
    std::vector<double> m(frames);
    for (double& x : m) x = u(rng);
    return MarginSeries("bank", cat, std::move(m));
  };
  DetectorBank bank;
  bank.video_id = "bank";
  for (std::size_t c = 0; c < categories; ++c) {
    const std::string name = "cat" + std::to_string(c);
    bank.category_channels.emplace(name, DetectorChannel{series(name), u(rng)});
  }
  bank.general_channel = DetectorChannel{series("hazard"), u(rng)};
  return bank;
}

}  // namespace hazscreen::oracle
