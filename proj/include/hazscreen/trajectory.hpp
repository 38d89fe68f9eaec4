#pragma once

// Trajectory displacement metrics and instruction-level cohort reporting.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hazscreen/error.hpp"

namespace hazscreen {

struct Waypoint {
  double t = 0.0;  // seconds
  double x = 0.0;  // meters
  double y = 0.0;  // meters
  friend bool operator==(const Waypoint&, const Waypoint&) = default;
};

inline constexpr double kTimestampTolerance = 1e-6;

class Trajectory {
 public:
  explicit Trajectory(std::vector<Waypoint> waypoints) : waypoints_(std::move(waypoints)) {
    if (waypoints_.empty()) throw Error(ErrorCode::InvalidTrajectory, "trajectory needs at least one waypoint");
    for (std::size_t i = 0; i < waypoints_.size(); ++i) {
      const auto& w = waypoints_[i];
      if (!std::isfinite(w.t) || !std::isfinite(w.x) || !std::isfinite(w.y)) {
        throw Error(ErrorCode::InvalidTrajectory, "waypoint " + std::to_string(i) + " is not finite");
      }
      if (i > 0 && !(w.t > waypoints_[i - 1].t)) {
        throw Error(ErrorCode::InvalidTrajectory, "timestamps must be strictly increasing (waypoint " +
                                                      std::to_string(i) + ")");
      }
    }
  }

  std::span<const Waypoint> waypoints() const noexcept { return waypoints_; }
  std::size_t size() const noexcept { return waypoints_.size(); }

  Trajectory translated(double dx, double dy) const {
    auto w = waypoints_;
    for (auto& p : w) {
      p.x += dx;
      p.y += dy;
    }
    return Trajectory(std::move(w));
  }

 private:
  std::vector<Waypoint> waypoints_;
};

/// Average displacement error: mean Euclidean distance of time-aligned waypoints.
inline double ade(const Trajectory& pred, const Trajectory& gt) {
  if (pred.size() != gt.size()) {
    throw Error(ErrorCode::LengthMismatch, "trajectories have " + std::to_string(pred.size()) + " and " +
                                               std::to_string(gt.size()) + " waypoints");
  }
  const auto a = pred.waypoints();
  const auto b = gt.waypoints();
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i].t - b[i].t) > kTimestampTolerance) {
      throw Error(ErrorCode::TimestampMismatch, "waypoint " + std::to_string(i) + " timestamps differ");
    }
    sum += std::hypot(a[i].x - b[i].x, a[i].y - b[i].y);
  }
  return sum / static_cast<double>(a.size());
}

struct ScoredScene {
  std::string scene_id;
  double value = 0.0;
};

struct PercentileCut {
  double cutoff = 0.0;
  std::vector<std::string> removed;  // ascending scene id
};

/// Nearest-rank percentile cut: the cutoff is the value at 1-based rank
/// ceil(q/100 * N) of the ascending sort, and scenes strictly above it are
/// removed. Values tied with the cutoff stay.
inline PercentileCut percentile_filter(std::span<const ScoredScene> values, double q) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "percentile filter needs at least one scene");
  if (!(q > 0.0 && q <= 100.0)) throw Error(ErrorCode::BadPercentile, "percentile must lie in (0, 100]");

  std::vector<double> sorted;
  sorted.reserve(values.size());
  for (const auto& v : values) sorted.push_back(v.value);
  std::sort(sorted.begin(), sorted.end());

  // q * N / 100 keeps exact products such as 97.5 * 40 exact before the ceil.
  const auto n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(q * n / 100.0 - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());

  PercentileCut cut;
  cut.cutoff = sorted[rank - 1];
  for (const auto& v : values) {
    if (v.value > cut.cutoff) cut.removed.push_back(v.scene_id);
  }
  std::sort(cut.removed.begin(), cut.removed.end());
  return cut;
}

struct InstructionEval {
  std::string instruction;
  double ade = 0.0;
};

struct SceneEvaluation {
  std::string scene_id;
  double baseline_ade = 0.0;
  std::vector<InstructionEval> instruction_evals;
};

/// Cohort means of the baseline and of per-scene best/avg/worst instruction ADE.
struct CohortMeans {
  double baseline = 0.0;
  double best = 0.0;
  double avg = 0.0;
  double worst = 0.0;
};

struct CohortReport {
  CohortMeans all;
  CohortMeans filtered;
  double q = 97.5;
  double cutoff = 0.0;
  std::vector<std::string> retained_scene_ids;
  std::vector<std::string> removed_scene_ids;
  double win_rate = 0.0;      // over retained scenes
  double win_rate_all = 0.0;  // over every scene
};

namespace detail {

struct SceneSummary {
  double baseline, best, avg, worst;
  std::size_t wins, pairs;
};

inline SceneSummary summarize(const SceneEvaluation& s) {
  SceneSummary out{s.baseline_ade, std::numeric_limits<double>::infinity(),
                   0.0, -std::numeric_limits<double>::infinity(), 0, s.instruction_evals.size()};
  for (const auto& e : s.instruction_evals) {
    out.best = std::min(out.best, e.ade);
    out.worst = std::max(out.worst, e.ade);
    out.avg += e.ade;
    if (e.ade < s.baseline_ade) ++out.wins;
  }
  out.avg /= static_cast<double>(s.instruction_evals.size());
  return out;
}

inline CohortMeans cohort_means(const std::vector<SceneSummary>& rows) {
  CohortMeans m;
  if (rows.empty()) return m;
  for (const auto& r : rows) {
    m.baseline += r.baseline;
    m.best += r.best;
    m.avg += r.avg;
    m.worst += r.worst;
  }
  const auto n = static_cast<double>(rows.size());
  return {m.baseline / n, m.best / n, m.avg / n, m.worst / n};
}

inline double win_fraction(const std::vector<SceneSummary>& rows) {
  std::size_t wins = 0;
  std::size_t pairs = 0;
  for (const auto& r : rows) {
    wins += r.wins;
    pairs += r.pairs;
  }
  return pairs == 0 ? 0.0 : static_cast<double>(wins) / static_cast<double>(pairs);
}

}  // namespace detail

/// Instruction-level statistics over all scenes and over the scenes that
/// survive the baseline percentile filter. The removed set is derived from
/// baseline ADE alone and applied to every condition.
inline CohortReport instruction_stats(std::vector<SceneEvaluation> scenes, double q) {
  if (scenes.empty()) throw Error(ErrorCode::EmptyInput, "no scenes to aggregate");
  for (const auto& s : scenes) {
    if (s.instruction_evals.empty()) {
      throw Error(ErrorCode::NoInstructions, "scene '" + s.scene_id + "' has no instruction evaluations");
    }
    if (!(s.baseline_ade >= 0.0)) throw Error(ErrorCode::ValidationError, "scene '" + s.scene_id + "' has negative ADE");
  }
  std::sort(scenes.begin(), scenes.end(), [](const auto& a, const auto& b) { return a.scene_id < b.scene_id; });

  std::vector<ScoredScene> baselines;
  for (const auto& s : scenes) baselines.push_back({s.scene_id, s.baseline_ade});
  const PercentileCut cut = percentile_filter(baselines, q);
  const std::set<std::string> removed(cut.removed.begin(), cut.removed.end());

  std::vector<detail::SceneSummary> all;
  std::vector<detail::SceneSummary> kept;
  CohortReport report;
  report.q = q;
  report.cutoff = cut.cutoff;
  report.removed_scene_ids = cut.removed;
  for (const auto& s : scenes) {
    all.push_back(detail::summarize(s));
    if (!removed.count(s.scene_id)) {
      kept.push_back(all.back());
      report.retained_scene_ids.push_back(s.scene_id);
    }
  }
  report.all = detail::cohort_means(all);
  report.filtered = detail::cohort_means(kept);
  report.win_rate = detail::win_fraction(kept);
  report.win_rate_all = detail::win_fraction(all);
  return report;
}

}  // namespace hazscreen
