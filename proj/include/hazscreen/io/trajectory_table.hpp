#pragma once

// Trajectory table, one waypoint per row, rows of a trajectory in time order:
//
//   scene_id,condition,instruction_id,t,x,y
//   scene-0001,ground_truth,,0.5,1.2,0.0
//   scene-0001,baseline,,0.5,1.1,0.1
//   scene-0001,instruction,3,0.5,1.2,0.05
//
// condition is ground_truth, baseline or instruction; instruction_id is empty
// unless condition is instruction.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hazscreen/error.hpp"
#include "hazscreen/io/files.hpp"
#include "hazscreen/io/text.hpp"
#include "hazscreen/trajectory.hpp"

namespace hazscreen::io {

struct SceneTrajectories {
  std::optional<Trajectory> ground_truth;
  std::optional<Trajectory> baseline;
  std::map<std::string, Trajectory> instructions;
};

inline std::map<std::string, SceneTrajectories> parse_trajectory_table(const std::string& text,
                                                                       const std::string& source) {
  const auto rows = lines(text);
  if (rows.empty()) throw parse_error(source, 1, "missing header row");
  const char delim = detect_delimiter(rows[0]);
  const std::vector<std::string_view> expected{"scene_id", "condition", "instruction_id", "t", "x", "y"};
  if (split(rows[0], delim) != expected) throw parse_error(source, 1, "header must be scene_id,condition,instruction_id,t,x,y");

  // (scene, condition, instruction) -> waypoints, in file order
  std::map<std::string, std::map<std::pair<std::string, std::string>, std::vector<Waypoint>>> raw;
  for (std::size_t ln = 1; ln < rows.size(); ++ln) {
    if (trim(rows[ln]).empty()) continue;
    const auto f = split(rows[ln], delim);
    if (f.size() != 6) throw parse_error(source, ln + 1, "expected 6 fields");
    if (f[0].empty()) throw parse_error(source, ln + 1, "empty scene_id");
    const std::string condition(f[1]);
    if (condition != "ground_truth" && condition != "baseline" && condition != "instruction") {
      throw parse_error(source, ln + 1, "unknown condition '" + condition + "'");
    }
    if ((condition == "instruction") == f[2].empty()) {
      throw parse_error(source, ln + 1, "instruction_id must be set exactly for instruction rows");
    }
    const auto t = parse_double(f[3]);
    const auto x = parse_double(f[4]);
    const auto y = parse_double(f[5]);
    if (!t || !x || !y) throw parse_error(source, ln + 1, "t, x and y must be numbers");
    raw[std::string(f[0])][{condition, std::string(f[2])}].push_back({*t, *x, *y});
  }

  std::map<std::string, SceneTrajectories> out;
  for (auto& [scene, trajectories] : raw) {
    auto& s = out[scene];
    for (auto& [key, points] : trajectories) {
      try {
        Trajectory traj(std::move(points));
        if (key.first == "ground_truth") {
          s.ground_truth = std::move(traj);
        } else if (key.first == "baseline") {
          s.baseline = std::move(traj);
        } else {
          s.instructions.emplace(key.second, std::move(traj));
        }
      } catch (const Error& e) {
        throw Error(e.code(), source + ": scene '" + scene + "' " + key.first + " " + key.second + ": " + e.what());
      }
    }
  }
  return out;
}

inline std::map<std::string, SceneTrajectories> read_trajectory_table(const std::filesystem::path& path) {
  return parse_trajectory_table(read_text(path), path.string());
}

/// Scores every scene's baseline and instruction trajectories against its ground truth.
inline std::vector<SceneEvaluation> evaluate_scenes(const std::map<std::string, SceneTrajectories>& table) {
  std::vector<SceneEvaluation> out;
  for (const auto& [scene, s] : table) {
    if (!s.ground_truth) throw Error(ErrorCode::ValidationError, "scene '" + scene + "' has no ground_truth trajectory");
    if (!s.baseline) throw Error(ErrorCode::ValidationError, "scene '" + scene + "' has no baseline trajectory");
    if (s.instructions.empty()) throw Error(ErrorCode::NoInstructions, "scene '" + scene + "' has no instruction trajectories");
    try {
      SceneEvaluation e{scene, ade(*s.baseline, *s.ground_truth), {}};
      for (const auto& [id, traj] : s.instructions) e.instruction_evals.push_back({id, ade(traj, *s.ground_truth)});
      out.push_back(std::move(e));
    } catch (const Error& err) {
      throw Error(err.code(), "scene '" + scene + "': " + err.what());
    }
  }
  return out;
}

}  // namespace hazscreen::io
