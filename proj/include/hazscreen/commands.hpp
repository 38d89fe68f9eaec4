#pragma once

// calibrate -> screen -> evaluate pipeline and trajectory reporting, as used by
// the hazscreen command-line tool. Each command reads its inputs, writes its
// outputs atomically, and returns the text meant for stdout.

#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hazscreen/calibration.hpp"
#include "hazscreen/error.hpp"
#include "hazscreen/fusion.hpp"
#include "hazscreen/io/fixture.hpp"
#include "hazscreen/io/json_util.hpp"
#include "hazscreen/io/manifest.hpp"
#include "hazscreen/io/profile.hpp"
#include "hazscreen/io/prompts.hpp"
#include "hazscreen/io/segments.hpp"
#include "hazscreen/io/text.hpp"
#include "hazscreen/io/trajectory_table.hpp"
#include "hazscreen/temporal_metrics.hpp"
#include "hazscreen/trajectory.hpp"

namespace hazscreen::cmd {

namespace fs = std::filesystem;

enum class ReportFormat { Json, Csv };

struct CommandOutput {
  std::string stdout_text;
  std::vector<std::string> warnings;
};

namespace detail {

inline std::string fixed(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

inline io::PromptSet resolve_prompts(const io::CorpusManifest& manifest, const std::optional<fs::path>& prompts) {
  if (prompts) return io::load_prompt_set(*prompts);
  if (manifest.prompts_path) return io::load_prompt_set(*manifest.prompts_path);
  throw Error(ErrorCode::ValidationError, "no prompt set: pass --prompts or name one in the manifest");
}

inline std::optional<io::PromptSet> optional_prompts(const io::CorpusManifest& manifest,
                                                     const std::optional<fs::path>& prompts) {
  if (!prompts && !manifest.prompts_path) return std::nullopt;
  return resolve_prompts(manifest, prompts);
}

}  // namespace detail

// ---------------------------------------------------------------- calibrate

struct CalibrateConfig {
  fs::path manifest;
  std::optional<fs::path> prompts;
  fs::path out;
  double step = 0.001;
  std::optional<std::string> category;  // every prompt-set category when empty
  std::string created_at = "1970-01-01T00:00:00Z";
  bool include_nominal = true;
  unsigned jobs = 1;
};

/// Summary rows: category, threshold, global, positive and negative tIoU,
/// tab-separated, numbers in shortest round-trip form.
inline std::string format_calibration_summary(const CalibrationProfile& profile) {
  std::string out = "category\tthreshold\tglobal_tiou\tpositive_tiou\tnegative_tiou\n";
  for (const auto& [category, e] : profile.entries) {
    out += category + "\t" + io::format_number(e.threshold) + "\t" + io::format_number(e.report.global_tiou) + "\t" +
           io::format_number(e.report.positive_tiou) + "\t" + io::format_number(e.report.negative_tiou) + "\n";
  }
  return out;
}

inline CommandOutput calibrate(const CalibrateConfig& cfg) {
  if (!(cfg.step > 0.0) || !std::isfinite(cfg.step)) throw Error(ErrorCode::ValidationError, "--step must be > 0");
  const auto manifest = io::load_manifest(cfg.manifest);
  const auto prompts = detail::resolve_prompts(manifest, cfg.prompts);

  std::vector<std::string> categories;
  if (cfg.category) {
    if (!prompts.find(*cfg.category)) {
      throw Error(ErrorCode::ValidationError, "category '" + *cfg.category + "' is not in the prompt set");
    }
    categories.push_back(*cfg.category);
  } else {
    categories = prompts.categories();
  }

  const auto corpus = io::load_corpus(manifest, &prompts, {io::Split::Calibration}, cfg.jobs);
  if (corpus.empty()) throw Error(ErrorCode::EmptyCorpus, "manifest has no calibration videos");

  TuneOptions opts;
  opts.sweep.step = cfg.step;
  opts.include_nominal = cfg.include_nominal;
  CalibrationProfile profile = tune_categories(corpus, categories, opts);
  profile.prompt_set_digest = io::prompt_set_digest(prompts);
  profile.corpus_digest = io::corpus_digest(corpus);
  profile.created_at = cfg.created_at;
  io::save_profile(profile, cfg.out);
  return {format_calibration_summary(profile), {}};
}

// ------------------------------------------------------------------- screen

struct ScreenConfig {
  fs::path manifest;
  fs::path profile;
  FusionPolicy policy = FusionPolicy::CategoriesOnly;
  fs::path out;
  std::optional<fs::path> prompts;
  std::optional<io::Split> split;
  std::size_t min_frames = 1;
  bool retune = false;  // tune fresh thresholds on the screened videos
  unsigned jobs = 1;
};

inline DetectorBank make_bank(const VideoSignals& video, const CalibrationProfile& profile) {
  DetectorBank bank;
  bank.video_id = video.annotation.video_id;
  for (const auto& [category, entry] : profile.entries) {
    auto it = video.channels.find(category);
    if (it == video.channels.end()) {
      throw Error(ErrorCode::ValidationError, "video '" + bank.video_id + "' has no signal for '" + category + "'");
    }
    DetectorChannel ch{it->second, entry.threshold};
    if (category == kGeneralCategory) {
      bank.general_channel = std::move(ch);
    } else {
      bank.category_channels.emplace(category, std::move(ch));
    }
  }
  return bank;
}

inline CommandOutput screen(const ScreenConfig& cfg) {
  const auto manifest = io::load_manifest(cfg.manifest);
  CalibrationProfile profile = io::load_profile(cfg.profile);
  if (requires_general(cfg.policy) && !profile.entries.count(kGeneralCategory)) {
    throw Error(ErrorCode::MissingGeneralChannel, "policy '" + std::string(to_string(cfg.policy)) +
                                                      "' needs a '" + kGeneralCategory + "' entry in the profile");
  }
  if (cfg.min_frames == 0) throw Error(ErrorCode::ValidationError, "--min-frames must be >= 1");

  CommandOutput result;
  const auto prompts = detail::optional_prompts(manifest, cfg.prompts);
  if (prompts && io::prompt_set_digest(*prompts) != profile.prompt_set_digest) {
    result.warnings.push_back("profile was tuned with a different prompt set");
  }
  const auto corpus = io::load_corpus(manifest, prompts ? &*prompts : nullptr, {cfg.split}, cfg.jobs);
  const auto calibration = cfg.split == io::Split::Calibration
                               ? corpus
                               : io::load_corpus(manifest, prompts ? &*prompts : nullptr, {io::Split::Calibration}, cfg.jobs);
  if (io::corpus_digest(calibration) != profile.corpus_digest) {
    result.warnings.push_back("profile was tuned on a different corpus");
  }

  if (cfg.retune) {
    std::vector<std::string> categories;
    for (const auto& [c, _] : profile.entries) categories.push_back(c);
    TuneOptions opts;
    opts.sweep.step = profile.step;
    profile = tune_categories(corpus, categories, opts);
  }

  std::vector<AlertSegment> segments;
  for (const auto& video : corpus) {
    const FrameMask mask = fuse(make_bank(video, profile), cfg.policy);
    auto found = drop_short_segments(extract_segments(mask, cfg.policy), cfg.min_frames);
    segments.insert(segments.end(), found.begin(), found.end());
  }
  io::write_segments(cfg.out, segments);
  result.stdout_text = std::to_string(segments.size()) + " segments over " + std::to_string(corpus.size()) + " videos\n";
  return result;
}

// ----------------------------------------------------------------- evaluate

struct EvaluateConfig {
  fs::path segments;
  fs::path manifest;
  fs::path report;
  ReportFormat format = ReportFormat::Json;
  std::optional<io::Split> split;
  unsigned jobs = 1;
};

inline std::string format_screening_report(const ScreeningReport& r, const std::string& system, ReportFormat format) {
  const auto tnr_text = r.video_tnr ? io::format_number(*r.video_tnr) : std::string();
  if (format == ReportFormat::Csv) {
    return "system,global_tiou,positive_tiou,negative_tiou,video_tpr,video_tnr\n" + system + "," +
           io::format_number(r.tiou.global_tiou) + "," + io::format_number(r.tiou.positive_tiou) + "," +
           io::format_number(r.tiou.negative_tiou) + "," + io::format_number(r.video_tpr) + "," + tnr_text + "\n";
  }
  io::Json doc;
  doc["schema_version"] = 1;
  doc["system"] = system;
  doc["global_tiou"] = r.tiou.global_tiou;
  doc["positive_tiou"] = r.tiou.positive_tiou;
  doc["negative_tiou"] = r.tiou.negative_tiou;
  doc["video_tpr"] = r.video_tpr;
  doc["video_tnr"] = r.video_tnr ? io::Json(*r.video_tnr) : io::Json(nullptr);
  doc["per_video"] = io::report_json(r.tiou)["per_video"];
  return io::dump(doc);
}

inline std::string screening_table(const ScreeningReport& r, const std::string& system) {
  return "System\tGlobal tIoU\tPositive tIoU\tNegative tIoU\tVideo-TPR\tVideo-TNR\n" + system + "\t" +
         detail::fixed(r.tiou.global_tiou) + "\t" + detail::fixed(r.tiou.positive_tiou) + "\t" +
         detail::fixed(r.tiou.negative_tiou) + "\t" + detail::fixed(r.video_tpr, 2) + "\t" +
         (r.video_tnr ? detail::fixed(*r.video_tnr, 2) : std::string("n/a")) + "\n";
}

inline CommandOutput evaluate(const EvaluateConfig& cfg) {
  const auto manifest = io::load_manifest(cfg.manifest);
  const auto segments = io::read_segments(cfg.segments);

  std::vector<HazardAnnotation> gts;
  for (const auto& e : manifest.videos) {
    if (cfg.split && e.split != *cfg.split) continue;
    gts.push_back(io::load_annotations(e.annotation_path, e.frame_count));
  }
  std::map<std::string, std::vector<AlertSegment>> by_video;
  std::set<std::string> policies;
  for (const auto& s : segments) {
    const auto* entry = manifest.find(s.video_id);
    if (!entry) throw Error(ErrorCode::ValidationError, "segment references unknown video_id '" + s.video_id + "'");
    if (cfg.split && entry->split != *cfg.split) {
      throw Error(ErrorCode::ValidationError, "segment for video '" + s.video_id + "' lies outside the selected split");
    }
    by_video[s.video_id].push_back(s);
    policies.insert(std::string(to_string(s.policy)));
  }

  MaskSet masks;
  for (const auto& gt : gts) masks.emplace(gt.video_id, rasterize(by_video[gt.video_id], gt.video_id, gt.frame_count));
  const ScreeningReport report = evaluate_screening(masks, gts);

  std::string system = policies.size() == 1 ? *policies.begin() : (policies.empty() ? "none" : "mixed");
  io::write_atomic(cfg.report, format_screening_report(report, system, cfg.format));
  return {screening_table(report, system), {}};
}

// ---------------------------------------------------------------- traj-eval

struct TrajEvalConfig {
  fs::path trajectories;
  double q = 97.5;
  fs::path report;
  ReportFormat format = ReportFormat::Json;
};

inline std::string filtered_label(double q) { return "Mean (Q" + io::format_number(q) + ")"; }

inline std::string format_cohort_report(const CohortReport& r, const std::vector<SceneEvaluation>& scenes,
                                        ReportFormat format) {
  auto join = [](const std::vector<std::string>& ids) {
    std::string out;
    for (const auto& id : ids) out += (out.empty() ? "" : ";") + id;
    return out;
  };
  if (format == ReportFormat::Csv) {
    auto row = [](const std::string& label, const CohortMeans& m, double win, const std::string& removed) {
      return label + "," + io::format_number(m.baseline) + "," + io::format_number(m.best) + "," +
             io::format_number(m.avg) + "," + io::format_number(m.worst) + "," + io::format_number(win) + "," +
             removed + "\n";
    };
    return "row,baseline_ade,best_ade,avg_ade,worst_ade,win_rate,removed_scene_ids\n" +
           row("Mean (All)", r.all, r.win_rate_all, "") +
           row(filtered_label(r.q), r.filtered, r.win_rate, join(r.removed_scene_ids));
  }
  auto means = [](const std::string& label, const CohortMeans& m) {
    return io::Json{{"row", label}, {"baseline_ade", m.baseline}, {"best_ade", m.best}, {"avg_ade", m.avg},
                    {"worst_ade", m.worst}};
  };
  io::Json doc;
  doc["schema_version"] = 1;
  doc["q"] = r.q;
  doc["cutoff"] = r.cutoff;
  doc["rows"] = io::Json::array({means("Mean (All)", r.all), means(filtered_label(r.q), r.filtered)});
  doc["win_rate"] = r.win_rate;
  doc["win_rate_all"] = r.win_rate_all;
  doc["retained_scene_ids"] = r.retained_scene_ids;
  doc["removed_scene_ids"] = r.removed_scene_ids;
  io::Json per_scene = io::Json::array();
  for (const auto& s : scenes) {
    io::Json instr = io::Json::array();
    for (const auto& e : s.instruction_evals) instr.push_back({{"instruction_id", e.instruction}, {"ade", e.ade}});
    per_scene.push_back({{"scene_id", s.scene_id}, {"baseline_ade", s.baseline_ade}, {"instructions", instr}});
  }
  doc["scenes"] = per_scene;
  return io::dump(doc);
}

inline std::string cohort_table(const CohortReport& r) {
  auto row = [](const std::string& label, const CohortMeans& m) {
    return label + "\t" + detail::fixed(m.baseline) + "\t" + detail::fixed(m.best) + "\t" + detail::fixed(m.avg) +
           "\t" + detail::fixed(m.worst) + "\n";
  };
  std::string removed;
  for (const auto& id : r.removed_scene_ids) removed += " " + id;
  return "\tVisual-only Baseline Avg ADE\tWith instruction Best ADE\tWith instruction Avg ADE\tWith instruction Worst ADE\n" +
         row("Mean (All)", r.all) + row(filtered_label(r.q), r.filtered) +
         "win rate (retained scenes): " + detail::fixed(r.win_rate) + "\n" +
         "win rate (all scenes): " + detail::fixed(r.win_rate_all) + "\n" +
         "removed scenes (" + std::to_string(r.removed_scene_ids.size()) + "):" + removed + "\n";
}

inline CommandOutput traj_eval(const TrajEvalConfig& cfg) {
  const auto table = io::read_trajectory_table(cfg.trajectories);
  const auto scenes = io::evaluate_scenes(table);
  const CohortReport report = instruction_stats(scenes, cfg.q);
  io::write_atomic(cfg.report, format_cohort_report(report, scenes, cfg.format));
  return {cohort_table(report), {}};
}

// ----------------------------------------------------------------- fixtures

inline CommandOutput fixtures(std::uint64_t seed, const io::FixtureSpec& spec, const fs::path& out) {
  io::generate_fixture(seed, spec, out);
  return {"wrote fixture corpus to " + out.string() + "\n", {}};
}

}  // namespace hazscreen::cmd
