// hazscreen: calibrate, screen and evaluate hazard signals; report trajectory ADE.
//
// Exit status: 0 success, 2 input or validation error, 3 corpus cannot
// support the request, 4 I/O failure.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "hazscreen/commands.hpp"
#include "hazscreen/error.hpp"
#include "hazscreen/parallel.hpp"

namespace {

using hazscreen::cmd::ReportFormat;
namespace io = hazscreen::io;

void emit(const hazscreen::cmd::CommandOutput& out) {
  for (const auto& w : out.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << out.stdout_text;
}

std::optional<io::Split> parse_split(const std::string& s) {
  if (s == "calibration") return io::Split::Calibration;
  if (s == "evaluation") return io::Split::Evaluation;
  return std::nullopt;
}

ReportFormat parse_format(const std::string& s) { return s == "csv" ? ReportFormat::Csv : ReportFormat::Json; }

int fail(const std::string& code, int status, const std::string& message) {
  std::cerr << "error: code=" << code << " exit=" << status << " message=" << io::Json(message).dump() << "\n";
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hazscreen: open-vocabulary hazard screening and trajectory evaluation"};
  app.require_subcommand(1);
  unsigned jobs = hazscreen::default_jobs();
  app.add_option("--jobs", jobs, "Worker threads for per-video loading")->check(CLI::PositiveNumber);

  const std::vector<std::string> splits{"calibration", "evaluation", "all"};
  const std::vector<std::string> formats{"json", "csv"};

  // calibrate
  hazscreen::cmd::CalibrateConfig cal;
  std::string cal_category;
  bool cal_all = false;
  bool cal_no_nominal = false;
  auto* calibrate = app.add_subcommand("calibrate", "Tune per-category thresholds on the calibration split");
  calibrate->add_option("--manifest", cal.manifest, "Corpus manifest")->required()->check(CLI::ExistingFile);
  calibrate->add_option("--prompts", cal.prompts, "Prompt set (defaults to the manifest's)")->check(CLI::ExistingFile);
  calibrate->add_option("--step", cal.step, "Sweep step in margin units")->capture_default_str();
  calibrate->add_option("--out", cal.out, "Profile to write")->required();
  auto* cat_opt = calibrate->add_option("--category", cal_category, "Tune a single category");
  calibrate->add_flag("--all", cal_all, "Tune every prompt-set category (default)")->excludes(cat_opt);
  calibrate->add_option("--created-at", cal.created_at, "Timestamp recorded in the profile")->capture_default_str();
  calibrate->add_flag("--no-nominal", cal_no_nominal, "Leave nominal clips out of every sweep");

  // screen
  hazscreen::cmd::ScreenConfig scr;
  std::string scr_policy;
  std::string scr_split = "all";
  auto* screen = app.add_subcommand("screen", "Apply a profile and write alert segments");
  screen->add_option("--manifest", scr.manifest, "Corpus manifest")->required()->check(CLI::ExistingFile);
  screen->add_option("--profile", scr.profile, "Calibration profile")->required()->check(CLI::ExistingFile);
  screen->add_option("--policy", scr_policy, "Fusion policy")->required()->check(
      CLI::IsMember({"categories", "with-general", "dual"}));
  screen->add_option("--out", scr.out, "Segments file to write")->required();
  screen->add_option("--prompts", scr.prompts, "Prompt set (defaults to the manifest's)")->check(CLI::ExistingFile);
  screen->add_option("--split", scr_split, "Videos to screen")->check(CLI::IsMember(splits))->capture_default_str();
  screen->add_option("--min-frames", scr.min_frames, "Drop segments shorter than this")->capture_default_str();
  screen->add_flag("--retune", scr.retune, "Tune fresh thresholds on the screened videos");

  // evaluate
  hazscreen::cmd::EvaluateConfig ev;
  std::string ev_split = "all";
  std::string ev_format = "json";
  auto* evaluate = app.add_subcommand("evaluate", "Score alert segments against annotations");
  evaluate->add_option("--segments", ev.segments, "Segments file")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--manifest", ev.manifest, "Corpus manifest")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--report", ev.report, "Report to write")->required();
  evaluate->add_option("--format", ev_format, "Report format")->check(CLI::IsMember(formats))->capture_default_str();
  evaluate->add_option("--split", ev_split, "Videos to evaluate")->check(CLI::IsMember(splits))->capture_default_str();

  // traj-eval
  hazscreen::cmd::TrajEvalConfig tr;
  std::string tr_format = "json";
  auto* traj = app.add_subcommand("traj-eval", "Instruction-level ADE report with percentile filtering");
  traj->add_option("--trajectories", tr.trajectories, "Trajectory table")->required()->check(CLI::ExistingFile);
  traj->add_option("--q", tr.q, "Upper percentile kept")->capture_default_str();
  traj->add_option("--report", tr.report, "Report to write")->required();
  traj->add_option("--format", tr_format, "Report format")->check(CLI::IsMember(formats))->capture_default_str();

  // fixtures
  std::uint64_t seed = 0;
  io::FixtureSpec spec;
  std::filesystem::path fixture_out;
  std::string fixture_format = "scores";
  auto* fixtures = app.add_subcommand("fixtures", "Generate a deterministic synthetic corpus");
  fixtures->add_option("--seed", seed, "RNG seed")->required();
  fixtures->add_option("--out", fixture_out, "Output directory")->required();
  fixtures->add_option("--videos", spec.videos, "Number of videos")->capture_default_str();
  fixtures->add_option("--frames", spec.frames, "Frames per video")->capture_default_str();
  fixtures->add_option("--categories", spec.categories, "Hazard categories used")->capture_default_str();
  fixtures->add_option("--separability", spec.separability, "Margin offset inside active intervals")->capture_default_str();
  fixtures->add_option("--holdout", spec.holdout, "Trailing videos in the evaluation split")->capture_default_str();
  fixtures->add_option("--format", fixture_format, "Signal files")->check(CLI::IsMember({"scores", "embeddings"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("UsageError", 2, e.what());
  }

  try {
    if (*calibrate) {
      cal.jobs = jobs;
      cal.include_nominal = !cal_no_nominal;
      if (!cal_category.empty()) cal.category = cal_category;
      emit(hazscreen::cmd::calibrate(cal));
    } else if (*screen) {
      scr.jobs = jobs;
      scr.policy = *hazscreen::parse_policy(scr_policy);
      scr.split = parse_split(scr_split);
      emit(hazscreen::cmd::screen(scr));
    } else if (*evaluate) {
      ev.jobs = jobs;
      ev.split = parse_split(ev_split);
      ev.format = parse_format(ev_format);
      emit(hazscreen::cmd::evaluate(ev));
    } else if (*traj) {
      tr.format = parse_format(tr_format);
      emit(hazscreen::cmd::traj_eval(tr));
    } else if (*fixtures) {
      spec.format = fixture_format == "embeddings" ? io::FixtureFormat::Embeddings : io::FixtureFormat::ScoreTables;
      emit(hazscreen::cmd::fixtures(seed, spec, fixture_out));
    }
  } catch (const hazscreen::Error& e) {
    return fail(std::string(hazscreen::to_string(e.code())), hazscreen::exit_code(e.code()), e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail("IoError", 4, e.what());
  } catch (const std::exception& e) {
    return fail("InternalError", 2, e.what());
  }
  return 0;
}
