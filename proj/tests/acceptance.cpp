// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hazscreen/commands.hpp"
#include "hazscreen/io/embedding_file.hpp"
#include "hazscreen/io/fixture.hpp"
#include "hazscreen/io/manifest.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace hazscreen;
using test_support::TempDir;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

struct Criterion {
  std::string name;
  double time_limit_s;  // 0 means no limit
  std::function<Outcome()> run;
};

class Checker {
 public:
  void expect(bool cond, const std::string& what) {
    ++checks_;
    if (!cond && failures_.size() < 5) failures_.push_back(what);
    if (!cond) ++failed_;
  }
  Outcome outcome(const std::string& summary) const {
    Outcome o{failed_ == 0, summary + ", " + std::to_string(checks_) + " checks"};
    if (failed_) {
      o.detail += ", " + std::to_string(failed_) + " failed:";
      for (const auto& f : failures_) o.detail += " [" + f + "]";
    }
    return o;
  }

 private:
  std::size_t checks_ = 0;
  std::size_t failed_ = 0;
  std::vector<std::string> failures_;
};

std::string num(double v) { return io::format_number(v); }

// ---------------------------------------------------------------------------

Outcome formula_oracle() {
  struct Row {
    double p, n, g;
  };
  const std::vector<Row> rows{
      {0.589, 0.556, 0.572}, {0.370, 0.828, 0.538}, {0.532, 0.874, 0.657}, {0.256, 0.951, 0.473},
      {0.667, 0.988, 0.765}, {0.037, 0.949, 0.318}, {0.381, 0.989, 0.563}, {0.230, 0.898, 0.451},
      {0.554, 0.643, 0.596}, {0.605, 0.539, 0.571}, {0.532, 0.654, 0.589},
  };
  Checker c;
  double worst = 0.0;
  for (const auto& r : rows) {
    const double g = global_tiou(r.p, r.n);
    worst = std::max(worst, std::abs(g - r.g));
    c.expect(std::abs(g - r.g) <= 0.0015, "(" + num(r.p) + ", " + num(r.n) + ") -> " + num(g) + ", expected " + num(r.g));
  }
  return c.outcome(std::to_string(rows.size()) + " reference rows, max deviation " + num(worst));
}

Outcome sweep_equivalence() {
  std::mt19937_64 rng(20240601);
  Checker c;
  for (int i = 0; i < 50; ++i) {
    const auto corpus = oracle::random_corpus(rng, 10, 100);
    const auto fast = sweep_threshold(corpus.series, corpus.gts);
    const auto slow = oracle::brute_force_sweep(corpus, 0.001);
    c.expect(fast.threshold == slow.threshold, "corpus " + std::to_string(i) + ": threshold " + num(fast.threshold) +
                                                   " vs oracle " + num(slow.threshold));
    c.expect(fast.report.global_tiou == slow.global, "corpus " + std::to_string(i) + ": global differs");
    c.expect(fast.report.positive_tiou == slow.positive && fast.report.negative_tiou == slow.negative,
             "corpus " + std::to_string(i) + ": components differ");
  }
  return c.outcome("50 random corpora, step 0.001");
}

Outcome shift_property() {
  std::mt19937_64 rng(99);
  Checker c;
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const auto base = oracle::random_corpus(rng, 10, 100);
    const auto ref = sweep_threshold(base.series, base.gts);
    double lo = INFINITY;
    for (const auto& s : base.series) lo = std::min(lo, *std::min_element(s.margins().begin(), s.margins().end()));
    const double ref_k = std::round((ref.threshold - lo) / 0.001);
    for (double shift : {-3.7, 0.0, 12.25}) {
      const auto moved = oracle::shifted(base, shift);
      const auto got = sweep_threshold(moved.series, moved.gts);
      const std::string tag = "corpus " + std::to_string(i) + " shift " + num(shift);
      // Same grid index, so the threshold moves by c up to one rounding of the addition.
      const double k = std::round((got.threshold - (lo + shift)) / 0.001);
      c.expect(k == ref_k, tag + ": grid index " + num(k) + " vs " + num(ref_k));
      const double err = std::abs(got.threshold - (ref.threshold + shift));
      worst = std::max(worst, err);
      c.expect(err <= 1e-9, tag + ": threshold moved by " + num(got.threshold - ref.threshold));
      c.expect(got.report == ref.report, tag + ": report differs");
    }
  }
  return c.outcome("20 corpora x 3 shifts, max threshold rounding " + num(worst));
}

Outcome fusion_inclusion() {
  std::mt19937_64 rng(4242);
  Checker c;
  std::uniform_int_distribution<std::size_t> ncat(1, 7);
  std::uniform_int_distribution<std::size_t> nframes(1, 120);
  std::bernoulli_distribution coin(0.5);
  std::size_t banks = 0;
  for (int corpus = 0; corpus < 100; ++corpus) {
    std::map<FusionPolicy, MaskSet> masks;
    std::vector<HazardAnnotation> gts;
    for (int v = 0; v < 12; ++v) {
      auto bank = oracle::random_bank(rng, ncat(rng), nframes(rng));
      bank.video_id = "v" + std::to_string(v);
      ++banks;
      const auto cat = fuse(bank, FusionPolicy::CategoriesOnly);
      const auto gen = fuse(bank, FusionPolicy::CategoriesPlusGeneral);
      const auto dual = fuse(bank, FusionPolicy::HazardGated);
      bool ok = true;
      for (std::size_t f = 0; f < cat.frame_count(); ++f) {
        ok = ok && (!dual.flags[f] || gen.flags[f]) && (!cat.flags[f] || gen.flags[f]) && (!dual.flags[f] || cat.flags[f]);
      }
      c.expect(ok, "bank " + std::to_string(banks) + ": per-frame inclusion violated");
      masks[FusionPolicy::CategoriesOnly].emplace(bank.video_id, cat);
      masks[FusionPolicy::CategoriesPlusGeneral].emplace(bank.video_id, gen);
      masks[FusionPolicy::HazardGated].emplace(bank.video_id, dual);
      HazardAnnotation a{bank.video_id, cat.frame_count(), v == 0 || (v != 1 && coin(rng)), std::nullopt, std::nullopt,
                         Interval{0, cat.frame_count() - 1}};
      if (!a.is_hazard_video) a.active_interval.reset();
      gts.push_back(a);
    }
    const double tpr_dual = video_tpr(masks[FusionPolicy::HazardGated], gts);
    const double tpr_cat = video_tpr(masks[FusionPolicy::CategoriesOnly], gts);
    const double tpr_gen = video_tpr(masks[FusionPolicy::CategoriesPlusGeneral], gts);
    const double tnr_dual = video_tnr(masks[FusionPolicy::HazardGated], gts);
    const double tnr_cat = video_tnr(masks[FusionPolicy::CategoriesOnly], gts);
    const double tnr_gen = video_tnr(masks[FusionPolicy::CategoriesPlusGeneral], gts);
    const std::string tag = "corpus " + std::to_string(corpus);
    c.expect(tpr_dual <= tpr_cat && tpr_cat <= tpr_gen, tag + ": Video-TPR ordering");
    c.expect(tnr_dual >= tnr_cat && tnr_cat >= tnr_gen, tag + ": Video-TNR ordering");
  }
  return c.outcome(std::to_string(banks) + " banks in 100 corpora");
}

Outcome metric_ground_cases() {
  TempDir dir;
  io::generate_fixture(7, {8, 50, 2, 5.0}, dir.path());
  const auto manifest = io::load_manifest(dir / "manifest.json");
  std::vector<HazardAnnotation> gts;
  for (const auto& e : manifest.videos) gts.push_back(io::load_annotations(e.annotation_path, e.frame_count));

  MaskSet perfect;
  MaskSet empty;
  for (const auto& g : gts) {
    perfect.emplace(g.video_id, FrameMask{g.video_id, g.positive_frames()});
    empty.emplace(g.video_id, FrameMask{g.video_id, std::vector<bool>(g.frame_count, false)});
  }
  Checker c;
  const auto p = evaluate_screening(perfect, gts);
  c.expect(p.tiou.global_tiou == 1.0, "perfect global " + num(p.tiou.global_tiou));
  c.expect(p.tiou.positive_tiou == 1.0, "perfect positive");
  c.expect(p.tiou.negative_tiou == 1.0, "perfect negative");
  c.expect(p.video_tpr == 1.0, "perfect Video-TPR");
  c.expect(p.video_tnr == 1.0, "perfect Video-TNR");
  const auto e = evaluate_screening(empty, gts);
  c.expect(e.tiou.positive_tiou == 0.0, "empty positive " + num(e.tiou.positive_tiou));
  c.expect(e.video_tpr == 0.0, "empty Video-TPR");
  c.expect(e.video_tnr == 1.0, "empty Video-TNR");
  return c.outcome(std::to_string(gts.size()) + "-video fixture");
}

Outcome ade_suite() {
  Checker c;
  std::mt19937_64 rng(17);
  const Trajectory gt({{0.5, 0, 0}, {1.0, 1, 2}, {1.5, 3, 1}, {2.0, 4, 4}});
  c.expect(ade(gt, gt) == 0.0, "identity");
  c.expect(ade(gt.translated(3, 4), gt) == 5.0, "uniform (3,4) offset gives " + num(ade(gt.translated(3, 4), gt)));
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    std::uniform_int_distribution<std::size_t> len(1, 40);
    const std::size_t n = len(rng);
    const auto a = oracle::random_trajectory(rng, n);
    const auto b = oracle::random_trajectory(rng, n);
    const double got = ade(a, b);
    worst = std::max(worst, std::abs(got - oracle::ade_loop(a, b)));
    c.expect(std::abs(got - oracle::ade_loop(a, b)) <= 1e-9, "pair " + std::to_string(i) + ": loop oracle");
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    const double dx = u(rng);
    const double dy = u(rng);
    c.expect(std::abs(ade(a.translated(dx, dy), b.translated(dx, dy)) - got) <= 1e-9,
             "pair " + std::to_string(i) + ": translation changed ADE");
  }
  return c.outcome("100 random pairs, max oracle deviation " + num(worst));
}

SceneEvaluation random_scene(std::mt19937_64& rng, const std::string& id) {
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::uniform_int_distribution<int> count(1, 6);
  SceneEvaluation s{id, u(rng), {}};
  const int n = count(rng);
  for (int i = 0; i < n; ++i) s.instruction_evals.push_back({"i" + std::to_string(i), u(rng)});
  return s;
}

Outcome q_filter_suite() {
  Checker c;
  std::vector<ScoredScene> forty;
  for (int i = 1; i <= 40; ++i) forty.push_back({"s" + std::to_string(100 + i), static_cast<double>(i) * 0.25});
  std::mt19937_64 shuffle_rng(3);
  std::shuffle(forty.begin(), forty.end(), shuffle_rng);
  const auto cut = percentile_filter(forty, 97.5);
  c.expect(cut.removed == std::vector<std::string>{"s140"}, "N=40 q=97.5 must remove exactly the maximum");
  c.expect(cut.cutoff == 39 * 0.25, "N=40 cutoff " + num(cut.cutoff));
  c.expect(percentile_filter(forty, 100.0).removed.empty(), "q=100 removes nothing");
  c.expect(percentile_filter(forty, 50.0).removed.size() == 20, "q=50 removes the upper half");
  // ties at the cutoff stay
  std::vector<ScoredScene> tied{{"a", 1.0}, {"b", 2.0}, {"c", 2.0}, {"d", 2.0}};
  c.expect(percentile_filter(tied, 50.0).removed.empty(), "ties with the cutoff are kept");

  std::mt19937_64 rng(8);
  for (int k = 0; k < 100; ++k) {
    std::uniform_int_distribution<int> sizes(1, 60);
    std::vector<SceneEvaluation> scenes;
    const int n = sizes(rng);
    for (int i = 0; i < n; ++i) scenes.push_back(random_scene(rng, "sc" + std::to_string(1000 + i)));
    const double q = k % 2 ? 97.5 : std::uniform_real_distribution<double>(1.0, 100.0)(rng);
    const auto r = instruction_stats(scenes, q);
    const std::string tag = "cohort " + std::to_string(k);

    // paired removal: one set, derived from baseline, applied to every condition
    std::vector<ScoredScene> base;
    for (const auto& s : scenes) base.push_back({s.scene_id, s.baseline_ade});
    c.expect(r.removed_scene_ids == percentile_filter(base, q).removed, tag + ": removed set");
    const std::set<std::string> removed(r.removed_scene_ids.begin(), r.removed_scene_ids.end());
    double sb = 0, sbest = 0, savg = 0, sworst = 0;
    std::size_t kept = 0;
    for (const auto& s : scenes) {
      if (removed.count(s.scene_id)) continue;
      double best = INFINITY, worst = -INFINITY, avg = 0;
      for (const auto& e : s.instruction_evals) {
        best = std::min(best, e.ade);
        worst = std::max(worst, e.ade);
        avg += e.ade;
      }
      avg /= static_cast<double>(s.instruction_evals.size());
      sb += s.baseline_ade;
      sbest += best;
      savg += avg;
      sworst += worst;
      ++kept;
    }
    c.expect(kept == r.retained_scene_ids.size() && kept + removed.size() == scenes.size(), tag + ": partition");
    const double kn = static_cast<double>(kept);
    c.expect(std::abs(r.filtered.baseline - sb / kn) <= 1e-9 && std::abs(r.filtered.best - sbest / kn) <= 1e-9 &&
                 std::abs(r.filtered.avg - savg / kn) <= 1e-9 && std::abs(r.filtered.worst - sworst / kn) <= 1e-9,
             tag + ": filtered means not over the same retained scenes");
    for (const auto* m : {&r.all, &r.filtered}) {
      c.expect(m->best <= m->avg + 1e-12 && m->avg <= m->worst + 1e-12, tag + ": best <= avg <= worst");
    }
  }
  return c.outcome("hand cases + 100 random cohorts");
}

Outcome format_robustness() {
  Checker c;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  std::size_t mutations = 0;
  std::size_t typed = 0;
  std::size_t crashes = 0;
  std::size_t unrecognized_scale = 0;
  for (auto [rows, cols] : {std::pair{1u, 1u}, std::pair{3u, 4u}, std::pair{17u, 9u}}) {
    io::EmbeddingMatrix m{rows, cols, 100.0f, {}};
    for (std::uint32_t i = 0; i < rows * cols; ++i) m.values.push_back(u(rng));
    const auto bytes = io::serialize_embeddings(m);

    // write -> read -> write
    const auto again = io::serialize_embeddings(io::parse_embeddings(bytes));
    c.expect(again == bytes, std::to_string(rows) + "x" + std::to_string(cols) + " round trip not byte-identical");
    c.expect(io::parse_embeddings(bytes) == m, "round trip values differ");

    for (std::size_t pos = 0; pos < io::kEmbeddingHeaderSize; ++pos) {
      for (int v = 0; v < 256; ++v) {
        if (std::byte(v) == bytes[pos]) continue;
        auto mutated = bytes;
        mutated[pos] = std::byte(v);
        if (pos >= 16) {
          // Scale bytes: only corruptions that leave no valid positive scale
          // belong to the fuzz set; any other float is a well-formed header.
          float scale;
          std::memcpy(&scale, mutated.data() + 16, 4);
          if (scale > 0.0f && std::isfinite(scale)) {
            ++unrecognized_scale;
            continue;
          }
        }
        ++mutations;
        try {
          io::parse_embeddings(mutated);
          c.expect(false, "silent accept at byte " + std::to_string(pos) + " value " + std::to_string(v));
        } catch (const Error&) {
          ++typed;
        } catch (...) {
          ++crashes;
          c.expect(false, "untyped failure at byte " + std::to_string(pos));
        }
      }
    }
  }
  c.expect(mutations >= 1000, "fuzz set has only " + std::to_string(mutations) + " mutations");
  c.expect(typed == mutations && crashes == 0, "typed " + std::to_string(typed) + " of " + std::to_string(mutations));
  return c.outcome(std::to_string(mutations) + " header mutations, " + std::to_string(typed) + " typed errors, " +
                   std::to_string(crashes) + " crashes; " + std::to_string(unrecognized_scale) +
                   " scale rewrites to another valid positive float left out");
}

struct PipelineOutput {
  std::string profile;
  std::string segments;
  std::string report;
  double global = 0.0;
};

PipelineOutput pipeline(const std::filesystem::path& root, const io::FixtureSpec& spec, FusionPolicy policy,
                        unsigned jobs) {
  cmd::fixtures(7, spec, root / "corpus");
  cmd::CalibrateConfig cal;
  cal.manifest = root / "corpus/manifest.json";
  cal.out = root / "profile.json";
  cal.jobs = jobs;
  cmd::calibrate(cal);
  cmd::ScreenConfig scr;
  scr.manifest = cal.manifest;
  scr.profile = cal.out;
  scr.policy = policy;
  scr.out = root / "segments.csv";
  scr.jobs = jobs;
  cmd::screen(scr);
  cmd::EvaluateConfig ev;
  ev.manifest = cal.manifest;
  ev.segments = scr.out;
  ev.report = root / "report.json";
  ev.jobs = jobs;
  cmd::evaluate(ev);
  PipelineOutput out{test_support::slurp(cal.out), test_support::slurp(scr.out), test_support::slurp(ev.report)};
  out.global = io::parse_json(out.report, "report")["global_tiou"].get<double>();
  return out;
}

Outcome end_to_end() {
  Checker c;
  TempDir dir;
  const io::FixtureSpec spec{};  // 4 videos x 50 frames, separability 5.0
  const auto first = pipeline(dir / "a", spec, FusionPolicy::HazardGated, 1);
  const auto second = pipeline(dir / "b", spec, FusionPolicy::HazardGated, 4);
  c.expect(test_support::tree(dir / "a/corpus") == test_support::tree(dir / "b/corpus"), "fixture trees differ");
  c.expect(first.profile == second.profile, "profiles differ");
  c.expect(first.segments == second.segments, "segments differ");
  c.expect(first.report == second.report, "reports differ");

  std::string globals;
  for (auto policy : {FusionPolicy::CategoriesOnly, FusionPolicy::CategoriesPlusGeneral, FusionPolicy::HazardGated}) {
    const auto r = pipeline(dir / std::string(to_string(policy)), spec, policy, 2);
    c.expect(r.global >= 0.95, std::string(to_string(policy)) + " global tIoU " + num(r.global));
    globals += std::string(globals.empty() ? "" : ", ") + std::string(to_string(policy)) + " " + cmd::detail::fixed(r.global);
  }
  return c.outcome("seed 7 twice byte-identical; separability 5.0 global tIoU: " + globals);
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"global tIoU formula matches reference values", 1.0, formula_oracle},
      {"calibration sweep equals brute-force grid oracle", 30.0, sweep_equivalence},
      {"calibration shift property", 0.0, shift_property},
      {"fusion inclusion and Video-TPR/TNR ordering", 10.0, fusion_inclusion},
      {"metric ground cases", 0.0, metric_ground_cases},
      {"ADE suite", 0.0, ade_suite},
      {"percentile filter suite", 0.0, q_filter_suite},
      {"embedding file format robustness", 0.0, format_robustness},
      {"end-to-end determinism and separable fixture", 0.0, end_to_end},
  };

  std::size_t failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.time_limit_s > 0 && secs >= c.time_limit_s) {
      o.ok = false;
      o.detail += ", exceeded " + num(c.time_limit_s) + " s";
    }
    if (!o.ok) ++failed;
    char timing[32];
    std::snprintf(timing, sizeof timing, "%.3f s", secs);
    std::printf("%s  %s (%s; %s)\n", o.ok ? "PASS" : "FAIL", c.name.c_str(), o.detail.c_str(), timing);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
