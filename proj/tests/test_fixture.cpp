#include <gtest/gtest.h>

#include "hazscreen/io/fixture.hpp"
#include "hazscreen/io/manifest.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace hazscreen;
using namespace hazscreen::io;
using test_support::TempDir;

namespace {

std::vector<VideoSignals> load_fixture(const TempDir& dir) {
  const auto manifest = load_manifest(dir / "manifest.json");
  const auto prompts = load_prompt_set(*manifest.prompts_path);
  return load_corpus(manifest, &prompts);
}

std::pair<std::vector<MarginSeries>, std::vector<HazardAnnotation>> category_view(
    const std::vector<VideoSignals>& corpus, const std::string& category) {
  std::pair<std::vector<MarginSeries>, std::vector<HazardAnnotation>> out;
  for (const auto& v : corpus) {
    if (v.annotation.is_hazard_video && v.annotation.category != category && category != kGeneralCategory) continue;
    out.first.push_back(v.channels.at(category));
    out.second.push_back(v.annotation);
  }
  return out;
}

}  // namespace

TEST(Fixture, SameSeedSameBytes) {
  TempDir a, b, c;
  generate_fixture(7, {}, a.path());
  generate_fixture(7, {}, b.path());
  generate_fixture(8, {}, c.path());
  EXPECT_EQ(test_support::tree(a.path()), test_support::tree(b.path()));
  EXPECT_NE(test_support::tree(a.path()), test_support::tree(c.path()));
}

TEST(Fixture, SeparableCorpusCalibratesWell) {
  TempDir dir;
  generate_fixture(7, {4, 50, 1, 5.0}, dir.path());
  const auto corpus = load_fixture(dir);
  ASSERT_EQ(corpus.size(), 4u);
  const std::vector<std::string> cats{"pedestrian", kGeneralCategory};
  const auto profile = tune_categories(corpus, cats);
  for (const auto& [c, e] : profile.entries) EXPECT_GE(e.report.global_tiou, 0.95) << c;
}

TEST(Fixture, InseparableCorpusMatchesBruteForce) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    TempDir dir;
    generate_fixture(seed, {6, 30, 1, 0.0}, dir.path());
    const auto corpus = load_fixture(dir);
    for (const std::string c : {"pedestrian", "hazard"}) {
      const auto [series, gts] = category_view(corpus, c);
      const auto fast = sweep_threshold(series, gts);
      const auto slow = oracle::brute_force_sweep(oracle::Corpus{series, gts}, 0.001);
      EXPECT_EQ(fast.threshold, slow.threshold) << "seed " << seed << " " << c;
      EXPECT_EQ(fast.report.global_tiou, slow.global);
    }
  }
}

TEST(Fixture, EmbeddingFormatProducesSameShape) {
  TempDir dir;
  FixtureSpec spec{4, 20, 2, 5.0, 1, FixtureFormat::Embeddings};
  generate_fixture(11, spec, dir.path());
  EXPECT_TRUE(std::filesystem::exists(dir / "text.hse"));
  const auto manifest = load_manifest(dir / "manifest.json");
  const auto prompts = load_prompt_set(*manifest.prompts_path);
  const auto cal = load_corpus(manifest, &prompts, {Split::Calibration});
  const auto ev = load_corpus(manifest, &prompts, {Split::Evaluation});
  EXPECT_EQ(cal.size(), 3u);
  ASSERT_EQ(ev.size(), 1u);
  for (const auto& v : cal) {
    EXPECT_EQ(v.channels.size(), 3u);
    for (const auto& [_, s] : v.channels) EXPECT_EQ(s.frame_count(), 20u);
  }
  const std::vector<std::string> cats{"pedestrian", "animal", kGeneralCategory};
  const auto profile = tune_categories(cal, cats);
  EXPECT_GE(profile.entries.at(kGeneralCategory).report.global_tiou, 0.9);
}

TEST(Fixture, RejectsBadSpecs) {
  TempDir dir;
  for (const FixtureSpec& s : {FixtureSpec{0}, FixtureSpec{4, 1}, FixtureSpec{4, 50, 3}, FixtureSpec{4, 50, 0},
                               FixtureSpec{4, 50, 1, -1.0}, FixtureSpec{4, 50, 1, 5.0, 4}}) {
    EXPECT_THROW(generate_fixture(1, s, dir.path()), Error);
  }
}
