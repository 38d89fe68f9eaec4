#pragma once

// Deterministic synthetic corpora. Every hazard video's own category channel
// and the general channel are raised by `separability` inside its active
// interval; everything else is pseudo-random noise in [-1, 1). Output is a
// pure function of (seed, spec).

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "hazscreen/calibration.hpp"
#include "hazscreen/error.hpp"
#include "hazscreen/io/annotation.hpp"
#include "hazscreen/io/embedding_file.hpp"
#include "hazscreen/io/files.hpp"
#include "hazscreen/io/json_util.hpp"
#include "hazscreen/io/prompts.hpp"
#include "hazscreen/io/score_table.hpp"

namespace hazscreen::io {

inline const std::vector<std::string> kHazardCategories = {
    "pedestrian", "animal", "airborne_falling", "low_visibility", "emergency_scene", "construction", "road_debris"};

enum class FixtureFormat { ScoreTables, Embeddings };

struct FixtureSpec {
  std::size_t videos = 4;
  std::size_t frames = 50;
  std::size_t categories = 1;   // taken from the front of kHazardCategories
  double separability = 5.0;    // margin offset inside active intervals
  std::size_t holdout = 0;      // trailing videos placed in the evaluation split
  FixtureFormat format = FixtureFormat::ScoreTables;
};

namespace detail {

// mt19937_64 output is fixed by the standard; the distributions are not, so
// uniforms are derived by hand.
class FixtureRng {
 public:
  explicit FixtureRng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double symmetric() { return 2.0 * uniform() - 1.0; }
  std::size_t below(std::size_t n) { return n == 0 ? 0 : static_cast<std::size_t>(engine_() % n); }

 private:
  std::mt19937_64 engine_;
};

inline std::string video_name(std::size_t i) {
  std::string digits = std::to_string(i);
  return "v" + std::string(digits.size() < 3 ? 3 - digits.size() : 0, '0') + digits;
}

}  // namespace detail

inline void validate(const FixtureSpec& spec) {
  if (spec.videos == 0) throw Error(ErrorCode::ValidationError, "fixture needs at least one video");
  if (spec.frames < 2) throw Error(ErrorCode::ValidationError, "fixture needs at least two frames per video");
  if (spec.categories == 0 || spec.categories > kHazardCategories.size()) {
    throw Error(ErrorCode::ValidationError, "fixture categories must lie in [1, " +
                                                std::to_string(kHazardCategories.size()) + "]");
  }
  const std::size_t hazard_videos = (spec.videos + 1) / 2;
  if (spec.categories > hazard_videos) {
    throw Error(ErrorCode::ValidationError, std::to_string(spec.categories) + " categories need at least " +
                                                std::to_string(2 * spec.categories - 1) + " videos");
  }
  if (!(spec.separability >= 0.0) || !std::isfinite(spec.separability)) {
    throw Error(ErrorCode::ValidationError, "separability must be finite and >= 0");
  }
  if (spec.holdout >= spec.videos) throw Error(ErrorCode::ValidationError, "holdout must leave a calibration video");
}

/// Writes manifest.json, prompts.json, annotations/ and scores/ (or emb/) under `root`.
inline void generate_fixture(std::uint64_t seed, const FixtureSpec& spec, const std::filesystem::path& root) {
  validate(spec);
  detail::FixtureRng rng(seed);

  std::vector<std::string> channels(kHazardCategories.begin(),
                                    kHazardCategories.begin() + static_cast<std::ptrdiff_t>(spec.categories));
  channels.push_back(kGeneralCategory);

  PromptSet prompts;
  std::vector<std::string> phrasings;
  for (const auto& c : channels) {
    PromptPair p{c, {"a " + c + " hazard ahead"}, {"a road with no " + c + " hazard"}, MarginAggregation::MaxMargin};
    phrasings.push_back(p.positive_phrasings[0]);
    phrasings.push_back(p.negative_phrasings[0]);
    prompts.pairs.push_back(std::move(p));
  }
  const float scale = 100.0f;
  const std::size_t dim = 2 * channels.size();
  if (spec.format == FixtureFormat::Embeddings) {
    // Phrasing 2j embeds as axis 2j, phrasing 2j+1 as axis 2j+1.
    EmbeddingMatrix text{static_cast<std::uint32_t>(phrasings.size()), static_cast<std::uint32_t>(dim), scale,
                         std::vector<float>(phrasings.size() * dim, 0.0f)};
    for (std::size_t i = 0; i < phrasings.size(); ++i) text.values[i * dim + i] = 1.0f;
    write_embedding_file(root / "text.hse", text);
    prompts.text_embeddings = TextEmbeddingRef{"text.hse", phrasings};
  }
  write_atomic(root / "prompts.json", format_prompt_set(prompts));

  Json videos = Json::array();
  std::size_t hazard_index = 0;
  for (std::size_t i = 0; i < spec.videos; ++i) {
    const std::string id = detail::video_name(i);
    HazardAnnotation a;
    a.video_id = id;
    a.frame_count = spec.frames;
    a.is_hazard_video = i % 2 == 0;
    if (a.is_hazard_video) {
      a.category = channels[hazard_index++ % spec.categories];
      const std::size_t quarter = std::max<std::size_t>(1, spec.frames / 4);
      const std::size_t length = std::min(spec.frames, quarter + rng.below(quarter + 1));
      const std::size_t start = rng.below(spec.frames - length + 1);
      const std::size_t lead = rng.below(std::min<std::size_t>(start, 5) + 1);
      a.active_interval = Interval{start, start + length - 1};
      a.visible_interval = Interval{start - lead, start + length - 1};
    }
    const auto truth = a.positive_frames();
    save_annotation(root / "annotations" / (id + ".json"), a);

    Json signals = Json::object();
    if (spec.format == FixtureFormat::ScoreTables) {
      std::vector<ScoreRow> rows;
      for (std::size_t f = 0; f < spec.frames; ++f) {
        for (const auto& c : channels) {
          double m = rng.symmetric();
          if (truth[f] && (c == kGeneralCategory || c == a.category)) m += spec.separability;
          const double negative = 20.0 + 2.0 * rng.uniform();
          rows.push_back({f, c, negative + m, negative});
        }
      }
      const std::string rel = "scores/" + id + ".csv";
      write_score_table(root / rel, rows);
      for (const auto& c : channels) signals[c] = rel;
    } else {
      EmbeddingMatrix frames{static_cast<std::uint32_t>(spec.frames), static_cast<std::uint32_t>(dim), scale,
                             std::vector<float>(spec.frames * dim)};
      for (std::size_t f = 0; f < spec.frames; ++f) {
        for (std::size_t j = 0; j < channels.size(); ++j) {
          double pos = 1.0 + 0.05 * rng.symmetric();
          const double neg = 1.0 + 0.05 * rng.symmetric();
          if (truth[f] && (channels[j] == kGeneralCategory || channels[j] == a.category)) pos += 0.1 * spec.separability;
          frames.values[f * dim + 2 * j] = static_cast<float>(pos);
          frames.values[f * dim + 2 * j + 1] = static_cast<float>(neg);
        }
      }
      const std::string rel = "emb/" + id + ".hse";
      write_embedding_file(root / rel, frames);
      for (const auto& c : channels) signals[c] = rel;
    }

    videos.push_back({{"video_id", id},
                      {"frame_count", spec.frames},
                      {"annotation", "annotations/" + id + ".json"},
                      {"signals", signals},
                      {"split", i + spec.holdout >= spec.videos ? "evaluation" : "calibration"},
                      {"nominal", !a.is_hazard_video}});
  }

  Json manifest;
  manifest["schema_version"] = 1;
  manifest["prompts"] = "prompts.json";
  manifest["videos"] = videos;
  write_atomic(root / "manifest.json", dump(manifest));
}

}  // namespace hazscreen::io
