#pragma once

// Hazard confidence signal: logit-scaled image/text similarity and the
// positive-minus-negative prompt margin computed per frame.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hazscreen/error.hpp"

namespace hazscreen {

inline constexpr double kDefaultLogitScale = 100.0;
inline constexpr double kZeroNormCutoff = 1e-12;

/// A dense model embedding. Always nonempty with finite components.
class EmbeddingVector {
 public:
  explicit EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw Error(ErrorCode::DimensionMismatch, "embedding must have dimension >= 1");
    for (double v : values_) {
      if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteValue, "embedding component is not finite");
    }
  }

  EmbeddingVector(std::initializer_list<double> values) : EmbeddingVector(std::vector<double>(values)) {}

  static EmbeddingVector from_floats(std::span<const float> values) {
    return EmbeddingVector(std::vector<double>(values.begin(), values.end()));
  }

  std::size_t dim() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }

  double norm() const noexcept {
    double sum = 0.0;
    for (double v : values_) sum += v * v;
    return std::sqrt(sum);
  }

  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;

 private:
  std::vector<double> values_;
};

/// Temperature multiplying normalized dot products.
class LogitScale {
 public:
  constexpr LogitScale() = default;
  explicit LogitScale(double scale) : scale_(scale) {
    if (!(scale > 0.0) || !std::isfinite(scale)) {
      throw Error(ErrorCode::NonPositiveScale, "logit scale must be finite and > 0");
    }
  }
  constexpr double value() const noexcept { return scale_; }

 private:
  double scale_ = kDefaultLogitScale;
};

enum class MarginAggregation { MaxMargin, MeanMargin };

struct PromptPair {
  std::string category;
  std::vector<std::string> positive_phrasings;
  std::vector<std::string> negative_phrasings;
  MarginAggregation aggregation = MarginAggregation::MaxMargin;
};

/// Per-video, per-category margin time series in logit-space units.
class MarginSeries {
 public:
  MarginSeries() = default;
  MarginSeries(std::string video_id, std::string category, std::vector<double> margins)
      : video_id_(std::move(video_id)), category_(std::move(category)), margins_(std::move(margins)) {
    for (double m : margins_) {
      if (!std::isfinite(m)) {
        throw Error(ErrorCode::NonFiniteValue, "margin series for video '" + video_id_ + "' has a non-finite value");
      }
    }
  }

  const std::string& video_id() const noexcept { return video_id_; }
  const std::string& category() const noexcept { return category_; }
  std::span<const double> margins() const noexcept { return margins_; }
  std::size_t frame_count() const noexcept { return margins_.size(); }
  double operator[](std::size_t frame) const { return margins_[frame]; }

  friend bool operator==(const MarginSeries&, const MarginSeries&) = default;

 private:
  std::string video_id_;
  std::string category_;
  std::vector<double> margins_;
};

inline EmbeddingVector l2_normalize(const EmbeddingVector& v) {
  const double n = v.norm();
  if (n < kZeroNormCutoff) throw Error(ErrorCode::ZeroVector, "cannot normalize a zero vector");
  std::vector<double> out(v.values().begin(), v.values().end());
  for (double& x : out) x /= n;
  return EmbeddingVector(std::move(out));
}

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

inline void require_same_dim(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "dimensions differ: " + std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
  }
}

// Score of two already-normalized embeddings.
inline double normalized_score(const EmbeddingVector& a, const EmbeddingVector& b, LogitScale s) {
  return s.value() * detail::dot(a.values(), b.values());
}

}  // namespace detail

/// Logit-scaled cosine similarity; symmetric in its embedding arguments.
inline double clip_score(const EmbeddingVector& img, const EmbeddingVector& txt, LogitScale s = LogitScale{}) {
  detail::require_same_dim(img, txt);
  return detail::normalized_score(l2_normalize(img), l2_normalize(txt), s);
}

constexpr double margin(double pos_score, double neg_score) noexcept { return pos_score - neg_score; }

/// Margin of every frame against a prompt pair. Each (positive, negative)
/// phrasing combination yields one margin; the pair's aggregation reduces
/// them to a single value per frame.
inline MarginSeries margin_signal(std::string video_id, std::span<const EmbeddingVector> frames,
                                  const PromptPair& pair,
                                  const std::map<std::string, EmbeddingVector>& prompt_embeddings,
                                  LogitScale s = LogitScale{}) {
  if (frames.empty()) throw Error(ErrorCode::EmptySignal, "no frames for video '" + video_id + "'");
  if (pair.positive_phrasings.empty() || pair.negative_phrasings.empty()) {
    throw Error(ErrorCode::ValidationError, "prompt pair '" + pair.category + "' needs positive and negative phrasings");
  }

  auto lookup = [&](const std::string& phrase) {
    auto it = prompt_embeddings.find(phrase);
    if (it == prompt_embeddings.end()) {
      throw Error(ErrorCode::MissingPromptEmbedding, "no embedding for phrasing \"" + phrase + "\"");
    }
    if (it->second.dim() != frames.front().dim()) {
      throw Error(ErrorCode::DimensionMismatch, "phrasing \"" + phrase + "\" has dimension " +
                                                    std::to_string(it->second.dim()) + ", frames have " +
                                                    std::to_string(frames.front().dim()));
    }
    return l2_normalize(it->second);
  };

  std::vector<EmbeddingVector> pos;
  std::vector<EmbeddingVector> neg;
  for (const auto& p : pair.positive_phrasings) pos.push_back(lookup(p));
  for (const auto& n : pair.negative_phrasings) neg.push_back(lookup(n));

  std::vector<double> pos_scores(pos.size());
  std::vector<double> neg_scores(neg.size());
  std::vector<double> margins;
  margins.reserve(frames.size());
  for (const auto& frame : frames) {
    if (frame.dim() != frames.front().dim()) {
      throw Error(ErrorCode::DimensionMismatch, "frames of video '" + video_id + "' differ in dimension");
    }
    const EmbeddingVector unit = l2_normalize(frame);
    for (std::size_t i = 0; i < pos.size(); ++i) pos_scores[i] = detail::normalized_score(unit, pos[i], s);
    for (std::size_t j = 0; j < neg.size(); ++j) neg_scores[j] = detail::normalized_score(unit, neg[j], s);

    double best = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (double ps : pos_scores) {
      for (double ns : neg_scores) {
        const double m = margin(ps, ns);
        best = std::max(best, m);
        sum += m;
      }
    }
    margins.push_back(pair.aggregation == MarginAggregation::MaxMargin
                          ? best
                          : sum / static_cast<double>(pos_scores.size() * neg_scores.size()));
  }
  return MarginSeries(std::move(video_id), pair.category, std::move(margins));
}

}  // namespace hazscreen
