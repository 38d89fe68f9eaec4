#pragma once

// Prompt set file (JSON):
//
//   {"schema_version": 1,
//    "categories": [{"id": "construction",
//                    "positive": ["road work ahead"],
//                    "negative": ["a road with nothing unusual"],
//                    "aggregation": "max"}],
//    "text_embeddings": {"file": "text.hse", "phrasings": ["road work ahead", ...]}}
//
// "text_embeddings" is needed only when a corpus ships frame embeddings; row i
// of the file embeds phrasings[i]. Its path is relative to the prompt file.

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hazscreen/error.hpp"
#include "hazscreen/io/embedding_file.hpp"
#include "hazscreen/io/files.hpp"
#include "hazscreen/io/json_util.hpp"
#include "hazscreen/signal.hpp"

namespace hazscreen::io {

struct TextEmbeddingRef {
  std::filesystem::path file;
  std::vector<std::string> phrasings;
};

struct PromptSet {
  std::vector<PromptPair> pairs;
  std::optional<TextEmbeddingRef> text_embeddings;

  const PromptPair* find(const std::string& category) const {
    for (const auto& p : pairs) {
      if (p.category == category) return &p;
    }
    return nullptr;
  }

  std::vector<std::string> categories() const {
    std::vector<std::string> out;
    for (const auto& p : pairs) out.push_back(p.category);
    return out;
  }
};

inline std::string aggregation_name(MarginAggregation a) { return a == MarginAggregation::MaxMargin ? "max" : "mean"; }

namespace detail {

inline Json categories_json(const PromptSet& set) {
  Json cats = Json::array();
  for (const auto& p : set.pairs) {
    cats.push_back({{"id", p.category},
                    {"positive", p.positive_phrasings},
                    {"negative", p.negative_phrasings},
                    {"aggregation", aggregation_name(p.aggregation)}});
  }
  return cats;
}

}  // namespace detail

inline PromptSet parse_prompt_set(const std::string& text, const std::string& source,
                                  const std::filesystem::path& base_dir = {}) {
  const Json doc = parse_json(text, source);
  check_schema_version(doc, 1, source);
  const Json& cats = member(doc, "categories", source);
  if (!cats.is_array() || cats.empty()) throw Error(ErrorCode::ParseError, source + ".categories: expected a nonempty array");

  PromptSet set;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < cats.size(); ++i) {
    const std::string where = source + ".categories[" + std::to_string(i) + "]";
    PromptPair p;
    p.category = get_as<std::string>(member(cats[i], "id", where), where + ".id");
    p.positive_phrasings = get_as<std::vector<std::string>>(member(cats[i], "positive", where), where + ".positive");
    p.negative_phrasings = get_as<std::vector<std::string>>(member(cats[i], "negative", where), where + ".negative");
    if (p.positive_phrasings.empty() || p.negative_phrasings.empty()) {
      throw Error(ErrorCode::ValidationError, where + ": positive and negative phrasings must be nonempty");
    }
    if (auto it = cats[i].find("aggregation"); it != cats[i].end()) {
      const auto name = get_as<std::string>(*it, where + ".aggregation");
      if (name == "max") {
        p.aggregation = MarginAggregation::MaxMargin;
      } else if (name == "mean") {
        p.aggregation = MarginAggregation::MeanMargin;
      } else {
        throw Error(ErrorCode::ParseError, where + ".aggregation: expected \"max\" or \"mean\"");
      }
    }
    if (!ids.insert(p.category).second) {
      throw Error(ErrorCode::ValidationError, where + ": duplicate category '" + p.category + "'");
    }
    set.pairs.push_back(std::move(p));
  }

  if (auto it = doc.find("text_embeddings"); it != doc.end() && !it->is_null()) {
    const std::string where = source + ".text_embeddings";
    TextEmbeddingRef ref;
    ref.file = base_dir / get_as<std::string>(member(*it, "file", where), where + ".file");
    ref.phrasings = get_as<std::vector<std::string>>(member(*it, "phrasings", where), where + ".phrasings");
    set.text_embeddings = std::move(ref);
  }
  return set;
}

inline PromptSet load_prompt_set(const std::filesystem::path& path) {
  return parse_prompt_set(read_text(path), path.string(), path.parent_path());
}

inline std::string format_prompt_set(const PromptSet& set, const std::string& text_embedding_file = {}) {
  Json doc;
  doc["schema_version"] = 1;
  doc["categories"] = detail::categories_json(set);
  if (set.text_embeddings) {
    doc["text_embeddings"] = {{"file", text_embedding_file.empty() ? set.text_embeddings->file.string() : text_embedding_file},
                              {"phrasings", set.text_embeddings->phrasings}};
  }
  return dump(doc);
}

/// Digest of the categories and phrasings; independent of embedding storage.
inline std::string prompt_set_digest(const PromptSet& set) {
  return Sha256().update(detail::categories_json(set).dump()).hex();
}

/// Loads the text embedding file and keys its rows by phrasing.
inline std::map<std::string, EmbeddingVector> load_text_embeddings(const PromptSet& set) {
  if (!set.text_embeddings) {
    throw Error(ErrorCode::MissingPromptEmbedding, "prompt set has no text_embeddings section");
  }
  const EmbeddingMatrix m = read_embedding_file(set.text_embeddings->file);
  const auto& names = set.text_embeddings->phrasings;
  if (names.size() != m.rows) {
    throw Error(ErrorCode::DimensionMismatch, set.text_embeddings->file.string() + ": " + std::to_string(m.rows) +
                                                  " rows for " + std::to_string(names.size()) + " phrasings");
  }
  std::map<std::string, EmbeddingVector> out;
  for (std::size_t i = 0; i < names.size(); ++i) out.insert_or_assign(names[i], m.vector(i));
  return out;
}

}  // namespace hazscreen::io
