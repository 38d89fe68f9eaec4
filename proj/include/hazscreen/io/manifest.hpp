#pragma once

// Corpus manifest (JSON). Paths are relative to the manifest's directory.
//
//   {"schema_version": 1,
//    "prompts": "prompts.json",
//    "videos": [{"video_id": "v000", "frame_count": 50,
//                "annotation": "annotations/v000.json",
//                "signals": {"animal": "scores/v000.csv", "hazard": "scores/v000.csv"},
//                "split": "calibration", "nominal": false}]}
//
// A signal path is either a score table or an HSE1 embedding file; embedding
// files are scored against the prompt set's text embeddings.

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
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
#include "hazscreen/io/text.hpp"
#include "hazscreen/parallel.hpp"

namespace hazscreen::io {

enum class Split { Calibration, Evaluation };

inline std::string split_name(Split s) { return s == Split::Calibration ? "calibration" : "evaluation"; }

struct ManifestEntry {
  std::string video_id;
  std::size_t frame_count = 0;
  std::filesystem::path annotation_path;
  std::map<std::string, std::filesystem::path> signal_paths;
  Split split = Split::Calibration;
  bool nominal = false;
};

struct CorpusManifest {
  std::filesystem::path source;
  std::optional<std::filesystem::path> prompts_path;
  std::vector<ManifestEntry> videos;  // ascending video_id

  const ManifestEntry* find(const std::string& id) const {
    auto it = std::lower_bound(videos.begin(), videos.end(), id,
                               [](const ManifestEntry& e, const std::string& key) { return e.video_id < key; });
    return it != videos.end() && it->video_id == id ? &*it : nullptr;
  }
};

inline CorpusManifest parse_manifest(const std::string& text, const std::string& source,
                                     const std::filesystem::path& base_dir) {
  const Json doc = parse_json(text, source);
  check_schema_version(doc, 1, source);
  CorpusManifest m;
  m.source = source;
  if (auto it = doc.find("prompts"); it != doc.end() && !it->is_null()) {
    m.prompts_path = base_dir / get_as<std::string>(*it, source + ".prompts");
  }
  const Json& videos = member(doc, "videos", source);
  if (!videos.is_array()) throw Error(ErrorCode::ParseError, source + ".videos: expected an array");

  std::set<std::string> ids;
  for (std::size_t i = 0; i < videos.size(); ++i) {
    const std::string where = source + ".videos[" + std::to_string(i) + "]";
    const Json& v = videos[i];
    ManifestEntry e;
    e.video_id = get_as<std::string>(member(v, "video_id", where), where + ".video_id");
    const Json& fc = member(v, "frame_count", where);
    if (!fc.is_number_unsigned() || fc.get<std::size_t>() < 1) {
      throw Error(ErrorCode::ParseError, where + ".frame_count: expected an integer >= 1");
    }
    e.frame_count = fc.get<std::size_t>();
    e.annotation_path = base_dir / get_as<std::string>(member(v, "annotation", where), where + ".annotation");
    const Json& signals = member(v, "signals", where);
    if (!signals.is_object()) throw Error(ErrorCode::ParseError, where + ".signals: expected an object");
    for (const auto& [category, path] : signals.items()) {
      e.signal_paths[category] = base_dir / get_as<std::string>(path, where + ".signals." + category);
    }
    const auto split = get_as<std::string>(member(v, "split", where), where + ".split");
    if (split == "calibration") {
      e.split = Split::Calibration;
    } else if (split == "evaluation") {
      e.split = Split::Evaluation;
    } else {
      throw Error(ErrorCode::ParseError, where + ".split: expected \"calibration\" or \"evaluation\"");
    }
    if (auto it = v.find("nominal"); it != v.end()) e.nominal = get_as<bool>(*it, where + ".nominal");

    if (!ids.insert(e.video_id).second) {
      throw Error(ErrorCode::DuplicateVideoId, source + ": duplicate video_id '" + e.video_id + "'");
    }
    m.videos.push_back(std::move(e));
  }
  std::sort(m.videos.begin(), m.videos.end(), [](const auto& a, const auto& b) { return a.video_id < b.video_id; });

  auto require = [&](const std::filesystem::path& p) {
    if (!std::filesystem::exists(p)) throw Error(ErrorCode::DanglingPath, source + ": missing file '" + p.string() + "'");
  };
  if (m.prompts_path) require(*m.prompts_path);
  for (const auto& e : m.videos) {
    require(e.annotation_path);
    for (const auto& [_, p] : e.signal_paths) require(p);
  }
  return m;
}

inline CorpusManifest load_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_text(path), path.string(), path.parent_path());
}

struct CorpusFilter {
  std::optional<Split> split;  // all videos when empty
};

namespace detail {

inline bool is_embedding_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  char magic[4] = {};
  in.read(magic, 4);
  return in.gcount() == 4 && std::string_view(magic, 4) == "HSE1";
}

inline VideoSignals load_video(const ManifestEntry& e, const PromptSet* prompts,
                               const std::map<std::string, EmbeddingVector>* text_embeddings) {
  VideoSignals v;
  v.nominal = e.nominal;
  v.annotation = load_annotations(e.annotation_path, e.frame_count);
  if (v.annotation.video_id != e.video_id) {
    throw Error(ErrorCode::ValidationError, e.annotation_path.string() + ": annotation is for video '" +
                                                v.annotation.video_id + "', manifest says '" + e.video_id + "'");
  }
  if (e.nominal && v.annotation.is_hazard_video) {
    throw Error(ErrorCode::ValidationError, "video '" + e.video_id + "' is marked nominal but annotated as hazardous");
  }

  std::map<std::filesystem::path, std::map<std::string, MarginSeries>> tables;
  for (const auto& [category, path] : e.signal_paths) {
    if (is_embedding_file(path)) {
      if (!prompts || !text_embeddings) {
        throw Error(ErrorCode::MissingPromptEmbedding,
                    "video '" + e.video_id + "' uses embeddings but no prompt set with text embeddings was given");
      }
      const PromptPair* pair = prompts->find(category);
      if (!pair) throw Error(ErrorCode::ValidationError, "category '" + category + "' is not in the prompt set");
      const EmbeddingMatrix frames = read_embedding_file(path);
      if (frames.rows != e.frame_count) {
        throw Error(ErrorCode::FrameCountMismatch, path.string() + ": " + std::to_string(frames.rows) +
                                                       " rows, manifest frame_count " + std::to_string(e.frame_count));
      }
      std::vector<EmbeddingVector> rows;
      rows.reserve(frames.rows);
      for (std::size_t i = 0; i < frames.rows; ++i) rows.push_back(frames.vector(i));
      v.channels.emplace(category, margin_signal(e.video_id, rows, *pair, *text_embeddings,
                                                 LogitScale(static_cast<double>(frames.logit_scale))));
    } else {
      auto it = tables.find(path);
      if (it == tables.end()) {
        const auto rows = read_score_table(path, e.frame_count);
        it = tables.emplace(path, score_table_margins(rows, e.video_id, e.frame_count, path.string())).first;
      }
      auto series = it->second.find(category);
      if (series == it->second.end()) {
        throw Error(ErrorCode::ValidationError, path.string() + ": no rows for category '" + category + "'");
      }
      v.channels.emplace(category, series->second);
    }
  }
  return v;
}

}  // namespace detail

/// Loads annotations and margin series of every selected video, ascending by
/// video_id. Per-video loading fans out over `jobs` threads.
inline std::vector<VideoSignals> load_corpus(const CorpusManifest& manifest, const PromptSet* prompts,
                                             const CorpusFilter& filter = {}, unsigned jobs = 1) {
  std::vector<const ManifestEntry*> selected;
  for (const auto& e : manifest.videos) {
    if (!filter.split || e.split == *filter.split) selected.push_back(&e);
  }

  std::optional<std::map<std::string, EmbeddingVector>> text;
  const bool needs_text = std::any_of(selected.begin(), selected.end(), [](const ManifestEntry* e) {
    return std::any_of(e->signal_paths.begin(), e->signal_paths.end(),
                       [](const auto& kv) { return detail::is_embedding_file(kv.second); });
  });
  if (needs_text && prompts && prompts->text_embeddings) text = load_text_embeddings(*prompts);

  std::vector<VideoSignals> out(selected.size());
  parallel_for(selected.size(), jobs, [&](std::size_t i) {
    out[i] = detail::load_video(*selected[i], prompts, text ? &*text : nullptr);
  });
  return out;
}

inline std::vector<HazardAnnotation> annotations_of(const std::vector<VideoSignals>& corpus) {
  std::vector<HazardAnnotation> out;
  out.reserve(corpus.size());
  for (const auto& v : corpus) out.push_back(v.annotation);
  return out;
}

/// Digest over annotations and margin values, in video_id order.
inline std::string corpus_digest(const std::vector<VideoSignals>& corpus) {
  Sha256 h;
  for (const auto& v : corpus) {
    const auto& a = v.annotation;
    std::string head = a.video_id + "|" + std::to_string(a.frame_count) + "|" + (a.is_hazard_video ? "1" : "0") + "|" +
                       a.category.value_or("") + "|" + (v.nominal ? "n" : "-");
    if (a.active_interval) head += "|" + std::to_string(a.active_interval->start) + "-" + std::to_string(a.active_interval->end);
    h.update(head + "\n");
    for (const auto& [category, series] : v.channels) {
      std::string line = category + ":";
      for (double m : series.margins()) line += format_number(m) + ",";
      h.update(line + "\n");
    }
  }
  return h.hex();
}

}  // namespace hazscreen::io
