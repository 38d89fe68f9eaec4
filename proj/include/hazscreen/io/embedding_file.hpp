#pragma once

// Binary embedding file, little-endian throughout:
//
//   offset  size  field
//   0       4     magic "HSE1"
//   4       4     version (uint32) = 1
//   8       4     row count n (uint32)
//   12      4     dimension d (uint32)
//   16      4     logit scale (float32, > 0)
//   20      4*n*d payload (float32, row-major, one row per frame)

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hazscreen/error.hpp"
#include "hazscreen/io/files.hpp"
#include "hazscreen/signal.hpp"

namespace hazscreen::io {

inline constexpr std::uint32_t kEmbeddingFileVersion = 1;
inline constexpr std::size_t kEmbeddingHeaderSize = 20;

struct EmbeddingMatrix {
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  float logit_scale = static_cast<float>(kDefaultLogitScale);
  std::vector<float> values;  // rows * cols, row-major

  std::span<const float> row(std::size_t i) const { return std::span<const float>(values).subspan(i * cols, cols); }
  EmbeddingVector vector(std::size_t i) const { return EmbeddingVector::from_floats(row(i)); }
  friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;
};

namespace detail {

inline std::uint32_t load_u32(std::span<const std::byte> b, std::size_t off) {
  return static_cast<std::uint32_t>(b[off]) | (static_cast<std::uint32_t>(b[off + 1]) << 8) |
         (static_cast<std::uint32_t>(b[off + 2]) << 16) | (static_cast<std::uint32_t>(b[off + 3]) << 24);
}

inline void store_u32(std::vector<std::byte>& out, std::uint32_t v) {
  for (int s = 0; s < 32; s += 8) out.push_back(static_cast<std::byte>((v >> s) & 0xFF));
}

}  // namespace detail

inline std::vector<std::byte> serialize_embeddings(const EmbeddingMatrix& m) {
  if (m.values.size() != static_cast<std::size_t>(m.rows) * m.cols) {
    throw Error(ErrorCode::DimensionMismatch, "matrix holds " + std::to_string(m.values.size()) + " values, expected " +
                                                  std::to_string(static_cast<std::size_t>(m.rows) * m.cols));
  }
  if (!(m.logit_scale > 0.0f) || !std::isfinite(m.logit_scale)) {
    throw Error(ErrorCode::NonPositiveScale, "logit scale must be finite and > 0");
  }
  std::vector<std::byte> out;
  out.reserve(kEmbeddingHeaderSize + 4 * m.values.size());
  for (char c : {'H', 'S', 'E', '1'}) out.push_back(static_cast<std::byte>(c));
  detail::store_u32(out, kEmbeddingFileVersion);
  detail::store_u32(out, m.rows);
  detail::store_u32(out, m.cols);
  detail::store_u32(out, std::bit_cast<std::uint32_t>(m.logit_scale));
  for (float v : m.values) detail::store_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

/// Parses an in-memory embedding file. Every structural defect maps to a
/// typed error; the payload must match the header's n * d exactly.
inline EmbeddingMatrix parse_embeddings(std::span<const std::byte> bytes) {
  if (bytes.size() < 4 || bytes[0] != std::byte{'H'} || bytes[1] != std::byte{'S'} || bytes[2] != std::byte{'E'} ||
      bytes[3] != std::byte{'1'}) {
    throw Error(ErrorCode::BadMagic, "not an HSE1 embedding file");
  }
  if (bytes.size() < kEmbeddingHeaderSize) {
    throw Error(ErrorCode::TruncatedPayload, "header needs " + std::to_string(kEmbeddingHeaderSize) + " bytes, got " +
                                                 std::to_string(bytes.size()));
  }
  const std::uint32_t version = detail::load_u32(bytes, 4);
  if (version != kEmbeddingFileVersion) {
    throw Error(ErrorCode::UnsupportedVersion, "embedding file version " + std::to_string(version));
  }
  EmbeddingMatrix m;
  m.rows = detail::load_u32(bytes, 8);
  m.cols = detail::load_u32(bytes, 12);
  m.logit_scale = std::bit_cast<float>(detail::load_u32(bytes, 16));
  if (m.rows == 0 || m.cols == 0) {
    throw Error(ErrorCode::DimensionMismatch, "embedding file declares " + std::to_string(m.rows) + " x " +
                                                  std::to_string(m.cols) + " values");
  }
  if (!(m.logit_scale > 0.0f) || !std::isfinite(m.logit_scale)) {
    throw Error(ErrorCode::NonPositiveScale, "logit scale " + std::to_string(m.logit_scale));
  }
  const std::uint64_t expected = 4ull * m.rows * m.cols;
  const std::uint64_t actual = bytes.size() - kEmbeddingHeaderSize;
  if (expected != actual) {
    throw Error(ErrorCode::TruncatedPayload,
                "payload expected " + std::to_string(expected) + " bytes, found " + std::to_string(actual));
  }
  m.values.resize(static_cast<std::size_t>(m.rows) * m.cols);
  for (std::size_t i = 0; i < m.values.size(); ++i) {
    m.values[i] = std::bit_cast<float>(detail::load_u32(bytes, kEmbeddingHeaderSize + 4 * i));
    if (!std::isfinite(m.values[i])) {
      throw Error(ErrorCode::NonFiniteValue, "payload value " + std::to_string(i) + " is not finite");
    }
  }
  return m;
}

inline EmbeddingMatrix read_embedding_file(const std::filesystem::path& path) {
  try {
    return parse_embeddings(read_bytes(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::IoError) throw;
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

inline void write_embedding_file(const std::filesystem::path& path, const EmbeddingMatrix& m) {
  write_atomic(path, serialize_embeddings(m));
}

}  // namespace hazscreen::io
