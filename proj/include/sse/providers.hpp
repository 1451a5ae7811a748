#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "sse/datamodel.hpp"
#include "sse/vecstore.hpp"

namespace sse {

// Rows of an SSEV file bound to texts by position. Queries are looked up in
// an optional JSON sidecar: {"<query text>": [floats], ...}.
struct FileBackend {
  std::filesystem::path path;
  std::optional<std::filesystem::path> query_path;
};

// POST {base_url}/embed  {"model": ..., "texts": [...]}  ->  {"embeddings": [[...]]}
struct HttpBackend {
  std::string base_url;
  std::string model;
  double timeout_s = 30.0;
  std::size_t max_batch = 64;
  std::size_t retries = 2;
  std::size_t max_in_flight = 4;
};

struct ProviderConfig {
  std::variant<FileBackend, HttpBackend> backend;

  void validate() const;
  // {"kind": "file", "path": ..., "query_path": ...} or
  // {"kind": "http", "base_url": ..., "model": ..., "timeout_s": ..., "max_batch": ..., "retries": ...}
  static ProviderConfig from_json(const Json& j);
  static ProviderConfig load(const std::filesystem::path& path);
};

// One unit-normalized row per text, in input order.
EmbeddingMatrix embed_texts(const ProviderConfig& cfg, std::span<const std::string> texts);

// Single unit-normalized vector for a retrieval query.
std::vector<float> embed_query(const ProviderConfig& cfg, const std::string& query);

}  // namespace sse
