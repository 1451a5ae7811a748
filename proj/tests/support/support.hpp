#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "sse/datamodel.hpp"
#include "sse/vecstore.hpp"

namespace sse::test {

using Rows = std::vector<std::vector<float>>;

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("sse-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::vector<float> unit(std::vector<float> v) {
  double n = 0.0;
  for (float x : v) n += static_cast<double>(x) * x;
  n = std::sqrt(n);
  for (float& x : v) x = static_cast<float>(x / n);
  return v;
}

inline std::vector<float> random_unit(std::mt19937_64& eng, std::size_t dim) {
  std::normal_distribution<double> nd;
  std::vector<float> v(dim);
  for (float& x : v) x = static_cast<float>(nd(eng));
  return unit(v);
}

inline Rows random_rows(std::mt19937_64& eng, std::size_t n, std::size_t dim) {
  Rows rows;
  for (std::size_t i = 0; i < n; ++i) rows.push_back(random_unit(eng, dim));
  return rows;
}

inline EmbeddingMatrix to_matrix(const Rows& rows, bool normalized = true) {
  const std::size_t dim = rows.empty() ? 1 : rows.front().size();
  std::vector<float> data;
  for (const auto& r : rows) data.insert(data.end(), r.begin(), r.end());
  return EmbeddingMatrix(rows.size(), dim, std::move(data), normalized);
}

inline std::string scene_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "sc%04zu", i);
  return buf;
}

// Dataset whose scene i has semantic row i and visual row i.
inline Dataset make_dataset(const Rows& semantic, const Rows& visual,
                            const std::string& prefix = "") {
  Dataset ds;
  ds.name = "test";
  const std::size_t n = std::max(semantic.size(), visual.size());
  for (std::size_t i = 0; i < n; ++i) {
    SceneRecord s;
    s.scene_id = prefix + scene_name(i);
    s.session_id = "session-" + std::to_string(i % 5);
    s.caption = "caption " + std::to_string(i);
    if (i < semantic.size()) s.semantic_row = i;
    if (i < visual.size()) s.visual_row = i;
    ds.scenes.push_back(std::move(s));
  }
  bind_embeddings(ds, semantic.empty() ? nullptr : std::make_shared<const EmbeddingMatrix>(to_matrix(semantic)),
       visual.empty() ? nullptr : std::make_shared<const EmbeddingMatrix>(to_matrix(visual)));
  return ds;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

}  // namespace sse::test
