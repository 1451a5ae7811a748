#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace sse {

// Dense row-major float32 matrix of embedding rows.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::size_t count, std::size_t dim, std::vector<float> data,
                  bool normalized = false);

  std::size_t count() const noexcept { return count_; }
  std::size_t dim() const noexcept { return dim_; }
  bool normalized() const noexcept { return normalized_; }
  bool empty() const noexcept { return count_ == 0; }

  std::span<const float> row(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }
  std::span<const float> data() const noexcept { return data_; }

  // Copies the listed rows, in order, into a new matrix.
  EmbeddingMatrix gather(std::span<const std::size_t> rows) const;

  // Rows of `other` appended below these rows. Dimensions must agree unless
  // one side is empty.
  EmbeddingMatrix concat(const EmbeddingMatrix& other) const;

  bool operator==(const EmbeddingMatrix&) const = default;

 private:
  std::size_t count_ = 0;
  std::size_t dim_ = 0;
  std::vector<float> data_;
  bool normalized_ = false;
};

// SSEV on-disk layout (little-endian):
//   "SSEV" | u32 version=1 | u64 count | u32 dim | u32 flags | f32[count*dim]
// flags bit 0: rows are pre-normalized.
inline constexpr std::uint32_t kSsevVersion = 1;
inline constexpr std::uint32_t kSsevFlagNormalized = 1u;
inline constexpr std::size_t kSsevHeaderSize = 4 + 4 + 8 + 4 + 4;

enum class RowCheck {
  strict,       // finite, nonzero, unit norm when flagged normalized
  finite_only,  // centroid files: means may be arbitrarily short
};

EmbeddingMatrix read_embeddings(const std::filesystem::path& path,
                                RowCheck check = RowCheck::strict);
void write_embeddings(const EmbeddingMatrix& m, const std::filesystem::path& path);

// Validates rows (finite, nonzero) and the normalized flag. Used by the
// reader and by every provider boundary.
void validate_rows(const EmbeddingMatrix& m, RowCheck check = RowCheck::strict);

EmbeddingMatrix normalize(const EmbeddingMatrix& m);
std::vector<float> normalize(std::span<const float> v);

double dot(std::span<const float> a, std::span<const float> b);
double l2_norm(std::span<const float> v);

// a.b / (|a||b|) accumulated in double over a fixed index order, clamped
// to [-1, 1].
double cosine(std::span<const float> a, std::span<const float> b);

// Cosine distance 1 - cosine(a, b), in [0, 2].
inline double cosine_distance(std::span<const float> a, std::span<const float> b) {
  return 1.0 - cosine(a, b);
}

// Row-major n*n matrix of cosine distances between the listed rows.
std::vector<double> pairwise_distances(std::span<const std::size_t> rows,
                                       const EmbeddingMatrix& m);

}  // namespace sse
