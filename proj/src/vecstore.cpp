#include "sse/vecstore.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "sse/error.hpp"
#include "sse/kernels.hpp"

namespace sse {

namespace {

constexpr std::array<char, 4> kMagic = {'S', 'S', 'E', 'V'};
constexpr double kNormTolerance = 1e-4;

template <typename T>
void put_le(std::string& out, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  U bits;
  std::memcpy(&bits, &value, sizeof(T));
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((bits >> (8 * i)) & 0xffu));
  }
}

template <typename T>
T get_le(const unsigned char* p) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bits |= static_cast<U>(p[i]) << (8 * i);
  }
  T value;
  std::memcpy(&value, &bits, sizeof(T));
  return value;
}

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(std::size_t count, std::size_t dim,
                                 std::vector<float> data, bool normalized)
    : count_(count), dim_(dim), data_(std::move(data)), normalized_(normalized) {
  if (dim_ == 0) {
    throw Error(ErrorCode::invalid_argument, "embedding dim must be positive");
  }
  if (data_.size() != count_ * dim_) {
    throw Error(ErrorCode::invalid_argument,
                "embedding data holds " + std::to_string(data_.size()) +
                    " values, expected " + std::to_string(count_ * dim_));
  }
}

EmbeddingMatrix EmbeddingMatrix::gather(std::span<const std::size_t> rows) const {
  std::vector<float> out;
  out.reserve(rows.size() * dim_);
  for (std::size_t r : rows) {
    if (r >= count_) {
      throw Error(ErrorCode::dangling_row, "row " + std::to_string(r) +
                                               " out of range for " +
                                               std::to_string(count_) + " rows");
    }
    auto src = row(r);
    out.insert(out.end(), src.begin(), src.end());
  }
  return EmbeddingMatrix(rows.size(), dim_ == 0 ? 1 : dim_, std::move(out),
                         normalized_);
}

EmbeddingMatrix EmbeddingMatrix::concat(const EmbeddingMatrix& other) const {
  if (count_ == 0) return other;
  if (other.count_ == 0) return *this;
  if (dim_ != other.dim_) {
    throw Error(ErrorCode::dimension_mismatch,
                "cannot concatenate dim " + std::to_string(dim_) + " with dim " +
                    std::to_string(other.dim_));
  }
  std::vector<float> out = data_;
  out.insert(out.end(), other.data_.begin(), other.data_.end());
  return EmbeddingMatrix(count_ + other.count_, dim_, std::move(out),
                         normalized_ && other.normalized_);
}

void validate_rows(const EmbeddingMatrix& m, RowCheck check) {
  for (std::size_t i = 0; i < m.count(); ++i) {
    auto r = m.row(i);
    for (float x : r) {
      if (!std::isfinite(x)) {
        throw Error(ErrorCode::format,
                    "row " + std::to_string(i) + " contains a non-finite value");
      }
    }
    if (check == RowCheck::finite_only) continue;
    const double norm = l2_norm(r);
    if (norm == 0.0) {
      throw Error(ErrorCode::format, "row " + std::to_string(i) + " is a zero vector");
    }
    if (m.normalized() && std::abs(norm - 1.0) > kNormTolerance) {
      throw Error(ErrorCode::format, "row " + std::to_string(i) + " has norm " +
                                         std::to_string(norm) +
                                         " but the matrix is flagged normalized");
    }
  }
}

EmbeddingMatrix read_embeddings(const std::filesystem::path& path, RowCheck check) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::io, "cannot open embeddings file " + path.string());
  }
  const std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  if (bytes.size() < kSsevHeaderSize) {
    throw Error(ErrorCode::format, path.string() + ": truncated SSEV header");
  }
  if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw Error(ErrorCode::format, path.string() + ": bad magic, expected SSEV");
  }
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const auto version = get_le<std::uint32_t>(p + 4);
  const auto count = get_le<std::uint64_t>(p + 8);
  const auto dim = get_le<std::uint32_t>(p + 16);
  const auto flags = get_le<std::uint32_t>(p + 20);
  if (version != kSsevVersion) {
    throw Error(ErrorCode::format,
                path.string() + ": unsupported SSEV version " + std::to_string(version));
  }
  if (dim == 0) {
    throw Error(ErrorCode::format, path.string() + ": dim must be positive");
  }
  const std::size_t payload = bytes.size() - kSsevHeaderSize;
  const std::size_t row_bytes = std::size_t{dim} * sizeof(float);
  if (count > payload / row_bytes || payload != count * row_bytes) {
    throw Error(ErrorCode::format,
                path.string() + ": header declares " + std::to_string(count) + "x" +
                    std::to_string(dim) + " floats but payload has " +
                    std::to_string(payload) + " bytes");
  }
  std::vector<float> data(count * dim);
  const unsigned char* q = p + kSsevHeaderSize;
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = get_le<float>(q + 4 * i);
  }
  EmbeddingMatrix m(count, dim, std::move(data), (flags & kSsevFlagNormalized) != 0);
  validate_rows(m, check);
  return m;
}

void write_embeddings(const EmbeddingMatrix& m, const std::filesystem::path& path) {
  std::string out;
  out.reserve(kSsevHeaderSize + m.data().size() * sizeof(float));
  out.append(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, kSsevVersion);
  put_le<std::uint64_t>(out, m.count());
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.dim()));
  put_le<std::uint32_t>(out, m.normalized() ? kSsevFlagNormalized : 0u);
  for (float x : m.data()) put_le<float>(out, x);

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::io, "cannot write embeddings file " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw Error(ErrorCode::io, "write failed for " + path.string());
}

double dot(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return s;
}

double l2_norm(std::span<const float> v) { return std::sqrt(dot(v, v)); }

double cosine(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::dimension_mismatch,
                "cosine of vectors with dims " + std::to_string(a.size()) + " and " +
                    std::to_string(b.size()));
  }
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i], y = b[i];
    ab += x * y;
    aa += x * x;
    bb += y * y;
  }
  if (aa == 0.0 || bb == 0.0) {
    throw Error(ErrorCode::precondition, "cosine of a zero vector is undefined");
  }
  return std::clamp(ab / (std::sqrt(aa) * std::sqrt(bb)), -1.0, 1.0);
}

std::vector<float> normalize(std::span<const float> v) {
  const double norm = l2_norm(v);
  if (norm == 0.0) {
    throw Error(ErrorCode::precondition, "cannot normalize a zero vector");
  }
  std::vector<float> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = static_cast<float>(static_cast<double>(v[i]) / norm);
  }
  return out;
}

EmbeddingMatrix normalize(const EmbeddingMatrix& m) {
  std::vector<float> out;
  out.reserve(m.data().size());
  for (std::size_t i = 0; i < m.count(); ++i) {
    const double norm = l2_norm(m.row(i));
    if (norm == 0.0) {
      throw Error(ErrorCode::precondition,
                  "cannot normalize zero row " + std::to_string(i));
    }
    for (float x : m.row(i)) out.push_back(static_cast<float>(x / norm));
  }
  return EmbeddingMatrix(m.count(), m.dim(), std::move(out), true);
}

std::vector<double> pairwise_distances(std::span<const std::size_t> rows,
                                       const EmbeddingMatrix& m) {
  for (std::size_t r : rows) {
    if (r >= m.count()) {
      throw Error(ErrorCode::invalid_argument,
                  "row index " + std::to_string(r) + " out of range");
    }
  }
  return kernels::omp::pairwise_distances(rows, m);
}

}  // namespace sse
