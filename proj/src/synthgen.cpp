#include "sse/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "sse/error.hpp"
#include "sse/rng.hpp"

namespace sse {

namespace {

constexpr double kMaxCenterCosine = 0.3;
constexpr std::size_t kCenterAttempts = 100000;

const char* const kClasses[] = {"car",        "truck",   "pedestrian", "bicycle",
                                "motorcycle", "bus",     "trailer",    "construction_vehicle",
                                "barrier",    "traffic_cone"};

std::vector<double> random_unit(rng::Engine& eng, std::size_t dim) {
  std::vector<double> v(dim);
  double norm = 0.0;
  while (norm == 0.0) {
    norm = 0.0;
    for (double& x : v) {
      x = rng::normal(eng);
      norm += x * x;
    }
  }
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<std::vector<double>> separated_centers(rng::Engine& eng, std::size_t count,
                                                   std::size_t dim) {
  std::vector<std::vector<double>> centers;
  std::size_t attempts = 0;
  while (centers.size() < count) {
    if (++attempts > kCenterAttempts * count) {
      throw Error(ErrorCode::invalid_argument,
                  "cannot place " + std::to_string(count) + " separated blob centers in dim " +
                      std::to_string(dim));
    }
    auto c = random_unit(eng, dim);
    bool ok = true;
    for (const auto& other : centers) {
      if (dot(c, other) >= kMaxCenterCosine) {
        ok = false;
        break;
      }
    }
    if (ok) centers.push_back(std::move(c));
  }
  return centers;
}

// Normalized float row of `base + sigma * N(0, I)`.
void noisy_row(rng::Engine& eng, const std::vector<double>& base, double sigma,
               std::vector<float>& out) {
  std::vector<double> v(base.size());
  double norm = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) {
    v[j] = base[j] + sigma * rng::normal(eng);
    norm += v[j] * v[j];
  }
  norm = std::sqrt(norm);
  if (norm == 0.0) {
    throw Error(ErrorCode::invariant, "generated a zero embedding row");
  }
  for (double x : v) out.push_back(static_cast<float>(x / norm));
}

std::string numbered(const std::string& prefix, std::size_t i, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%0*zu", width, i);
  return prefix + buf;
}

std::map<std::string, std::uint64_t> draw_labels(rng::Engine& eng, LabelProfile profile,
                                                 std::size_t blob) {
  std::map<std::string, std::uint64_t> labels;
  if (profile == LabelProfile::uniform) {
    labels["car"] = 1 + rng::uniform_index(eng, 5);
    return labels;
  }
  // Long tail: class j present with probability 0.9 * 0.55^j, a little more
  // likely inside its "home" blob so rare classes correlate with semantics.
  double p = 0.9;
  for (std::size_t j = 0; j < std::size(kClasses); ++j) {
    double pj = p;
    if (j % 8 == blob % 8 && j > 0) pj = std::min(1.0, 3.0 * pj);
    if (rng::uniform01(eng) < pj) labels[kClasses[j]] = 1 + rng::uniform_index(eng, 4);
    p *= 0.55;
  }
  return labels;
}

}  // namespace

LabelProfile parse_label_profile(std::string_view s) {
  if (s == "none") return LabelProfile::none;
  if (s == "uniform") return LabelProfile::uniform;
  if (s == "longtail") return LabelProfile::longtail;
  throw Error(ErrorCode::invalid_argument, "label profile must be none, uniform or longtail");
}

std::string_view to_string(LabelProfile p) {
  switch (p) {
    case LabelProfile::none: return "none";
    case LabelProfile::uniform: return "uniform";
    case LabelProfile::longtail: return "longtail";
  }
  return "none";
}

SynthOutput generate(const SynthSpec& spec) {
  if (spec.dim < 2) throw Error(ErrorCode::invalid_argument, "dim must be >= 2");
  if (spec.blobs == 0 || spec.per_blob == 0 || spec.sessions_per_blob == 0) {
    throw Error(ErrorCode::invalid_argument, "blob, point and session counts must be positive");
  }
  if (!(spec.sigma >= 0.0) || !(spec.visual_sigma >= 0.0)) {
    throw Error(ErrorCode::invalid_argument, "noise levels must be >= 0");
  }
  if (!(spec.visual_session_weight >= 0.0 && spec.visual_session_weight <= 1.0)) {
    throw Error(ErrorCode::invalid_argument, "visual_session_weight must be in [0, 1]");
  }
  if (spec.duplicate_pairs > spec.blobs * (spec.per_blob / 2)) {
    throw Error(ErrorCode::invalid_argument, "too many duplicate pairs for the blob sizes");
  }

  rng::Engine eng(spec.seed);
  const std::size_t n = spec.blobs * spec.per_blob;
  const std::size_t n_sessions = spec.blobs * spec.sessions_per_blob;

  const auto centers = separated_centers(eng, spec.blobs, spec.dim);
  std::vector<std::vector<double>> session_dirs, blob_visual;
  for (std::size_t s = 0; s < n_sessions; ++s) session_dirs.push_back(random_unit(eng, spec.dim));
  for (std::size_t b = 0; b < spec.blobs; ++b) blob_visual.push_back(random_unit(eng, spec.dim));

  std::vector<std::size_t> blob_of(n);
  {
    const auto perm = rng::permutation(n, eng());
    for (std::size_t i = 0; i < n; ++i) blob_of[perm[i]] = i / spec.per_blob;
  }

  SynthOutput out;
  auto& ds = out.dataset;
  ds.name = "synth-" + std::to_string(spec.seed);
  std::vector<float> semantic, visual;
  semantic.reserve(n * spec.dim);
  visual.reserve(n * spec.dim);
  const double w = spec.visual_session_weight;
  const int sid_width = static_cast<int>(std::to_string(n_sessions).size());

  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t b = blob_of[i];
    const std::size_t sess = rng::uniform_index(eng, n_sessions);
    SceneRecord s;
    s.scene_id = numbered(spec.id_prefix, i, 6);
    s.session_id = numbered(spec.id_prefix + "-session-", sess, sid_width);
    s.caption = "Synthetic scene " + s.scene_id + ": topic " + std::to_string(b) +
                ", recorded in " + s.session_id + ".";
    s.semantic_row = i;
    s.visual_row = i;
    noisy_row(eng, centers[b], spec.sigma, semantic);
    std::vector<double> vbase(spec.dim);
    for (std::size_t j = 0; j < spec.dim; ++j) {
      vbase[j] = w * session_dirs[sess][j] + (1.0 - w) * blob_visual[b][j];
    }
    noisy_row(eng, vbase, spec.visual_sigma, visual);
    ds.scenes.push_back(std::move(s));
    out.truth.scenes.push_back({ds.scenes.back().scene_id, b, ds.scenes.back().session_id, {}});
  }

  // Exact visual duplicates within one blob: the later scene copies the
  // earlier scene's visual row.
  std::vector<std::vector<std::size_t>> free_members(spec.blobs);
  for (std::size_t i = 0; i < n; ++i) free_members[blob_of[i]].push_back(i);
  for (std::size_t d = 0; d < spec.duplicate_pairs; ++d) {
    std::size_t b = rng::uniform_index(eng, spec.blobs);
    while (free_members[b].size() < 2) b = (b + 1) % spec.blobs;
    auto& pool = free_members[b];
    auto take = [&] {
      const std::size_t k = rng::uniform_index(eng, pool.size());
      const std::size_t idx = pool[k];
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(k));
      return idx;
    };
    std::size_t a = take(), c = take();
    if (c < a) std::swap(a, c);
    std::copy_n(visual.begin() + static_cast<std::ptrdiff_t>(a * spec.dim), spec.dim,
                visual.begin() + static_cast<std::ptrdiff_t>(c * spec.dim));
    out.truth.scenes[c].duplicate_of = ds.scenes[a].scene_id;
    out.truth.duplicate_pairs.emplace_back(ds.scenes[a].scene_id, ds.scenes[c].scene_id);
  }

  if (spec.labels != LabelProfile::none) {
    for (std::size_t i = 0; i < n; ++i) ds.scenes[i].labels = draw_labels(eng, spec.labels, blob_of[i]);
  }

  bind_embeddings(ds, std::make_shared<const EmbeddingMatrix>(n, spec.dim, std::move(semantic), true),
       std::make_shared<const EmbeddingMatrix>(n, spec.dim, std::move(visual), true));
  return out;
}

Json to_json(const GroundTruth& truth, const SynthSpec& spec) {
  Json j;
  j["spec"] = {{"blobs", spec.blobs},
               {"per_blob", spec.per_blob},
               {"dim", spec.dim},
               {"sigma", spec.sigma},
               {"sessions_per_blob", spec.sessions_per_blob},
               {"duplicate_pairs", spec.duplicate_pairs},
               {"labels", to_string(spec.labels)},
               {"seed", spec.seed},
               {"visual_session_weight", spec.visual_session_weight},
               {"visual_sigma", spec.visual_sigma},
               {"id_prefix", spec.id_prefix}};
  Json scenes = Json::array();
  for (const auto& s : truth.scenes) {
    Json x = {{"scene_id", s.scene_id}, {"blob", s.blob}, {"session_id", s.session_id}};
    if (s.duplicate_of) x["duplicate_of"] = *s.duplicate_of;
    scenes.push_back(std::move(x));
  }
  j["scenes"] = std::move(scenes);
  Json pairs = Json::array();
  for (const auto& [a, b] : truth.duplicate_pairs) pairs.push_back({a, b});
  j["duplicate_pairs"] = std::move(pairs);
  return j;
}

GroundTruth ground_truth_from_json(const Json& j) {
  GroundTruth t;
  try {
    for (const auto& x : j.at("scenes")) {
      SceneTruth s{x.at("scene_id"), x.at("blob"), x.at("session_id"), {}};
      if (x.contains("duplicate_of")) s.duplicate_of = x["duplicate_of"].get<std::string>();
      t.scenes.push_back(std::move(s));
    }
    for (const auto& p : j.at("duplicate_pairs")) t.duplicate_pairs.emplace_back(p.at(0), p.at(1));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::format, std::string("malformed ground truth: ") + e.what());
  }
  return t;
}

void write_synth(const SynthOutput& out, const SynthSpec& spec, const std::filesystem::path& dir) {
  Json prov;
  prov["generator"] = "synth";
  prov["spec"] = to_json(GroundTruth{}, spec)["spec"];
  save_dataset_dir(out.dataset, dir, prov);
  write_json_file(to_json(out.truth, spec), dir / "truth.json");
}

}  // namespace sse
