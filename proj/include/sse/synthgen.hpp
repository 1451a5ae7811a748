#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sse/datamodel.hpp"

namespace sse {

enum class LabelProfile { none, uniform, longtail };

LabelProfile parse_label_profile(std::string_view s);
std::string_view to_string(LabelProfile p);

struct SynthSpec {
  std::size_t blobs = 8;
  std::size_t per_blob = 250;
  std::size_t dim = 32;
  double sigma = 0.05;                 // per-coordinate semantic noise
  std::size_t sessions_per_blob = 4;   // total sessions = blobs * sessions_per_blob
  std::size_t duplicate_pairs = 0;     // exact visual duplicates, same blob
  LabelProfile labels = LabelProfile::longtail;
  std::uint64_t seed = 0;
  // Visual row = normalize(w * session_dir + (1 - w) * blob_visual_dir + noise).
  double visual_session_weight = 0.8;
  double visual_sigma = 0.05;
  std::string id_prefix = "s";
};

struct SceneTruth {
  std::string scene_id;
  std::size_t blob;
  std::string session_id;
  std::optional<std::string> duplicate_of;
};

struct GroundTruth {
  std::vector<SceneTruth> scenes;
  std::vector<std::pair<std::string, std::string>> duplicate_pairs;
};

struct SynthOutput {
  Dataset dataset;
  GroundTruth truth;
};

// Planted-structure dataset: semantic rows are noisy copies of well-separated
// blob centers; sessions are drawn independently of blobs and drive the visual
// rows. Single PRNG stream, so a seed fixes every output byte.
SynthOutput generate(const SynthSpec& spec);

Json to_json(const GroundTruth& truth, const SynthSpec& spec);
GroundTruth ground_truth_from_json(const Json& j);

// Dataset directory plus truth.json.
void write_synth(const SynthOutput& out, const SynthSpec& spec, const std::filesystem::path& dir);

}  // namespace sse
