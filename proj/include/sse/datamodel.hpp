#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "sse/vecstore.hpp"

namespace sse {

using Json = nlohmann::ordered_json;

// One curation unit: a driving timepoint with its caption and row handles
// into the semantic and visual embedding matrices.
struct SceneRecord {
  std::string scene_id;
  std::string session_id;
  std::string caption;
  std::optional<std::size_t> semantic_row;
  std::optional<std::size_t> visual_row;
  // Absent means unlabeled (pool scenes).
  std::optional<std::map<std::string, std::uint64_t>> labels;
  // Set to "pool" on scenes added by enrichment.
  std::optional<std::string> source;

  bool operator==(const SceneRecord&) const = default;
};

// Scenes in canonical order plus shared, immutable embedding matrices.
struct Dataset {
  std::string name;
  std::vector<SceneRecord> scenes;
  std::shared_ptr<const EmbeddingMatrix> semantic;
  std::shared_ptr<const EmbeddingMatrix> visual;

  std::size_t size() const noexcept { return scenes.size(); }

  std::span<const float> semantic_of(const SceneRecord& s) const {
    return semantic->row(*s.semantic_row);
  }
  std::span<const float> visual_of(const SceneRecord& s) const {
    return visual->row(*s.visual_row);
  }
};

// Parses a JSON-Lines manifest. Blank lines are skipped but still counted
// for error line numbers.
Dataset load_manifest(const std::filesystem::path& path);
Dataset parse_manifest(std::istream& in, const std::string& source_name = "<manifest>");
void save_manifest(const Dataset& ds, const std::filesystem::path& path);
std::string manifest_line(const SceneRecord& s);

// Attaches matrices and validates row references: every reference is in range
// and each matrix has exactly as many rows as scenes referencing it.
void bind_embeddings(Dataset& ds, std::shared_ptr<const EmbeddingMatrix> semantic,
          std::shared_ptr<const EmbeddingMatrix> visual);
void validate(const Dataset& ds);

// New dataset holding the scenes at `positions` (in the given order). Matrix
// rows are copied and row references renumbered to match.
Dataset subset(const Dataset& ds, std::span<const std::size_t> positions);

// a's scenes followed by b's, with matrices concatenated and b's row
// references shifted.
Dataset concat(const Dataset& a, const Dataset& b);

// Dataset directory layout written by `ingest`, `synth`, `select`, `enrich`:
//   manifest.jsonl, semantic.ssev, visual.ssev (each matrix optional),
//   dataset.json with the name and provenance.
void save_dataset_dir(const Dataset& ds, const std::filesystem::path& dir,
                      const Json& provenance = Json::object());
Dataset load_dataset_dir(const std::filesystem::path& dir);

// ---------------------------------------------------------------- reports

struct SelectionParams {
  std::uint32_t k = 300;
  double epsilon = 0.0;  // cosine-distance threshold, in [0, 2]
  std::uint64_t seed = 0;

  bool operator==(const SelectionParams&) const = default;
};

enum class Verdict { kept, pruned };

struct SelectionEntry {
  std::string scene_id;
  std::uint32_t cluster_id = 0;
  Verdict verdict = Verdict::kept;
  std::optional<std::string> keeper_scene_id;
  std::optional<double> visual_similarity;
  // Scene had no visual row and was kept without pruning.
  bool missing_visual = false;

  bool operator==(const SelectionEntry&) const = default;
};

struct SelectionReport {
  SelectionParams params;
  std::vector<SelectionEntry> entries;
  std::size_t total = 0;
  std::size_t kept = 0;
  std::size_t pruned = 0;
  Json provenance = Json::object();

  bool operator==(const SelectionReport&) const = default;
};

enum class AnchorPolicy { fixed, dynamic };
enum class AnchorOrigin { cluster, added };

struct AnchorRef {
  std::string anchor_id;
  AnchorOrigin origin = AnchorOrigin::cluster;

  bool operator==(const AnchorRef&) const = default;
};

struct Addition {
  std::size_t step = 0;
  std::string scene_id;
  std::string nearest_anchor_id;
  double semantic_distance = 0.0;

  bool operator==(const Addition&) const = default;
};

struct EnrichmentReport {
  std::size_t budget = 0;
  AnchorPolicy policy = AnchorPolicy::dynamic;
  std::vector<AnchorRef> initial_anchors;
  std::vector<Addition> additions;
  Json provenance = Json::object();

  bool operator==(const EnrichmentReport&) const = default;
};

std::string_view to_string(AnchorPolicy p);
AnchorPolicy parse_anchor_policy(std::string_view s);

void validate(const SelectionReport& r);
void validate(const EnrichmentReport& r);

Json to_json(const SelectionReport& r);
Json to_json(const EnrichmentReport& r);
SelectionReport selection_report_from_json(const Json& j);
EnrichmentReport enrichment_report_from_json(const Json& j);

// Validates, then writes a single JSON document (2-space indent, trailing
// newline).
void save_report(const SelectionReport& r, const std::filesystem::path& path);
void save_report(const EnrichmentReport& r, const std::filesystem::path& path);
SelectionReport load_selection_report(const std::filesystem::path& path);
EnrichmentReport load_enrichment_report(const std::filesystem::path& path);

// Shared by every writer so outputs are byte-stable.
void write_json_file(const Json& j, const std::filesystem::path& path);
Json read_json_file(const std::filesystem::path& path);

}  // namespace sse
