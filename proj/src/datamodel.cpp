#include "sse/datamodel.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "sse/error.hpp"

namespace sse {

namespace fs = std::filesystem;

namespace {

const std::set<std::string, std::less<>> kManifestFields = {
    "scene_id", "session_id", "caption", "semantic_row", "visual_row", "labels", "source"};

[[noreturn]] void line_error(const std::string& source, std::size_t line,
                             const std::string& what) {
  throw Error(ErrorCode::parse, source + ":" + std::to_string(line) + ": " + what);
}

std::optional<std::size_t> row_field(const Json& obj, const char* key,
                                     const std::string& source, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_number_unsigned()) {
    line_error(source, line, std::string(key) + " must be a non-negative integer");
  }
  return it->get<std::size_t>();
}

SceneRecord scene_from_json(const Json& obj, const std::string& source, std::size_t line) {
  if (!obj.is_object()) line_error(source, line, "expected a JSON object");
  for (const auto& [key, _] : obj.items()) {
    if (!kManifestFields.contains(key)) line_error(source, line, "unknown field '" + key + "'");
  }
  SceneRecord s;
  auto req_string = [&](const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_string() || it->get<std::string>().empty()) {
      line_error(source, line, std::string(key) + " must be a non-empty string");
    }
    return it->get<std::string>();
  };
  s.scene_id = req_string("scene_id");
  s.session_id = req_string("session_id");
  if (auto it = obj.find("caption"); it != obj.end()) {
    if (!it->is_string()) line_error(source, line, "caption must be a string");
    s.caption = it->get<std::string>();
  }
  s.semantic_row = row_field(obj, "semantic_row", source, line);
  s.visual_row = row_field(obj, "visual_row", source, line);
  if (auto it = obj.find("labels"); it != obj.end() && !it->is_null()) {
    if (!it->is_object()) line_error(source, line, "labels must be an object");
    std::map<std::string, std::uint64_t> labels;
    for (const auto& [cls, count] : it->items()) {
      if (!count.is_number_unsigned()) {
        line_error(source, line, "label count for '" + cls + "' must be a non-negative integer");
      }
      labels[cls] = count.get<std::uint64_t>();
    }
    s.labels = std::move(labels);
  }
  if (auto it = obj.find("source"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) line_error(source, line, "source must be a string");
    s.source = it->get<std::string>();
  }
  return s;
}

Json scene_to_json(const SceneRecord& s) {
  Json j;
  j["scene_id"] = s.scene_id;
  j["session_id"] = s.session_id;
  j["caption"] = s.caption;
  if (s.semantic_row) j["semantic_row"] = *s.semantic_row;
  if (s.visual_row) j["visual_row"] = *s.visual_row;
  if (s.labels) {
    Json labels = Json::object();
    for (const auto& [cls, count] : *s.labels) labels[cls] = count;
    j["labels"] = std::move(labels);
  }
  if (s.source) j["source"] = *s.source;
  return j;
}

void check_rows(const Dataset& ds, const EmbeddingMatrix* m,
                std::optional<std::size_t> SceneRecord::*field, const char* what) {
  std::size_t referencing = 0;
  for (const auto& s : ds.scenes) {
    const auto& row = s.*field;
    if (!row) continue;
    ++referencing;
    if (m == nullptr) {
      throw Error(ErrorCode::dangling_row, "scene '" + s.scene_id + "' references " + what +
                                               " row " + std::to_string(*row) +
                                               " but no " + what + " matrix is bound");
    }
    if (*row >= m->count()) {
      throw Error(ErrorCode::dangling_row,
                  "scene '" + s.scene_id + "' references " + what + " row " +
                      std::to_string(*row) + " but the matrix has " +
                      std::to_string(m->count()) + " rows");
    }
  }
  if (m != nullptr && referencing != m->count()) {
    throw Error(ErrorCode::dangling_row, std::string(what) + " matrix has " +
                                             std::to_string(m->count()) + " rows but " +
                                             std::to_string(referencing) +
                                             " scenes reference it");
  }
}

std::shared_ptr<const EmbeddingMatrix> gather_rows(
    const Dataset& ds, const std::shared_ptr<const EmbeddingMatrix>& m,
    std::span<const std::size_t> positions, std::optional<std::size_t> SceneRecord::*field,
    std::vector<SceneRecord>& out) {
  if (!m) return nullptr;
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    auto& ref = out[i].*field;
    if (!ref) continue;
    rows.push_back(*(ds.scenes[positions[i]].*field));
    ref = rows.size() - 1;
  }
  return std::make_shared<const EmbeddingMatrix>(m->gather(rows));
}

std::string_view verdict_name(Verdict v) { return v == Verdict::kept ? "KEPT" : "PRUNED"; }

std::string_view origin_name(AnchorOrigin o) {
  return o == AnchorOrigin::cluster ? "CLUSTER" : "ADDED";
}

}  // namespace

Dataset parse_manifest(std::istream& in, const std::string& source_name) {
  Dataset ds;
  std::unordered_set<std::string> seen;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json obj;
    try {
      obj = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      line_error(source_name, line, std::string("malformed JSON: ") + e.what());
    }
    SceneRecord s = scene_from_json(obj, source_name, line);
    if (!seen.insert(s.scene_id).second) {
      throw Error(ErrorCode::duplicate_id, source_name + ":" + std::to_string(line) +
                                               ": duplicate scene_id '" + s.scene_id + "'");
    }
    ds.scenes.push_back(std::move(s));
  }
  return ds;
}

Dataset load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open manifest " + path.string());
  Dataset ds = parse_manifest(in, path.string());
  ds.name = path.stem().string();
  return ds;
}

std::string manifest_line(const SceneRecord& s) { return scene_to_json(s).dump(); }

void save_manifest(const Dataset& ds, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot write manifest " + path.string());
  for (const auto& s : ds.scenes) out << manifest_line(s) << '\n';
  if (!out) throw Error(ErrorCode::io, "write failed for " + path.string());
}

void validate(const Dataset& ds) {
  std::unordered_set<std::string_view> seen;
  for (const auto& s : ds.scenes) {
    if (s.scene_id.empty() || s.session_id.empty()) {
      throw Error(ErrorCode::invariant, "scene_id and session_id must be non-empty");
    }
    if (!seen.insert(s.scene_id).second) {
      throw Error(ErrorCode::duplicate_id, "duplicate scene_id '" + s.scene_id + "'");
    }
  }
  check_rows(ds, ds.semantic.get(), &SceneRecord::semantic_row, "semantic");
  check_rows(ds, ds.visual.get(), &SceneRecord::visual_row, "visual");
}

void bind_embeddings(Dataset& ds, std::shared_ptr<const EmbeddingMatrix> semantic,
          std::shared_ptr<const EmbeddingMatrix> visual) {
  ds.semantic = std::move(semantic);
  ds.visual = std::move(visual);
  validate(ds);
}

Dataset subset(const Dataset& ds, std::span<const std::size_t> positions) {
  Dataset out;
  out.name = ds.name;
  out.scenes.reserve(positions.size());
  for (std::size_t p : positions) {
    if (p >= ds.scenes.size()) {
      throw Error(ErrorCode::invalid_argument, "scene position " + std::to_string(p) +
                                                   " out of range");
    }
    out.scenes.push_back(ds.scenes[p]);
  }
  out.semantic = gather_rows(ds, ds.semantic, positions, &SceneRecord::semantic_row, out.scenes);
  out.visual = gather_rows(ds, ds.visual, positions, &SceneRecord::visual_row, out.scenes);
  return out;
}

Dataset concat(const Dataset& a, const Dataset& b) {
  Dataset out;
  out.name = a.name;
  out.scenes = a.scenes;
  const std::size_t sem_shift = a.semantic ? a.semantic->count() : 0;
  const std::size_t vis_shift = a.visual ? a.visual->count() : 0;
  for (SceneRecord s : b.scenes) {
    if (s.semantic_row) *s.semantic_row += sem_shift;
    if (s.visual_row) *s.visual_row += vis_shift;
    out.scenes.push_back(std::move(s));
  }
  auto join = [](const std::shared_ptr<const EmbeddingMatrix>& x,
                 const std::shared_ptr<const EmbeddingMatrix>& y)
      -> std::shared_ptr<const EmbeddingMatrix> {
    if (!x) return y;
    if (!y) return x;
    return std::make_shared<const EmbeddingMatrix>(x->concat(*y));
  };
  out.semantic = join(a.semantic, b.semantic);
  out.visual = join(a.visual, b.visual);
  validate(out);
  return out;
}

void save_dataset_dir(const Dataset& ds, const fs::path& dir, const Json& provenance) {
  validate(ds);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io, "cannot create directory " + dir.string());
  save_manifest(ds, dir / "manifest.jsonl");
  if (ds.semantic) write_embeddings(*ds.semantic, dir / "semantic.ssev");
  if (ds.visual) write_embeddings(*ds.visual, dir / "visual.ssev");
  Json meta;
  meta["name"] = ds.name;
  meta["scenes"] = ds.scenes.size();
  meta["provenance"] = provenance;
  write_json_file(meta, dir / "dataset.json");
}

Dataset load_dataset_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw Error(ErrorCode::io, "dataset directory not found: " + dir.string());
  }
  Dataset ds = load_manifest(dir / "manifest.jsonl");
  ds.name = dir.filename().string();
  if (fs::exists(dir / "dataset.json")) {
    const Json meta = read_json_file(dir / "dataset.json");
    if (meta.contains("name") && meta["name"].is_string()) ds.name = meta["name"];
  }
  std::shared_ptr<const EmbeddingMatrix> semantic, visual;
  if (fs::exists(dir / "semantic.ssev")) {
    semantic = std::make_shared<const EmbeddingMatrix>(read_embeddings(dir / "semantic.ssev"));
  }
  if (fs::exists(dir / "visual.ssev")) {
    visual = std::make_shared<const EmbeddingMatrix>(read_embeddings(dir / "visual.ssev"));
  }
  bind_embeddings(ds, std::move(semantic), std::move(visual));
  return ds;
}

// ---------------------------------------------------------------- reports

std::string_view to_string(AnchorPolicy p) {
  return p == AnchorPolicy::fixed ? "static" : "dynamic";
}

AnchorPolicy parse_anchor_policy(std::string_view s) {
  if (s == "static" || s == "STATIC") return AnchorPolicy::fixed;
  if (s == "dynamic" || s == "DYNAMIC") return AnchorPolicy::dynamic;
  throw Error(ErrorCode::invalid_argument,
              "anchor policy must be 'static' or 'dynamic', got '" + std::string(s) + "'");
}

void validate(const SelectionReport& r) {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::invariant, "invalid selection report: " + what);
  };
  if (!(r.params.epsilon >= 0.0 && r.params.epsilon <= 2.0)) fail("epsilon outside [0, 2]");
  if (r.kept + r.pruned != r.total) fail("kept + pruned != total");
  if (r.entries.size() != r.total) fail("entry count != total");

  std::unordered_map<std::string_view, const SelectionEntry*> by_id;
  std::size_t kept = 0;
  for (const auto& e : r.entries) {
    if (!by_id.emplace(e.scene_id, &e).second) fail("scene '" + e.scene_id + "' listed twice");
    if (e.cluster_id >= r.params.k) fail("cluster id out of range for '" + e.scene_id + "'");
    if (e.verdict == Verdict::kept) {
      ++kept;
      if (e.keeper_scene_id || e.visual_similarity) fail("kept scene '" + e.scene_id + "' has a keeper");
    }
  }
  if (kept != r.kept) fail("kept count does not match entries");
  for (const auto& e : r.entries) {
    if (e.verdict != Verdict::pruned) continue;
    if (!e.keeper_scene_id || !e.visual_similarity) {
      fail("pruned scene '" + e.scene_id + "' lacks keeper or similarity");
    }
    auto it = by_id.find(*e.keeper_scene_id);
    if (it == by_id.end() || it->second->verdict != Verdict::kept) {
      fail("keeper of '" + e.scene_id + "' is not a kept scene");
    }
    if (it->second->cluster_id != e.cluster_id) {
      fail("keeper of '" + e.scene_id + "' is in another cluster");
    }
    const double sim = *e.visual_similarity;
    if (!(sim >= -1.0 && sim <= 1.0) || !(1.0 - sim < r.params.epsilon)) {
      fail("similarity of '" + e.scene_id + "' does not exceed 1 - epsilon");
    }
  }
}

void validate(const EnrichmentReport& r) {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::invariant, "invalid enrichment report: " + what);
  };
  if (r.additions.size() != r.budget) fail("addition count != budget");
  std::unordered_set<std::string_view> seen;
  for (std::size_t i = 0; i < r.additions.size(); ++i) {
    const auto& a = r.additions[i];
    if (i > 0 && a.step <= r.additions[i - 1].step) fail("steps not strictly increasing");
    if (!seen.insert(a.scene_id).second) fail("scene '" + a.scene_id + "' added twice");
    if (!(a.semantic_distance >= 0.0 && a.semantic_distance <= 2.0)) {
      fail("distance of '" + a.scene_id + "' outside [0, 2]");
    }
  }
}

Json to_json(const SelectionReport& r) {
  Json j;
  j["kind"] = "selection_report";
  j["parameters"] = {{"k", r.params.k}, {"epsilon", r.params.epsilon}, {"seed", r.params.seed}};
  j["counts"] = {{"total", r.total}, {"kept", r.kept}, {"pruned", r.pruned}};
  Json entries = Json::array();
  for (const auto& e : r.entries) {
    Json x;
    x["scene_id"] = e.scene_id;
    x["cluster_id"] = e.cluster_id;
    x["verdict"] = verdict_name(e.verdict);
    if (e.keeper_scene_id) x["keeper_scene_id"] = *e.keeper_scene_id;
    if (e.visual_similarity) x["visual_similarity"] = *e.visual_similarity;
    if (e.missing_visual) x["missing_visual"] = true;
    entries.push_back(std::move(x));
  }
  j["entries"] = std::move(entries);
  j["provenance"] = r.provenance;
  return j;
}

Json to_json(const EnrichmentReport& r) {
  Json j;
  j["kind"] = "enrichment_report";
  j["parameters"] = {{"budget", r.budget}, {"anchor_policy", to_string(r.policy)}};
  Json anchors = Json::array();
  for (const auto& a : r.initial_anchors) {
    anchors.push_back({{"anchor_id", a.anchor_id}, {"origin", origin_name(a.origin)}});
  }
  j["anchors"] = std::move(anchors);
  Json adds = Json::array();
  for (const auto& a : r.additions) {
    adds.push_back({{"step", a.step},
                    {"scene_id", a.scene_id},
                    {"nearest_anchor_id", a.nearest_anchor_id},
                    {"semantic_distance", a.semantic_distance}});
  }
  j["additions"] = std::move(adds);
  j["provenance"] = r.provenance;
  return j;
}

SelectionReport selection_report_from_json(const Json& j) {
  try {
    if (j.at("kind") != "selection_report") {
      throw Error(ErrorCode::format, "not a selection report");
    }
    SelectionReport r;
    const auto& p = j.at("parameters");
    r.params = {p.at("k").get<std::uint32_t>(), p.at("epsilon").get<double>(),
                p.at("seed").get<std::uint64_t>()};
    const auto& c = j.at("counts");
    r.total = c.at("total");
    r.kept = c.at("kept");
    r.pruned = c.at("pruned");
    for (const auto& x : j.at("entries")) {
      SelectionEntry e;
      e.scene_id = x.at("scene_id");
      e.cluster_id = x.at("cluster_id");
      const std::string v = x.at("verdict");
      if (v == "KEPT") {
        e.verdict = Verdict::kept;
      } else if (v == "PRUNED") {
        e.verdict = Verdict::pruned;
      } else {
        throw Error(ErrorCode::format, "unknown verdict '" + v + "'");
      }
      if (x.contains("keeper_scene_id")) e.keeper_scene_id = x["keeper_scene_id"].get<std::string>();
      if (x.contains("visual_similarity")) e.visual_similarity = x["visual_similarity"].get<double>();
      e.missing_visual = x.value("missing_visual", false);
      r.entries.push_back(std::move(e));
    }
    r.provenance = j.value("provenance", Json::object());
    validate(r);
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::format, std::string("malformed selection report: ") + e.what());
  }
}

EnrichmentReport enrichment_report_from_json(const Json& j) {
  try {
    if (j.at("kind") != "enrichment_report") {
      throw Error(ErrorCode::format, "not an enrichment report");
    }
    EnrichmentReport r;
    const auto& p = j.at("parameters");
    r.budget = p.at("budget");
    r.policy = parse_anchor_policy(p.at("anchor_policy").get<std::string>());
    for (const auto& a : j.at("anchors")) {
      const std::string origin = a.at("origin");
      r.initial_anchors.push_back(
          {a.at("anchor_id"), origin == "ADDED" ? AnchorOrigin::added : AnchorOrigin::cluster});
    }
    for (const auto& a : j.at("additions")) {
      r.additions.push_back({a.at("step"), a.at("scene_id"), a.at("nearest_anchor_id"),
                             a.at("semantic_distance")});
    }
    r.provenance = j.value("provenance", Json::object());
    validate(r);
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::format, std::string("malformed enrichment report: ") + e.what());
  }
}

void save_report(const SelectionReport& r, const fs::path& path) {
  validate(r);
  write_json_file(to_json(r), path);
}

void save_report(const EnrichmentReport& r, const fs::path& path) {
  validate(r);
  write_json_file(to_json(r), path);
}

SelectionReport load_selection_report(const fs::path& path) {
  return selection_report_from_json(read_json_file(path));
}

EnrichmentReport load_enrichment_report(const fs::path& path) {
  return enrichment_report_from_json(read_json_file(path));
}

void write_json_file(const Json& j, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::io, "write failed for " + path.string());
}

Json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::parse, path.string() + ": " + e.what());
  }
}

}  // namespace sse
