#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <ostream>

#include "sse/clustering.hpp"
#include "sse/datamodel.hpp"
#include "sse/enrichment.hpp"
#include "sse/error.hpp"
#include "sse/metrics.hpp"
#include "sse/provenance.hpp"
#include "sse/providers.hpp"
#include "sse/retrieval.hpp"
#include "sse/selection.hpp"

namespace sse::cli {

namespace fs = std::filesystem;

namespace {

std::string percent(std::size_t part, std::size_t whole) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%",
                whole == 0 ? 100.0 : 100.0 * static_cast<double>(part) / static_cast<double>(whole));
  return buf;
}

std::string fixed6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

ClusterSpace parse_space(const std::string& s) {
  if (s == "semantic") return ClusterSpace::semantic;
  if (s == "visual") return ClusterSpace::visual;
  throw Error(ErrorCode::invalid_argument, "--cluster-on must be 'semantic' or 'visual'");
}

std::shared_ptr<const EmbeddingMatrix> load_normalized(const std::string& path) {
  if (path.empty()) return nullptr;
  EmbeddingMatrix m = read_embeddings(path);
  if (!m.normalized()) m = normalize(m);
  return std::make_shared<const EmbeddingMatrix>(std::move(m));
}

// Emits `text` to --out when given, otherwise to stdout.
void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw Error(ErrorCode::io, "cannot write " + path);
  f << text;
}

Json select_parameters(const SelectArgs& a) {
  Json p;
  p["method"] = a.method;
  if (a.method == "sse") {
    p["k"] = a.k;
    p["epsilon"] = a.epsilon;
    p["seed"] = a.seed;
    p["max_iters"] = a.max_iters;
    p["tol"] = a.tol;
    p["restarts"] = a.restarts;
    p["cluster_on"] = a.cluster_on;
  } else {
    p["fraction"] = a.fraction;
    p["seed"] = a.seed;
    if (a.method == "rfs") p["t"] = a.rfs_t;
  }
  return p;
}

Json report_parameters(const ReportArgs& a, std::string_view which) {
  Json p;
  if (which == "objects") return Json::object();
  p["seed"] = a.seed;
  p["max_iters"] = a.max_iters;
  p["tol"] = a.tol;
  p["restarts"] = a.restarts;
  p["cluster_on"] = a.cluster_on;
  if (which == "retention") {
    p["k"] = a.k;
    p["epsilons"] = a.epsilons;
  } else if (which == "sessions") {
    p["k"] = a.k;
  } else if (which == "ksweep") {
    p["ks"] = a.ks;
    p["epsilon"] = a.epsilon;
  }
  return p;
}

SelectOptions select_options(const ReportArgs& a) {
  SelectOptions o;
  o.params = {a.k, 0.0, a.seed};
  o.max_iters = a.max_iters;
  o.tol = a.tol;
  o.restarts = a.restarts;
  o.space = parse_space(a.cluster_on);
  return o;
}

Json dataset_inputs(const std::string& dir) { return {{"dataset", digest_dataset_dir(dir)}}; }

}  // namespace

int run_ingest(const Common& c, const IngestArgs& a, std::ostream& out) {
  Dataset ds = load_manifest(a.manifest);
  if (!a.name.empty()) ds.name = a.name;
  bind_embeddings(ds, load_normalized(a.semantic), load_normalized(a.visual));

  Json inputs;
  inputs["manifest"] = sha256_file(a.manifest);
  if (!a.semantic.empty()) inputs["semantic"] = sha256_file(a.semantic);
  if (!a.visual.empty()) inputs["visual"] = sha256_file(a.visual);
  save_dataset_dir(ds, a.out,
                   make_provenance("ingest", {{"name", ds.name}}, inputs, c.prompt));
  out << "ingested " << ds.size() << " scenes";
  if (ds.semantic) out << ", semantic dim " << ds.semantic->dim();
  if (ds.visual) out << ", visual dim " << ds.visual->dim();
  out << '\n';
  return 0;
}

int run_select(const Common& c, const SelectArgs& a, std::ostream& out) {
  const Dataset ds = load_dataset_dir(a.dataset);
  const Json prov =
      make_provenance("select", select_parameters(a), dataset_inputs(a.dataset), c.prompt);
  const fs::path dir = a.out;
  fs::create_directories(dir);

  if (a.method == "random" || a.method == "rfs") {
    const auto kept = a.method == "random" ? random_select(ds, a.fraction, a.seed)
                                           : rfs_select(ds, a.fraction, a.rfs_t, a.seed);
    const Dataset sel = subset(ds, kept);
    save_dataset_dir(sel, dir / "selected", prov);
    Json report;
    report["kind"] = "baseline_selection";
    report["parameters"] = select_parameters(a);
    report["counts"] = {{"total", ds.size()}, {"kept", sel.size()}};
    Json ids = Json::array();
    for (const auto& s : sel.scenes) ids.push_back(s.scene_id);
    report["kept"] = std::move(ids);
    report["provenance"] = prov;
    write_json_file(report, dir / "baseline_report.json");
    out << a.method << ": kept " << sel.size() << " of " << ds.size() << " scenes (retention "
        << percent(sel.size(), ds.size()) << ")\n";
    return 0;
  }
  if (a.method != "sse") {
    throw Error(ErrorCode::invalid_argument, "--method must be sse, random or rfs");
  }

  SelectOptions opts;
  opts.params = {a.k, a.epsilon, a.seed};
  opts.max_iters = a.max_iters;
  opts.tol = a.tol;
  opts.restarts = a.restarts;
  opts.space = parse_space(a.cluster_on);
  SelectionResult res = select(ds, opts);
  res.report.provenance = prov;

  save_dataset_dir(res.selected, dir / "selected", prov);
  save_report(res.report, dir / "selection_report.json");
  save_cluster_model(res.model, dir / "clusters.ssev", dir / "clusters.json",
                     {{"cluster_on", a.cluster_on}});

  if (a.explain) {
    for (const auto& e : res.report.entries) {
      out << "scene=" << e.scene_id << " cluster=" << e.cluster_id << " verdict="
          << (e.verdict == Verdict::kept ? "KEPT" : "PRUNED");
      if (e.verdict == Verdict::pruned) {
        out << " keeper=" << *e.keeper_scene_id << " similarity=" << fixed6(*e.visual_similarity);
      }
      if (e.missing_visual) out << " missing_visual=true";
      out << '\n';
    }
  }
  out << "kept " << res.report.kept << " of " << res.report.total << " scenes (retention "
      << percent(res.report.kept, res.report.total) << "), pruned " << res.report.pruned
      << ", k=" << a.k << " epsilon=" << a.epsilon << '\n';
  return 0;
}

int run_enrich(const Common& c, const EnrichArgs& a, std::ostream& out) {
  const fs::path sel_dir = a.selected;
  const Dataset selected = load_dataset_dir(sel_dir / "selected");
  const SelectionReport sel_report = load_selection_report(sel_dir / "selection_report.json");
  ClusterModel model = load_cluster_model(sel_dir / "clusters.ssev", sel_dir / "clusters.json");
  const Dataset pool = load_dataset_dir(a.pool);

  // Cluster ids of the survivors, aligned with the selected dataset.
  model.assignment.clear();
  for (const auto& e : sel_report.entries) {
    if (e.verdict == Verdict::kept) model.assignment.push_back(e.cluster_id);
  }
  if (model.assignment.size() != selected.size()) {
    throw Error(ErrorCode::invariant, "selection report does not match the selected dataset");
  }
  {
    std::size_t i = 0;
    for (const auto& e : sel_report.entries) {
      if (e.verdict != Verdict::kept) continue;
      if (selected.scenes[i++].scene_id != e.scene_id) {
        throw Error(ErrorCode::invariant, "selected dataset order differs from the report");
      }
    }
  }

  if (a.budget.has_value() == a.target_fraction.has_value()) {
    throw Error(ErrorCode::invalid_argument, "give exactly one of --budget or --target-fraction");
  }
  std::size_t budget = 0;
  if (a.budget) {
    budget = *a.budget;
  } else {
    if (!(*a.target_fraction > 0.0)) {
      throw Error(ErrorCode::invalid_argument, "--target-fraction must be positive");
    }
    const double want = *a.target_fraction * static_cast<double>(sel_report.total);
    const auto target = static_cast<std::size_t>(std::ceil(want - 1e-9));
    if (target < selected.size()) {
      throw Error(ErrorCode::invalid_argument,
                  "target size " + std::to_string(target) + " is below the selected size " +
                      std::to_string(selected.size()));
    }
    budget = target - selected.size();
  }

  const AnchorPolicy policy = parse_anchor_policy(a.anchor_policy);
  const AnchorSet anchors = anchors_from_clusters(model, selected, policy);
  EnrichmentResult res = enrich(selected, pool, anchors, budget);

  Json params = {{"budget", budget}, {"anchor_policy", to_string(policy)}};
  if (a.target_fraction) params["target_fraction"] = *a.target_fraction;
  Json inputs;
  inputs["selected"] = digest_dataset_dir(sel_dir / "selected");
  inputs["selection_report"] = sha256_file(sel_dir / "selection_report.json");
  inputs["clusters"] = sha256_file(sel_dir / "clusters.ssev");
  inputs["pool"] = digest_dataset_dir(a.pool);
  const Json prov = make_provenance("enrich", params, inputs, c.prompt);
  res.report.provenance = prov;

  const fs::path dir = a.out;
  fs::create_directories(dir);
  save_dataset_dir(res.enriched, dir / "enriched", prov);
  save_report(res.report, dir / "enrichment_report.json");

  if (a.explain) {
    for (const auto& add : res.report.additions) {
      out << "step=" << add.step << " scene=" << add.scene_id << " verdict=ADDED anchor="
          << add.nearest_anchor_id << " distance=" << fixed6(add.semantic_distance) << '\n';
    }
  }
  out << "added " << budget << " pool scenes to " << selected.size() << " selected ("
      << res.enriched.size() << " total, " << anchors.anchors.size() << " anchors, "
      << to_string(policy) << ")\n";
  return 0;
}

int run_retrieve(const Common&, const RetrieveArgs& a, std::ostream& out) {
  const Dataset ds = load_dataset_dir(a.dataset);
  const ProviderConfig cfg = ProviderConfig::load(a.provider);
  const auto query = embed_query(cfg, a.query);
  const auto hits = retrieve(ds, query, a.top);
  out << hits_to_json(ds, hits).dump(2) << '\n';
  return 0;
}

int run_report_retention(const Common& c, const ReportArgs& a, std::ostream& out) {
  const Dataset ds = load_dataset_dir(a.dataset);
  const auto rows = retention_curve(ds, select_options(a), a.epsilons);
  if (a.csv) {
    emit(a.out, to_csv(std::span<const RetentionPoint>(rows)), out);
    return 0;
  }
  Json j;
  j["kind"] = "retention_curve";
  j["rows"] = to_json(std::span<const RetentionPoint>(rows));
  j["provenance"] = make_provenance("report retention", report_parameters(a, "retention"),
                                    dataset_inputs(a.dataset), c.prompt);
  emit(a.out, j.dump(2) + "\n", out);
  return 0;
}

int run_report_sessions(const Common& c, const ReportArgs& a, std::ostream& out) {
  const Dataset ds = load_dataset_dir(a.dataset);
  const auto opts = select_options(a);
  const ClusterModel model =
      kmeans_fit(clustering_rows(ds, opts.space),
                 {a.k, a.seed, a.max_iters, a.tol, 0, a.restarts});
  const auto per_cluster = unique_sessions_per_cluster(model, ds);
  const auto members = model.members();
  if (a.csv) {
    std::string text = "cluster,members,unique_sessions\n";
    for (std::size_t k = 0; k < per_cluster.size(); ++k) {
      text += std::to_string(k) + "," + std::to_string(members[k].size()) + "," +
              std::to_string(per_cluster[k]) + "\n";
    }
    emit(a.out, text, out);
    return 0;
  }
  Json rows = Json::array();
  for (std::size_t k = 0; k < per_cluster.size(); ++k) {
    rows.push_back({{"cluster", k}, {"members", members[k].size()},
                    {"unique_sessions", per_cluster[k]}});
  }
  Json j;
  j["kind"] = "unique_sessions_per_cluster";
  j["rows"] = std::move(rows);
  j["mean_unique_sessions"] = mean_unique_sessions(per_cluster, model);
  j["provenance"] = make_provenance("report sessions", report_parameters(a, "sessions"),
                                    dataset_inputs(a.dataset), c.prompt);
  emit(a.out, j.dump(2) + "\n", out);
  return 0;
}

int run_report_objects(const Common& c, const ReportArgs& a, std::ostream& out) {
  const Dataset ds = load_dataset_dir(a.dataset);
  const auto counts = object_counts(ds);
  if (a.csv) {
    std::string text = "class,count\n";
    for (const auto& [cls, n] : counts) text += cls + "," + std::to_string(n) + "\n";
    emit(a.out, text, out);
    return 0;
  }
  Json j;
  j["kind"] = "object_counts";
  Json m = Json::object();
  for (const auto& [cls, n] : counts) m[cls] = n;
  j["counts"] = std::move(m);
  j["provenance"] = make_provenance("report objects", report_parameters(a, "objects"),
                                    dataset_inputs(a.dataset), c.prompt);
  emit(a.out, j.dump(2) + "\n", out);
  return 0;
}

int run_report_ksweep(const Common& c, const ReportArgs& a, std::ostream& out) {
  if (a.ks.empty()) throw Error(ErrorCode::invalid_argument, "--ks needs at least one value");
  const Dataset ds = load_dataset_dir(a.dataset);
  const auto rows = k_sweep(ds, a.ks, a.epsilon, a.seed, select_options(a));
  if (a.csv) {
    emit(a.out, to_csv(std::span<const KSweepPoint>(rows)), out);
    return 0;
  }
  Json j;
  j["kind"] = "k_sweep";
  j["rows"] = to_json(std::span<const KSweepPoint>(rows));
  j["provenance"] = make_provenance("report ksweep", report_parameters(a, "ksweep"),
                                    dataset_inputs(a.dataset), c.prompt);
  emit(a.out, j.dump(2) + "\n", out);
  return 0;
}

int run_synth(const Common&, const SynthArgs& a, std::ostream& out) {
  SynthSpec spec = a.spec;
  spec.labels = parse_label_profile(a.labels);
  const SynthOutput gen = generate(spec);
  write_synth(gen, spec, a.out);
  out << "generated " << gen.dataset.size() << " scenes in " << spec.blobs << " blobs, "
      << gen.truth.duplicate_pairs.size() << " duplicate pairs\n";
  return 0;
}

}  // namespace sse::cli
