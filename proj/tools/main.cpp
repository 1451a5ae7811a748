// sse: command-line front end for semantic selection and enrichment.

#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "commands.hpp"
#include "sse/error.hpp"
#include "sse/kernels.hpp"

namespace {

// Reads a JSON config file into CLI11 items. Nested objects name
// subcommands: {"threads": 4, "select": {"k": 8, "epsilon": 0.1}}.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool, std::string) const override {
    return "{}";
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    nlohmann::json j;
    try {
      input >> j;
    } catch (const nlohmann::json::exception& e) {
      throw CLI::ConversionError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config must be a JSON object");
    std::vector<CLI::ConfigItem> items;
    flatten(j, {}, items);
    return items;
  }

 private:
  static std::string scalar(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return v.dump();
    throw CLI::ConversionError("unsupported config value " + v.dump());
  }

  static void flatten(const nlohmann::json& obj, const std::vector<std::string>& parents,
                      std::vector<CLI::ConfigItem>& items) {
    for (const auto& [key, value] : obj.items()) {
      if (value.is_object()) {
        auto sub = parents;
        sub.push_back(key);
        flatten(value, sub, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(value));
      }
      items.push_back(std::move(item));
    }
  }
};

void print_error(std::string_view code, const std::string& message) {
  nlohmann::ordered_json j;
  j["error"] = {{"code", code}, {"message", message}};
  std::cerr << j.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  using namespace sse::cli;

  CLI::App app{"Semantic selection and enrichment over precomputed scene embeddings", "sse"};
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON file supplying any flag; command-line flags win");
  app.require_subcommand(1);

  Common common;
  app.add_option("--threads", common.threads, "OpenMP threads (outputs do not depend on it)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--prompt", common.prompt, "Captioning prompt, recorded in provenance");

  int rc = 0;
  auto run = [&](auto fn, const auto& args) {
    sse::kernels::set_num_threads(common.threads);
    rc = fn(common, args, std::cout);
  };

  IngestArgs ingest;
  auto* cmd_ingest = app.add_subcommand("ingest", "Bind a manifest to its embedding files");
  cmd_ingest->add_option("--manifest", ingest.manifest, "JSON-Lines manifest")->required();
  cmd_ingest->add_option("--semantic", ingest.semantic, "Semantic SSEV file");
  cmd_ingest->add_option("--visual", ingest.visual, "Visual SSEV file");
  cmd_ingest->add_option("--name", ingest.name, "Dataset name");
  cmd_ingest->add_option("--out", ingest.out, "Output dataset directory")->required();
  cmd_ingest->callback([&] { run(run_ingest, ingest); });

  SelectArgs sel;
  auto* cmd_select = app.add_subcommand("select", "Cluster, then prune visually redundant scenes");
  cmd_select->add_option("--dataset", sel.dataset, "Dataset directory")->required();
  cmd_select->add_option("--k", sel.k, "Number of clusters")->capture_default_str();
  cmd_select->add_option("--epsilon", sel.epsilon, "Pruning threshold (cosine distance)")
      ->capture_default_str();
  cmd_select->add_option("--seed", sel.seed, "k-means seed")->capture_default_str();
  cmd_select->add_option("--max-iters", sel.max_iters)->capture_default_str();
  cmd_select->add_option("--tol", sel.tol)->capture_default_str();
  cmd_select->add_option("--restarts", sel.restarts, "k-means runs; lowest objective kept")
      ->capture_default_str();
  cmd_select->add_option("--cluster-on", sel.cluster_on, "semantic | visual")
      ->capture_default_str();
  cmd_select->add_option("--method", sel.method, "sse | random | rfs")->capture_default_str();
  cmd_select->add_option("--fraction", sel.fraction, "Kept fraction for random/rfs")
      ->capture_default_str();
  cmd_select->add_option("--rfs-t", sel.rfs_t, "RFS frequency threshold")->capture_default_str();
  cmd_select->add_flag("--explain", sel.explain, "Print one line per decision");
  cmd_select->add_option("--out", sel.out, "Output directory")->required();
  cmd_select->callback([&] { run(run_select, sel); });

  EnrichArgs enr;
  auto* cmd_enrich = app.add_subcommand("enrich", "Add the pool scenes farthest from the anchors");
  cmd_enrich->add_option("--selected", enr.selected, "Output directory of `select`")->required();
  cmd_enrich->add_option("--pool", enr.pool, "Pool dataset directory")->required();
  cmd_enrich->add_option("--budget", enr.budget, "Number of pool scenes to add");
  cmd_enrich->add_option("--target-fraction", enr.target_fraction,
                         "Enriched size as a fraction of the original dataset");
  cmd_enrich->add_option("--anchor-policy", enr.anchor_policy, "dynamic | static")
      ->capture_default_str();
  cmd_enrich->add_flag("--explain", enr.explain, "Print one line per addition");
  cmd_enrich->add_option("--out", enr.out, "Output directory")->required();
  cmd_enrich->callback([&] { run(run_enrich, enr); });

  RetrieveArgs ret;
  auto* cmd_retrieve = app.add_subcommand("retrieve", "Exact semantic search over a dataset");
  cmd_retrieve->add_option("--dataset", ret.dataset)->required();
  cmd_retrieve->add_option("--query", ret.query)->required();
  cmd_retrieve->add_option("--provider", ret.provider, "Provider config JSON")->required();
  cmd_retrieve->add_option("--top", ret.top)->capture_default_str();
  cmd_retrieve->callback([&] { run(run_retrieve, ret); });

  ReportArgs rep;
  auto* cmd_report = app.add_subcommand("report", "Dataset analyses");
  cmd_report->require_subcommand(1);
  auto add_common = [&](CLI::App* sub, bool clustered) {
    sub->add_option("--dataset", rep.dataset)->required();
    sub->add_option("--out", rep.out, "Write to file instead of stdout");
    sub->add_flag("--csv", rep.csv, "CSV instead of JSON");
    if (clustered) {
      sub->add_option("--seed", rep.seed)->capture_default_str();
      sub->add_option("--max-iters", rep.max_iters)->capture_default_str();
      sub->add_option("--tol", rep.tol)->capture_default_str();
      sub->add_option("--restarts", rep.restarts)->capture_default_str();
      sub->add_option("--cluster-on", rep.cluster_on)->capture_default_str();
    }
  };
  auto* rep_retention = cmd_report->add_subcommand("retention", "Retention vs epsilon");
  add_common(rep_retention, true);
  rep_retention->add_option("--k", rep.k)->capture_default_str();
  rep_retention->add_option("--epsilons", rep.epsilons)->delimiter(',');
  rep_retention->callback([&] { run(run_report_retention, rep); });

  auto* rep_sessions = cmd_report->add_subcommand("sessions", "Unique sessions per cluster");
  add_common(rep_sessions, true);
  rep_sessions->add_option("--k", rep.k)->capture_default_str();
  rep_sessions->callback([&] { run(run_report_sessions, rep); });

  auto* rep_objects = cmd_report->add_subcommand("objects", "Object instances per class");
  add_common(rep_objects, false);
  rep_objects->callback([&] { run(run_report_objects, rep); });

  auto* rep_ksweep = cmd_report->add_subcommand("ksweep", "Retention and objective per k");
  add_common(rep_ksweep, true);
  rep_ksweep->add_option("--ks", rep.ks)->delimiter(',')->required();
  rep_ksweep->add_option("--epsilon", rep.epsilon)->capture_default_str();
  rep_ksweep->callback([&] { run(run_report_ksweep, rep); });

  SynthArgs syn;
  auto* cmd_synth = app.add_subcommand("synth", "Generate a synthetic dataset with ground truth");
  cmd_synth->add_option("--blobs", syn.spec.blobs)->capture_default_str();
  cmd_synth->add_option("--per-blob", syn.spec.per_blob)->capture_default_str();
  cmd_synth->add_option("--dim", syn.spec.dim)->capture_default_str();
  cmd_synth->add_option("--sigma", syn.spec.sigma)->capture_default_str();
  cmd_synth->add_option("--sessions-per-blob", syn.spec.sessions_per_blob)->capture_default_str();
  cmd_synth->add_option("--duplicates", syn.spec.duplicate_pairs)->capture_default_str();
  cmd_synth->add_option("--labels", syn.labels, "none | uniform | longtail")->capture_default_str();
  cmd_synth->add_option("--seed", syn.spec.seed)->capture_default_str();
  cmd_synth->add_option("--visual-session-weight", syn.spec.visual_session_weight)
      ->capture_default_str();
  cmd_synth->add_option("--visual-sigma", syn.spec.visual_sigma)->capture_default_str();
  cmd_synth->add_option("--id-prefix", syn.spec.id_prefix)->capture_default_str();
  cmd_synth->add_option("--out", syn.out)->required();
  cmd_synth->callback([&] { run(run_synth, syn); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return 2;
  } catch (const sse::Error& e) {
    print_error(sse::to_string(e.code()), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return 1;
  }
  return rc;
}
