#include "sse/metrics.hpp"

#include <set>
#include <sstream>

#include "sse/error.hpp"

namespace sse {

namespace {

std::string format_double(double v) {
  // Shortest round-trip form, matching the JSON writer.
  return Json(v).dump();
}

}  // namespace

std::vector<RetentionPoint> retention_curve(const Dataset& ds, const ClusterModel& model,
                                            std::span<const double> epsilons) {
  std::vector<RetentionPoint> out;
  for (double eps : epsilons) {
    SelectionParams params{model.k, eps, model.seed};
    const auto res = select_with_model(ds, model, params);
    const double frac = ds.size() == 0 ? 1.0
                                       : static_cast<double>(res.report.kept) /
                                             static_cast<double>(ds.size());
    out.push_back({eps, frac, res.report.kept});
  }
  return out;
}

std::vector<RetentionPoint> retention_curve(const Dataset& ds, const SelectOptions& base,
                                            std::span<const double> epsilons) {
  for (double eps : epsilons) {
    if (!(eps >= 0.0 && eps <= 2.0)) {
      throw Error(ErrorCode::invalid_argument, "every epsilon must be in [0, 2]");
    }
  }
  const EmbeddingMatrix rows = clustering_rows(ds, base.space);
  const ClusterModel model =
      kmeans_fit(rows, {base.params.k, base.params.seed, base.max_iters, base.tol, 0,
                        base.restarts});
  return retention_curve(ds, model, epsilons);
}

std::vector<std::size_t> unique_sessions_per_cluster(const ClusterModel& model,
                                                     const Dataset& ds) {
  if (model.assignment.size() != ds.size()) {
    throw Error(ErrorCode::precondition, "cluster assignment does not match dataset size");
  }
  std::vector<std::set<std::string_view>> sessions(model.k);
  for (std::size_t p = 0; p < ds.size(); ++p) {
    sessions[model.assignment[p]].insert(ds.scenes[p].session_id);
  }
  std::vector<std::size_t> out(model.k);
  for (std::size_t c = 0; c < model.k; ++c) out[c] = sessions[c].size();
  return out;
}

double mean_unique_sessions(const std::vector<std::size_t>& per_cluster,
                            const ClusterModel& model) {
  const auto members = model.members();
  double sum = 0.0;
  std::size_t non_empty = 0;
  for (std::size_t c = 0; c < per_cluster.size(); ++c) {
    if (members[c].empty()) continue;
    sum += static_cast<double>(per_cluster[c]);
    ++non_empty;
  }
  return non_empty == 0 ? 0.0 : sum / static_cast<double>(non_empty);
}

std::map<std::string, std::uint64_t> object_counts(const Dataset& ds) {
  std::map<std::string, std::uint64_t> out;
  for (const auto& s : ds.scenes) {
    if (!s.labels) {
      throw Error(ErrorCode::precondition, "scene '" + s.scene_id + "' is unlabeled");
    }
    for (const auto& [cls, count] : *s.labels) out[cls] += count;
  }
  return out;
}

std::vector<KSweepPoint> k_sweep(const Dataset& ds, std::span<const std::uint32_t> ks,
                                 double epsilon, std::uint64_t seed, const SelectOptions& base) {
  std::vector<KSweepPoint> out;
  for (std::uint32_t k : ks) {
    SelectOptions opts = base;
    opts.params = {k, epsilon, seed};
    const auto res = select(ds, opts);
    const double frac = ds.size() == 0 ? 1.0
                                       : static_cast<double>(res.report.kept) /
                                             static_cast<double>(ds.size());
    out.push_back({k, frac, res.model.objective});
  }
  return out;
}

Json to_json(std::span<const RetentionPoint> rows) {
  Json out = Json::array();
  for (const auto& r : rows) {
    out.push_back({{"epsilon", r.epsilon}, {"fraction_remaining", r.fraction_remaining},
                   {"kept", r.kept}});
  }
  return out;
}

Json to_json(std::span<const KSweepPoint> rows) {
  Json out = Json::array();
  for (const auto& r : rows) {
    out.push_back({{"k", r.k}, {"fraction_remaining", r.fraction_remaining},
                   {"objective", r.objective}});
  }
  return out;
}

std::string to_csv(std::span<const RetentionPoint> rows) {
  std::ostringstream os;
  os << "epsilon,fraction_remaining,kept\n";
  for (const auto& r : rows) {
    os << format_double(r.epsilon) << ',' << format_double(r.fraction_remaining) << ','
       << r.kept << '\n';
  }
  return os.str();
}

std::string to_csv(std::span<const KSweepPoint> rows) {
  std::ostringstream os;
  os << "k,fraction_remaining,objective\n";
  for (const auto& r : rows) {
    os << r.k << ',' << format_double(r.fraction_remaining) << ','
       << format_double(r.objective) << '\n';
  }
  return os.str();
}

}  // namespace sse
