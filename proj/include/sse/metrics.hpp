#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "sse/clustering.hpp"
#include "sse/datamodel.hpp"
#include "sse/selection.hpp"

namespace sse {

struct RetentionPoint {
  double epsilon;
  double fraction_remaining;
  std::size_t kept;

  bool operator==(const RetentionPoint&) const = default;
};

// One clustering shared across every epsilon; pruning rerun per epsilon.
std::vector<RetentionPoint> retention_curve(const Dataset& ds, const SelectOptions& base,
                                            std::span<const double> epsilons);
std::vector<RetentionPoint> retention_curve(const Dataset& ds, const ClusterModel& model,
                                            std::span<const double> epsilons);

// Distinct session ids per cluster (0 for empty clusters).
std::vector<std::size_t> unique_sessions_per_cluster(const ClusterModel& model,
                                                     const Dataset& ds);
double mean_unique_sessions(const std::vector<std::size_t>& per_cluster,
                            const ClusterModel& model);

// Total instances per class. Every scene must be labeled.
std::map<std::string, std::uint64_t> object_counts(const Dataset& ds);

struct KSweepPoint {
  std::uint32_t k;
  double fraction_remaining;
  double objective;

  bool operator==(const KSweepPoint&) const = default;
};

std::vector<KSweepPoint> k_sweep(const Dataset& ds, std::span<const std::uint32_t> ks,
                                 double epsilon, std::uint64_t seed,
                                 const SelectOptions& base = {});

Json to_json(std::span<const RetentionPoint> rows);
Json to_json(std::span<const KSweepPoint> rows);
std::string to_csv(std::span<const RetentionPoint> rows);
std::string to_csv(std::span<const KSweepPoint> rows);

}  // namespace sse
